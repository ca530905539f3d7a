import math

import numpy as np
import pytest

from finsler_forge import jetcalc
from finsler_forge.exceptions import EvaluationError
from finsler_forge.exceptions import InputError
from finsler_forge.exceptions import QuadratureError
from finsler_forge.exceptions import SingularMatrixError
from finsler_forge.jetcalc import Number
from finsler_forge.jetcalc import ScalarField
from finsler_forge.jetcalc import TaylorField


def wavy(p: list[Number]) -> Number:
    return jetcalc.sin(p[0]) * jetcalc.exp(p[1]) + p[0] * p[1] * p[1]


@pytest.fixture
def wavy_field() -> ScalarField:
    """A smooth two-dimensional field with known derivatives.

    Returns:
        ``sin(x) e^y + x y^2``.
    """
    return ScalarField(dim=2, fn=wavy, name="wavy")


def central_difference(fn: ScalarField, point: list[float], k: int, step: float = 1e-5) -> float:
    up: list[float] = list(point)
    down: list[float] = list(point)
    up[k] += step
    down[k] -= step
    return (jetcalc.primal(fn(up)) - jetcalc.primal(fn(down))) / (2 * step)


def test_eval_matches_closed_form(wavy_field: ScalarField) -> None:
    """Test the jet against hand-computed value, gradient and Hessian."""
    x, y = 0.4, -0.3
    jet = wavy_field.eval([x, y])

    assert jet.value == pytest.approx(math.sin(x) * math.exp(y) + x * y * y, rel=1e-14)
    assert jet.grad[0] == pytest.approx(math.cos(x) * math.exp(y) + y * y, rel=1e-14)
    assert jet.grad[1] == pytest.approx(math.sin(x) * math.exp(y) + 2 * x * y, rel=1e-14)
    assert jet.hess[0][0] == pytest.approx(-math.sin(x) * math.exp(y), rel=1e-14)
    assert jet.hess[0][1] == pytest.approx(math.cos(x) * math.exp(y) + 2 * y, rel=1e-14)
    assert jet.hess[1][1] == pytest.approx(math.sin(x) * math.exp(y) + 2 * x, rel=1e-14)
    assert jet.hess[0][1] == jet.hess[1][0]


def test_gradient_matches_finite_differences(wavy_field: ScalarField) -> None:
    """Test the exact gradient against central differences at a few points."""
    for point in ([0.1, 0.2], [1.3, -0.7], [-0.5, 0.9]):
        grad: list[Number] = jetcalc.gradient(wavy_field, point)
        for k in range(2):
            expected: float = central_difference(wavy_field, point, k)
            assert jetcalc.primal(grad[k]) == pytest.approx(expected, rel=1e-6)


def test_nested_gradient_gives_second_derivatives(wavy_field: ScalarField) -> None:
    """Test that a gradient taken at a seeded point carries the next order."""
    tag, duals = jetcalc.seed([0.4, -0.3])
    grad: list[Number] = jetcalc.gradient(wavy_field, duals)
    mixed: Number = jetcalc.tangent(grad[0], tag, 1)
    assert jetcalc.primal(mixed) == pytest.approx(math.cos(0.4) * math.exp(-0.3) - 0.6, rel=1e-14)


def test_hessian_matches_jet(wavy_field: ScalarField) -> None:
    """Test that the object-array Hessian agrees with the jet."""
    hess = jetcalc.to_float(jetcalc.hessian(wavy_field, [0.4, -0.3]))
    jet = wavy_field.eval([0.4, -0.3])
    assert np.allclose(hess, np.array(jet.hess), rtol=1e-14, atol=0.0)


def test_partial_of_high_order() -> None:
    """Test a fourth derivative along one axis and a mixed third derivative."""
    fourth: Number = jetcalc.partial(lambda p: jetcalc.sin(p[0]), [0.7], [0, 0, 0, 0])
    assert jetcalc.primal(fourth) == pytest.approx(math.sin(0.7), rel=1e-13)

    mixed: Number = jetcalc.partial(lambda p: p[0] * p[0] * p[1], [1.5, 2.0], [0, 0, 1])
    assert jetcalc.primal(mixed) == pytest.approx(2.0)


def test_tangent_of_plain_float_is_zero() -> None:
    """Test that a float carries no derivative along any tag."""
    tag, _ = jetcalc.seed([1.0])
    assert jetcalc.tangent(3.0, tag, 0) == 0.0


def test_eval_rejects_wrong_dimension(wavy_field: ScalarField) -> None:
    """Test that a point of the wrong length is an input error."""
    with pytest.raises(InputError, match="expects 2 coordinates"):
        wavy_field.eval([0.1, 0.2, 0.3])


def test_eval_rejects_non_finite() -> None:
    """Test that a non-finite jet is reported."""
    field = ScalarField(dim=1, fn=lambda p: p[0] * 1e308 * 10.0, name="big")
    with pytest.raises(EvaluationError, match="not finite"):
        field.eval([1.0])


@pytest.mark.parametrize(
    ("fn", "arg"),
    [
        (jetcalc.log, -1.0),
        (jetcalc.sqrt, -4.0),
        (jetcalc.reciprocal, 0.0),
    ],
)
def test_domain_errors(fn: object, arg: float) -> None:
    """Test that elementary functions outside their domain raise."""
    with pytest.raises(EvaluationError):
        fn(arg)  # type: ignore[operator]


def test_power_accepts_negative_base_with_integer_exponent() -> None:
    """Test integer powers of negative numbers and their derivative."""
    assert jetcalc.power(-2.0, 3.0) == -8.0
    slope: list[Number] = jetcalc.gradient(lambda p: jetcalc.power(p[0], 3.0), [-2.0])
    assert jetcalc.primal(slope[0]) == pytest.approx(12.0)
    with pytest.raises(EvaluationError, match="Negative base"):
        jetcalc.power(-2.0, 0.5)


def test_taylor_field_lifts_a_derivative_oracle() -> None:
    """Test that an oracle-backed field differentiates like its closed form."""

    def oracle(orders: tuple[int, ...], point: tuple[float, ...]) -> float:
        # exp(2x): the k-th derivative is 2^k exp(2x)
        return 2.0 ** orders[0] * math.exp(2.0 * point[0])

    field = TaylorField(dim=1, partial=oracle).as_field()
    jet = field.eval([0.3])
    assert jet.value == pytest.approx(math.exp(0.6))
    assert jet.grad[0] == pytest.approx(2 * math.exp(0.6))
    assert jet.hess[0][0] == pytest.approx(4 * math.exp(0.6))


def test_invert_symmetric_indefinite() -> None:
    """Test inversion of an indefinite symmetric matrix."""
    m = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, -2.0]])
    inverse = jetcalc.invert_symmetric(m)
    assert np.allclose(inverse @ m, np.eye(3), atol=1e-14)


def test_invert_symmetric_singular() -> None:
    """Test that a rank-deficient matrix raises."""
    with pytest.raises(SingularMatrixError):
        jetcalc.invert_symmetric(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_invert_symmetric_rejects_asymmetric() -> None:
    """Test that an asymmetric matrix is an input error."""
    with pytest.raises(InputError, match="not symmetric"):
        jetcalc.invert_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_invert_symmetric_differentiates() -> None:
    """Test d(A^-1)/dt = -A^-1 A' A^-1 on a one-parameter family."""

    def inverse_entry(p: list[Number]) -> Number:
        t: Number = p[0]
        m = np.array([[2.0 + t, t], [t, 3.0]], dtype=object)
        return jetcalc.invert_symmetric(m)[0, 0]

    t0: float = 0.5
    slope: float = jetcalc.primal(jetcalc.gradient(inverse_entry, [t0])[0])
    a = np.array([[2.0 + t0, t0], [t0, 3.0]])
    inv = np.linalg.inv(a)
    expected: float = float(-(inv @ np.array([[1.0, 1.0], [1.0, 0.0]]) @ inv)[0, 0])
    assert slope == pytest.approx(expected, rel=1e-12)


def test_spectral_integral_is_exact_for_smooth_integrands() -> None:
    """Test Clenshaw-Curtis integration of exp on [0, 1]."""
    assert jetcalc.spectral_integral(jetcalc.exp, 0.0, 1.0) == pytest.approx(math.e - 1.0, abs=1e-14)


def test_spectral_integral_differentiates_the_upper_limit() -> None:
    """Test that the derivative in the upper limit is the integrand there."""
    slope = jetcalc.gradient(lambda p: jetcalc.spectral_integral(jetcalc.cos, 0.0, p[0]), [0.8])
    assert jetcalc.primal(slope[0]) == pytest.approx(math.cos(0.8), abs=1e-13)


def test_cumulative_profile() -> None:
    """Test that the running integrals end at the total and start at zero."""
    prof = jetcalc.profile(lambda s: s * s, 0.0, 2.0, size=17)
    assert prof.running[0] == pytest.approx(0.0, abs=1e-14)
    assert prof.total == pytest.approx(8.0 / 3.0, abs=1e-13)


def test_quad_1d() -> None:
    """Test the adaptive oracle and its failure mode."""
    assert jetcalc.quad_1d(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-10)
    with pytest.raises(QuadratureError) as excinfo:
        jetcalc.quad_1d(lambda x: math.sin(1.0 / x) if x > 0 else 0.0, 0.0, 1.0, tol=1e-14)
    assert math.isfinite(excinfo.value.best_estimate)


def test_halton_points_are_deterministic() -> None:
    """Test that a seed reproduces the same points inside the box."""
    first = jetcalc.halton_points([0.0, -1.0], [1.0, 1.0], 16, seed=3)
    second = jetcalc.halton_points([0.0, -1.0], [1.0, 1.0], 16, seed=3)
    assert np.array_equal(first, second)
    assert first.shape == (16, 2)
    assert np.all(first[:, 1] >= -1.0)
    assert np.all(first[:, 1] <= 1.0)


def test_halton_points_reject_degenerate_box() -> None:
    """Test that an empty box is an input error."""
    with pytest.raises(InputError, match="Degenerate sample box"):
        jetcalc.halton_points([0.0, 1.0], [1.0, 1.0], 4)


def test_eval_jet2_value_gradient_hessian() -> None:
    """Test the second-order jet of ``x^2 y + sin(y)``."""
    field = ScalarField(dim=2, fn=lambda u: u[0] * u[0] * u[1] + jetcalc.sin(u[1]), name="cubic")
    jet = jetcalc.eval_jet2(field, [1.0, 2.0])
    assert jet.value == pytest.approx(2.0 + math.sin(2.0))
    assert jet.grad == pytest.approx((4.0, 1.0 + math.cos(2.0)))
    assert np.allclose(jet.hess, [[4.0, 2.0], [2.0, -math.sin(2.0)]], atol=1e-14)
    with pytest.raises(InputError, match="expects 2 coordinates"):
        jetcalc.eval_jet2(field, [1.0])


@pytest.mark.parametrize(("lower", "upper"), [(0.0, 1.0), (-0.5, 2.0), (0.3, 0.9)])
def test_spectral_integral_matches_adaptive_quadrature(lower: float, upper: float) -> None:
    """Test the spectral rule against the adaptive float quadrature."""

    def integrand(s: jetcalc.Number) -> jetcalc.Number:
        return jetcalc.exp(jetcalc.sin(s)) * (1.0 + s * s)

    expected: float = jetcalc.quad_1d(lambda s: float(integrand(s)), lower, upper, tol=1e-12)
    assert jetcalc.spectral_integral(integrand, lower, upper) == pytest.approx(expected, abs=1e-10)
