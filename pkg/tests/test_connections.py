import numpy as np
import pytest

from finsler_forge import jetcalc
from finsler_forge.ansatzgen import CosmoRecipe
from finsler_forge.ansatzgen import SolutionRecipe
from finsler_forge.ansatzgen import Source
from finsler_forge.ansatzgen import generate_4d_cosmo
from finsler_forge.ansatzgen import generate_sol1
from finsler_forge.connections import CanonicalConnection
from finsler_forge.connections import adapted_levi_civita
from finsler_forge.connections import canonical_dconnection
from finsler_forge.connections import cartan_dconnection
from finsler_forge.connections import check_lc_conditions
from finsler_forge.connections import distortion_tensor
from finsler_forge.connections import get_connection
from finsler_forge.connections import hv_dconnection
from finsler_forge.connections import levi_civita
from finsler_forge.connections import notable_dconnection
from finsler_forge.dcurv import dtorsion
from finsler_forge.dcurv import nonmetricity
from finsler_forge.exceptions import InputError
from finsler_forge.exceptions import ShapeError
from finsler_forge.expressions import compile_field
from finsler_forge.finsler import FinslerFunction
from finsler_forge.finsler import bogoslovsky
from finsler_forge.finsler import riemann_quadratic
from finsler_forge.finsler import sasaki_lift
from finsler_forge.nholon import DMetric
from tests.conftest import COORDINATES
from tests.conftest import CURVED_POINT
from tests.conftest import field_rule

TIMELIKE: list[float] = [0.1, 0.2, 0.3, 0.4, 2.5, 0.2, -0.1, 0.3]


def test_canonical_connection_is_metric_compatible(curved: DMetric) -> None:
    """Test that every nonmetricity component of the canonical connection vanishes."""
    coeffs = canonical_dconnection(curved, CURVED_POINT)
    assert nonmetricity(coeffs, curved, CURVED_POINT).max_norm() < 1e-12


def test_canonical_horizontal_family_is_symmetric(curved: DMetric) -> None:
    """Test that ``L^i_jk`` and ``C^a_bc`` are symmetric in their lower indices."""
    coeffs = canonical_dconnection(curved, CURVED_POINT)
    assert np.allclose(coeffs.L_h, np.transpose(coeffs.L_h, (0, 2, 1)), atol=1e-14)
    assert np.allclose(coeffs.C_v, np.transpose(coeffs.C_v, (0, 2, 1)), atol=1e-14)
    assert coeffs.kind == "canonical"
    assert coeffs.full().shape == (4, 4, 4)


def test_distortion_recovers_levi_civita(curved: DMetric) -> None:
    """Test that canonical coefficients plus the distortion are the Levi-Civita connection in the adapted frame."""
    canonical = canonical_dconnection(curved, CURVED_POINT).full()
    distortion = distortion_tensor(curved, CURVED_POINT)
    expected = jetcalc.to_float(adapted_levi_civita(curved, CURVED_POINT))
    assert np.allclose(jetcalc.to_float(canonical + distortion.full()), expected, atol=1e-11)
    assert distortion.max_abs() > 0.0


def test_distortion_vanishes_on_a_holonomic_product(sphere: DMetric) -> None:
    """Test that the two connections agree when the LC conditions hold."""
    point: list[float] = [0.8, 0.1, 0.4]
    assert distortion_tensor(sphere, point).max_abs() < 1e-14
    report = check_lc_conditions(sphere, [point, [1.1, -0.3, 2.0]])
    assert report.extractable
    assert report.points == 2


def test_lc_conditions_name_violations(curved: DMetric) -> None:
    """Test that a twisted N-connection and fiber-dependent g fail the LC conditions."""
    report = check_lc_conditions(curved, [CURVED_POINT])
    assert not report.extractable
    assert "Omega" in report.violated
    assert "C_h" in report.violated


def test_levi_civita_of_sphere(sphere: DMetric) -> None:
    """Test ``Γ^θ_φφ = −sin θ cos θ`` and ``Γ^φ_θφ = cot θ``."""
    gamma = jetcalc.to_float(levi_civita(sphere, [0.8, 0.1, 0.4]))
    assert gamma[0, 1, 1] == pytest.approx(-np.sin(0.8) * np.cos(0.8))
    assert gamma[1, 0, 1] == pytest.approx(1.0 / np.tan(0.8))
    assert gamma[1, 1, 0] == gamma[1, 0, 1]


def test_cartan_connection_is_metric_compatible() -> None:
    """Test the Cartan connection of a lifted Bogoslovsky element."""
    metric = sasaki_lift(bogoslovsky(b=0.2))
    coeffs = cartan_dconnection(metric, TIMELIKE)
    assert coeffs.kind == "cartan"
    assert nonmetricity(coeffs, metric, TIMELIKE).max_norm() < 1e-10


def test_hv_connection_identifies_blocks() -> None:
    """Test that the h-v connection reuses the horizontal and vertical Christoffels across families."""
    metric = sasaki_lift(bogoslovsky(b=0.2))
    hv = hv_dconnection(metric, TIMELIKE)
    canonical = canonical_dconnection(metric, TIMELIKE)
    assert hv.kind == "hv"
    assert np.allclose(jetcalc.to_float(hv.L_h), jetcalc.to_float(canonical.L_h), atol=1e-12)
    assert np.allclose(jetcalc.to_float(hv.L_v), jetcalc.to_float(hv.L_h), atol=1e-14)
    assert np.allclose(jetcalc.to_float(hv.C_h), jetcalc.to_float(hv.C_v), atol=1e-14)


def test_tangent_bundle_connections_need_equal_dimensions(sphere: DMetric) -> None:
    """Test that index identification on ``n != m`` is a shape error."""
    with pytest.raises(ShapeError, match="needs m = n"):
        get_connection("hv")(sphere, [0.8, 0.1, 0.4])


def test_unknown_connection_kinds(curved: DMetric) -> None:
    """Test the registry errors."""
    with pytest.raises(InputError, match="Unknown d-connection"):
        get_connection("weyl")
    with pytest.raises(InputError, match="Unknown notable d-connection"):
        notable_dconnection("canonical", curved, CURVED_POINT)
    assert isinstance(get_connection(), CanonicalConnection)


QUARTIC = FinslerFunction(
    n=2,
    m=2,
    F2=compile_field("(1 + 0.1*x1^2)*(y1^2 + y2^2 + 0.01*y1^4/(y1^2 + y2^2))", COORDINATES),
    name="quartic",
)
CONFORMAL_BASE = field_rule([["exp(x1 + 0.5*x2)", 0.0], [0.0, "exp(x1 + 0.5*x2)"]], ["x1", "x2"])
LIFT_POINTS = jetcalc.halton_points([0.1, 0.1, 0.5, 0.5], [1.0, 1.0, 1.5, 1.5], 100, seed=3)
LIFTS: dict[str, DMetric] = {
    "flat": sasaki_lift(riemann_quadratic([[1.0, 0.0], [0.0, 1.0]], 2)),
    "conformal": sasaki_lift(riemann_quadratic(CONFORMAL_BASE, 2)),
    "quartic": sasaki_lift(QUARTIC),
}
SCHWARZSCHILD_POINT: list[float] = [0.2, 3.0, 1.1, 0.4]


def _close(left: np.ndarray, right: np.ndarray, atol: float = 1e-10) -> bool:
    return np.allclose(jetcalc.to_float(left), jetcalc.to_float(right), atol=atol)


def test_chern_connection_has_no_pure_torsion() -> None:
    """Test that the Chern connection has vanishing ``T^i_jk`` and ``T^a_bc`` on a quartic lift."""
    metric = LIFTS["quartic"]
    for point in LIFT_POINTS[:10]:
        torsion = dtorsion(notable_dconnection("chern", metric, point), metric.nconnection(), point)
        assert np.max(np.abs(jetcalc.to_float(torsion.T_i_jk))) < 1e-10
        assert np.max(np.abs(jetcalc.to_float(torsion.T_a_bc))) < 1e-10


@pytest.mark.parametrize("kind", ["berwald", "chern"])
def test_notable_connections_are_not_metric_compatible(kind: str) -> None:
    """Test that a fiber-dependent Hessian makes the Berwald and Chern connections nonmetric."""
    metric = LIFTS["quartic"]
    point = LIFT_POINTS[0]
    assert nonmetricity(notable_dconnection(kind, metric, point), metric, point).max_norm() > 1e-4


def test_cartan_connection_of_a_riemannian_function() -> None:
    """Test that the Cartan horizontal coefficients reduce to the base Christoffel symbols."""
    metric = LIFTS["conformal"]
    for point in LIFT_POINTS[:10]:
        coeffs = cartan_dconnection(metric, point)
        assert _close(coeffs.L_h, levi_civita(CONFORMAL_BASE, list(point[:2])))
        assert _close(coeffs.C_v, np.zeros((2, 2, 2)))


def test_hv_connection_equals_cartan_on_a_lift() -> None:
    """Test that with ``g = h`` the h-v and Cartan connections coincide family by family."""
    metric = LIFTS["quartic"]
    for point in LIFT_POINTS[:10]:
        hv = hv_dconnection(metric, point)
        cartan = cartan_dconnection(metric, point)
        for family in ("L_h", "L_v", "C_h", "C_v"):
            assert _close(getattr(hv, family), getattr(cartan, family)), family


def test_levi_civita_of_schwarzschild() -> None:
    """Test the nonzero Christoffel symbols of a unit-horizon Schwarzschild metric at ``r = 3``."""
    rule = field_rule(
        [
            ["-(1 - 1/r)", 0.0, 0.0, 0.0],
            [0.0, "1/(1 - 1/r)", 0.0, 0.0],
            [0.0, 0.0, "r^2", 0.0],
            [0.0, 0.0, 0.0, "r^2*sin(theta)^2"],
        ],
        ["t", "r", "theta", "phi"],
    )
    theta: float = SCHWARZSCHILD_POINT[2]
    gamma = jetcalc.to_float(levi_civita(rule, SCHWARZSCHILD_POINT))
    expected: dict[tuple[int, int, int], float] = {
        (0, 0, 1): 1.0 / 12.0,
        (1, 0, 0): 1.0 / 27.0,
        (1, 1, 1): -1.0 / 12.0,
        (1, 2, 2): -2.0,
        (1, 3, 3): -2.0 * np.sin(theta) ** 2,
        (2, 1, 2): 1.0 / 3.0,
        (2, 3, 3): -np.sin(theta) * np.cos(theta),
        (3, 1, 3): 1.0 / 3.0,
        (3, 2, 3): 1.0 / np.tan(theta),
    }
    table = np.zeros((4, 4, 4))
    for (mu, nu, lam), value in expected.items():
        table[mu, nu, lam] = table[mu, lam, nu] = value
    assert np.allclose(gamma, table, atol=1e-12)


@pytest.mark.parametrize("name", list(LIFTS))
@pytest.mark.parametrize("kind", ["canonical", "cartan"])
def test_compatible_connections_on_lifts(name: str, kind: str) -> None:
    """Test metric compatibility at 100 quasi-random points of each lift."""
    metric = LIFTS[name]
    connection = get_connection(kind)
    worst: float = max(nonmetricity(connection(metric, point), metric, point).max_norm() for point in LIFT_POINTS)
    assert worst < 1e-8


def _generated_metrics() -> dict[str, tuple[DMetric, np.ndarray]]:
    sol1 = generate_sol1(
        SolutionRecipe(
            psi=compile_field("0.1*sin(x1)*cos(x2)", ["x1", "x2", "v", "y"]),
            f=compile_field("exp(0.5*v)*(1 + 0.2*x1^2)", ["x1", "x2", "v", "y"]),
            w0=(0.1, 0.0),
            n1=(0.2, 0.0),
            source=Source(upsilon4=-0.3),
        ),
        nodes=17,
    )
    cosmo = generate_4d_cosmo(CosmoRecipe.identity(), nodes=17)
    return {
        "sol1": (sol1, jetcalc.halton_points([0.1] * 4, [0.9] * 4, 25, seed=5)),
        "cosmo": (cosmo, jetcalc.halton_points([1.0, 0.0, 0.8, 0.0], [2.0, 1.0, 1.2, 1.0], 25, seed=7)),
    }


def test_canonical_connection_on_generated_metrics() -> None:
    """Test metric compatibility of the canonical connection on generated solutions."""
    for name, (metric, points) in _generated_metrics().items():
        worst: float = max(nonmetricity(canonical_dconnection(metric, p), metric, p).max_norm() for p in points)
        assert worst < 1e-8, name


def test_distortion_relation_at_quasi_random_points(curved: DMetric) -> None:
    """Test canonical plus distortion against the adapted Levi-Civita connection at 50 points."""
    for point in jetcalc.halton_points([0.1] * 4, [1.0] * 4, 50, seed=11):
        canonical = canonical_dconnection(curved, point).full()
        distortion = distortion_tensor(curved, point).full()
        expected = jetcalc.to_float(adapted_levi_civita(curved, point))
        assert np.allclose(jetcalc.to_float(canonical + distortion), expected, atol=1e-8)
