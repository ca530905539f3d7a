"""Finsler generating functions and the geometry they induce on the total space."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from dataclasses import field
from typing import TYPE_CHECKING
from typing import Any

import numpy as np

from finsler_forge import jetcalc
from finsler_forge.exceptions import DegeneracyError
from finsler_forge.exceptions import EvaluationError
from finsler_forge.exceptions import InputError
from finsler_forge.exceptions import PreconditionError
from finsler_forge.exceptions import ShapeError
from finsler_forge.jetcalc import ScalarField
from finsler_forge.nholon import DMetric
from finsler_forge.nholon import MetricBlocks
from finsler_forge.nholon import ShellBlocks
from finsler_forge.nholon import settle

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Mapping
    from collections.abc import Sequence

    from finsler_forge.jetcalc import Number
    from finsler_forge.nholon import MatrixRule

logger: logging.Logger = logging.getLogger(__name__)

HOMOGENEITY_FACTORS: tuple[float, ...] = (0.5, 2.0, 3.0)


@dataclass(frozen=True)
class FinslerFunction:
    """A generating function given through ``F²(x, y)``, positively 2-homogeneous in ``y``."""

    n: int
    """Base dimension."""

    m: int
    """Fiber dimension."""

    F2: ScalarField
    """``F²`` over ``(x, y)``."""

    name: str = "F"

    samples: tuple[tuple[float, ...], ...] = field(default=(), repr=False)
    """Points where the Hessian is declared nondegenerate."""

    def __post_init__(self) -> None:
        if self.F2.dim != self.n + self.m:
            msg: str = f"{self.name}: F² has {self.F2.dim} coordinates, expected {self.n + self.m}"
            raise InputError(msg)

    @property
    def dim(self) -> int:
        """Total-space dimension."""
        return self.n + self.m

    def split(self, point: Sequence[Number]) -> tuple[list[Number], list[Number]]:
        """Split a total-space point into ``(x, y)``.

        Returns:
            Base and fiber coordinates.

        Raises:
            InputError: If the point has the wrong dimension.
        """
        if len(point) != self.dim:
            msg: str = f"{self.name} expects {self.dim} coordinates, got {len(point)}"
            raise InputError(msg)
        return list(point[: self.n]), list(point[self.n :])


@dataclass(frozen=True)
class DispersionParams:
    """Coefficients of a deformed quadratic element used in the dispersion relation."""

    c: float
    """Light speed."""

    g_hat: np.ndarray
    """Spatial metric ``g_îĵ``."""

    q: np.ndarray
    """Totally symmetric deformation coefficients with ``2r`` indices."""

    r: int
    """Deformation order."""

    def __post_init__(self) -> None:
        if self.r < 1:
            msg: str = f"Deformation order must be at least 1, got {self.r}"
            raise InputError(msg)
        q: np.ndarray = np.asarray(self.q, dtype=float)
        size: int = np.asarray(self.g_hat).shape[0]
        if q.shape != (size,) * (2 * self.r):
            msg = f"q must have shape {(size,) * (2 * self.r)}, got {q.shape}"
            raise InputError(msg)
        for axes in itertools.permutations(range(q.ndim)):
            if not np.allclose(q, np.transpose(q, axes), rtol=0.0, atol=1e-14):
                msg = "q must be totally symmetric"
                raise InputError(msg)


@dataclass(frozen=True)
class OsculatingSection:
    """A fiber-valued field ``y(x)`` on the base."""

    components: tuple[ScalarField, ...]

    @property
    def m(self) -> int:
        """Fiber dimension."""
        return len(self.components)

    def __call__(self, x: Sequence[Number]) -> list[Number]:
        return [component(x) for component in self.components]


def _fiber_hessian(F: FinslerFunction, x: list[Number], y: list[Number]) -> np.ndarray:
    raw: np.ndarray = jetcalc.hessian(lambda fiber: F.F2([*x, *fiber]), y)
    return jetcalc.elementwise(lambda v: jetcalc.mul(0.5, v), raw)


def hessian_metric(F: FinslerFunction, point: Sequence[Number]) -> np.ndarray:
    """Vertical metric ``g_ab = ½ ∂²F²/∂y^a∂y^b``.

    Args:
        F: The generating function.
        point: ``(x, y)``, float or dual.

    Returns:
        The symmetric ``m x m`` Hessian metric.

    Raises:
        PreconditionError: At ``y = 0``.
        DegeneracyError: If the Hessian is degenerate at the point.
    """
    x, y = F.split(point)
    if all(jetcalc.primal(v) == 0 for v in y):
        msg: str = f"{F.name}: the Hessian metric is undefined at y = 0"
        raise PreconditionError(msg)
    metric: np.ndarray = _fiber_hessian(F, x, y)
    if jetcalc.is_degenerate(metric):
        where: tuple[float, ...] = tuple(jetcalc.primal(p) for p in point)
        msg = f"{F.name}: degenerate Hessian at {where}"
        raise DegeneracyError(msg)
    return settle(metric)


def _semispray(F: FinslerFunction, point: Sequence[Number]) -> np.ndarray:
    n: int = F.n
    y: list[Number] = list(point[n:])
    full: np.ndarray = jetcalc.hessian(F.F2.fn, point)
    grad: list[Number] = jetcalc.gradient(F.F2.fn, point)
    ginv: np.ndarray = jetcalc.invert_symmetric(hessian_metric(F, point))
    bracket: np.ndarray = np.empty(n, dtype=object)
    for i in range(n):
        total: Number = jetcalc.neg(grad[i])
        for k in range(n):
            total = jetcalc.add(total, jetcalc.mul(full[n + i, k], y[k]))
        bracket[i] = total
    return jetcalc.elementwise(lambda v: jetcalc.mul(0.25, v), ginv @ bracket)


def semispray_and_nconnection(F: FinslerFunction, point: Sequence[Number]) -> tuple[np.ndarray, np.ndarray]:
    """Semispray ``G^a`` of ``L = F²`` and the Cartan N-connection ``N_i^a = ∂G^a/∂y^i``.

    ``G^a = ¼ g^{ai} (∂²L/∂y^i∂x^k y^k − ∂L/∂x^i)``.

    Returns:
        ``(G[a], N[i, a])``.

    Raises:
        ShapeError: If the fiber and base dimensions differ.
    """
    if F.n != F.m:
        msg: str = f"{F.name}: the semispray needs a tangent-bundle model (n = m), got n={F.n}, m={F.m}"
        raise ShapeError(msg)
    n: int = F.n
    spray, deriv = jetcalc.differentiate(lambda u: _semispray(F, u), point)
    coeffs: np.ndarray = np.empty((n, n), dtype=object)
    for i in range(n):
        for a in range(n):
            coeffs[i, a] = deriv[a, n + i]
    return settle(spray), settle(coeffs)


def sasaki_lift(F: FinslerFunction) -> DMetric:
    """Sasaki-type lift: ``g_ij = h_ab = ^F g`` (indices identified) with the Cartan N-connection.

    Returns:
        A one-shell d-metric over the total space.

    Raises:
        ShapeError: If the fiber and base dimensions differ.
    """
    if F.n != F.m:
        msg: str = f"{F.name}: the Sasaki lift needs n = m, got n={F.n}, m={F.m}"
        raise ShapeError(msg)

    def evaluate(point: Sequence[Number]) -> MetricBlocks:
        metric: np.ndarray = np.asarray(hessian_metric(F, point), dtype=object)
        _, coeffs = semispray_and_nconnection(F, point)
        return MetricBlocks(g=metric, shells=(ShellBlocks(h=metric.copy(), N=np.asarray(coeffs, dtype=object)),))

    return DMetric(n=F.n, shell_dims=(F.m,), evaluate=evaluate, name=f"sasaki[{F.name}]")


def osculate(F: FinslerFunction, section: OsculatingSection, x: Sequence[Number]) -> np.ndarray:
    """Osculating metric ``f_ij(x) = ^F g_ij(x, y(x))``.

    Returns:
        The symmetric matrix.

    Raises:
        InputError: If the section does not match the fiber dimension.
        PreconditionError: If the section vanishes at ``x``.
    """
    if section.m != F.m:
        msg: str = f"Section has {section.m} components, {F.name} has fiber dimension {F.m}"
        raise InputError(msg)
    y: list[Number] = section(x)
    if all(jetcalc.primal(v) == 0 for v in y):
        msg = f"Section vanishes at x = {tuple(jetcalc.primal(v) for v in x)}"
        raise PreconditionError(msg)
    return hessian_metric(F, [*x, *y])


def dispersion_omega2(p: DispersionParams, k: Sequence[float], *, linear_bracket: bool = False) -> float:
    """Squared frequency of a wave covector for a deformed quadratic element.

    ``ω² = c² Q² (1 − q·k^{2r} / (r Q^{2r}))`` with ``Q = g_îĵ k^î k^ĵ``; ``linear_bracket`` uses ``c² Q``.

    Returns:
        ``ω²``.

    Raises:
        PreconditionError: If the quadratic form vanishes.
    """
    wave: np.ndarray = np.asarray(k, dtype=float)
    quadratic: float = float(wave @ np.asarray(p.g_hat, dtype=float) @ wave)
    if quadratic == 0:
        msg: str = f"g(k, k) vanishes for k = {tuple(wave)}"
        raise PreconditionError(msg)
    contracted: np.ndarray | float = np.asarray(p.q, dtype=float)
    for _ in range(2 * p.r):
        contracted = contracted @ wave
    correction: float = 1.0 - float(contracted) / (p.r * quadratic ** (2 * p.r))
    prefactor: float = quadratic if linear_bracket else quadratic**2
    return p.c**2 * prefactor * correction


# Built-in generating functions


def _quadratic(matrix: np.ndarray, y: Sequence[Number]) -> Number:
    total: Number = 0.0
    for a, b in itertools.product(range(len(y)), repeat=2):
        coefficient: Number = matrix[a, b]
        if not jetcalc.is_zero(coefficient):
            total = jetcalc.add(total, jetcalc.mul(coefficient, jetcalc.mul(y[a], y[b])))
    return total


def _bogoslovsky_form(form: Number, along: Number, b: Number, name: str) -> Number:
    if jetcalc.primal(form) == 0:
        msg: str = f"{name}: the base quadratic form vanishes"
        raise EvaluationError(msg)
    base: Number = jetcalc.mul(jetcalc.sign(form), jetcalc.power(jetcalc.dabs(form), jetcalc.add(1.0, jetcalc.neg(b))))
    if jetcalc.primal(b) == 0:
        return base
    if jetcalc.primal(along) == 0:
        msg = f"{name}: the null direction is orthogonal to y"
        raise EvaluationError(msg)
    return jetcalc.mul(base, jetcalc.power(jetcalc.dabs(along), jetcalc.mul(2.0, b)))


def _minkowski(n: int) -> np.ndarray:
    eta: np.ndarray = np.eye(n)
    eta[0, 0] = -1.0
    return eta


def _as_rule(value: object, n: int) -> MatrixRule:
    if callable(value):
        return value  # type: ignore[return-value]
    constant: np.ndarray = np.asarray(value, dtype=float)
    if constant.shape != (n, n):
        msg: str = f"Expected an {n}x{n} base metric, got shape {constant.shape}"
        raise InputError(msg)
    return lambda _x: constant


def _as_scalar(value: object) -> Callable[[Sequence[Number]], Number]:
    if isinstance(value, ScalarField):
        return value.fn
    constant: float = float(value)  # type: ignore[arg-type]
    return lambda _x: constant


def minkowski_quadratic(n: int = 4) -> FinslerFunction:
    """Quadratic element of signature ``diag(−, +, …, +)``.

    Returns:
        The generating function.
    """
    eta: np.ndarray = _minkowski(n)
    return FinslerFunction(
        n=n,
        m=n,
        F2=ScalarField(dim=2 * n, fn=lambda u: _quadratic(eta, u[n:]), name="minkowski"),
        name="minkowski_quadratic",
    )


def riemann_quadratic(g: MatrixRule | Sequence[Sequence[float]], n: int) -> FinslerFunction:
    """``F² = g_ij(x) y^i y^j``.

    Args:
        g: Base metric rule over ``x`` or a constant matrix.
        n: Base dimension.

    Returns:
        The generating function.
    """
    rule: MatrixRule = _as_rule(g, n)

    def f2(u: Sequence[Number]) -> Number:
        return _quadratic(np.asarray(rule(list(u[:n])), dtype=object), u[n:])

    return FinslerFunction(n=n, m=n, F2=ScalarField(dim=2 * n, fn=f2, name="riemann"), name="riemann_quadratic")


def bogoslovsky(b: float, direction: Sequence[float] = (1.0, 0.0, 0.0, 1.0)) -> FinslerFunction:
    """Bogoslovsky element ``F² = sgn(ηyy)|ηyy|^{1−b}|n·y|^{2b}`` with ``η = diag(+, −, −, −)``.

    The null direction ``n^k`` is lowered with ``η``.

    Returns:
        The generating function.
    """
    n: int = len(direction)
    eta: np.ndarray = -_minkowski(n)
    lowered: np.ndarray = eta @ np.asarray(direction, dtype=float)

    def f2(u: Sequence[Number]) -> Number:
        y: Sequence[Number] = u[n:]
        return _bogoslovsky_form(_quadratic(eta, y), _dot(lowered, y), b, "bogoslovsky")

    return FinslerFunction(n=n, m=n, F2=ScalarField(dim=2 * n, fn=f2, name="bogoslovsky"), name=f"bogoslovsky(b={b})")


def _dot(covector: Sequence[Number], y: Sequence[Number]) -> Number:
    total: Number = 0.0
    for c, v in zip(covector, y, strict=True):
        total = jetcalc.add(total, jetcalc.mul(c, v))
    return total


def bogoslovsky_general(
    b: ScalarField | float,
    g: MatrixRule | Sequence[Sequence[float]],
    direction: Sequence[float],
) -> FinslerFunction:
    """Bogoslovsky element over a curved base: ``b(x)``, ``g_ij(x)``, direction lowered with ``g(x)``.

    Returns:
        The generating function.
    """
    n: int = len(direction)
    rule: MatrixRule = _as_rule(g, n)
    exponent: Callable[[Sequence[Number]], Number] = _as_scalar(b)
    upper: np.ndarray = np.asarray(direction, dtype=float)

    def f2(u: Sequence[Number]) -> Number:
        x: list[Number] = list(u[:n])
        metric: np.ndarray = np.asarray(rule(x), dtype=object)
        lowered: np.ndarray = metric @ upper
        return _bogoslovsky_form(_quadratic(metric, u[n:]), _dot(lowered, u[n:]), exponent(x), "bogoslovsky_general")

    return FinslerFunction(
        n=n,
        m=n,
        F2=ScalarField(dim=2 * n, fn=f2, name="bogoslovsky_general"),
        name="bogoslovsky_general",
    )


def deformed(
    r: int,
    q: np.ndarray | Sequence[Any] | float = 0.0,
    g_hat: np.ndarray | Sequence[Sequence[float]] | None = None,
    *,
    spatial_dim: int = 3,
    timelike: bool = True,
) -> FinslerFunction:
    """Deformed quadratic element ``F² = −(y⁰)² + G[1 + (1/r) q·ŷ^{2r} / G^r]`` with ``G = g_îĵ ŷ^î ŷ^ĵ``.

    Args:
        r: Deformation order.
        q: Totally symmetric coefficients over the spatial fiber indices; a scalar zero means undeformed.
        g_hat: Spatial metric, identity by default.
        spatial_dim: Spatial fiber dimension when ``q`` is a scalar.
        timelike: Without it the element has no ``y⁰`` and the fiber is purely spatial.

    Returns:
        The generating function.
    """
    coefficients: np.ndarray = np.asarray(q, dtype=float)
    if coefficients.ndim == 0:
        coefficients = np.full((spatial_dim,) * (2 * r), float(coefficients))
    spatial: int = coefficients.shape[0]
    metric: np.ndarray = np.eye(spatial) if g_hat is None else np.asarray(g_hat, dtype=float)
    DispersionParams(c=1.0, g_hat=metric, q=coefficients, r=r)
    offset: int = 1 if timelike else 0
    n: int = spatial + offset
    nonzero: list[tuple[tuple[int, ...], float]] = [
        (index, float(value)) for index, value in np.ndenumerate(coefficients) if value != 0
    ]

    def f2(u: Sequence[Number]) -> Number:
        y: Sequence[Number] = u[n + offset :]
        quadratic: Number = _quadratic(metric, y)
        if not nonzero:
            body: Number = quadratic
        else:
            deformation: Number = 0.0
            for index, value in nonzero:
                term: Number = value
                for axis in index:
                    term = jetcalc.mul(term, y[axis])
                deformation = jetcalc.add(deformation, term)
            ratio: Number = jetcalc.mul(deformation, jetcalc.reciprocal(jetcalc.power(quadratic, float(r))))
            body = jetcalc.mul(quadratic, jetcalc.add(1.0, jetcalc.mul(1.0 / r, ratio)))
        if timelike:
            return jetcalc.add(body, jetcalc.neg(jetcalc.mul(u[n], u[n])))
        return body

    return FinslerFunction(n=n, m=n, F2=ScalarField(dim=2 * n, fn=f2, name="deformed"), name=f"deformed(r={r})")


_GENERATORS: dict[str, Callable[..., FinslerFunction]] = {
    "minkowski_quadratic": minkowski_quadratic,
    "riemann_quadratic": riemann_quadratic,
    "bogoslovsky": bogoslovsky,
    "bogoslovsky_general": bogoslovsky_general,
    "deformed": deformed,
}


def builtin_generator(kind: str, params: Mapping[str, Any] | None = None) -> FinslerFunction:
    """Look up a generating function from the catalog by name.

    Args:
        kind: One of ``minkowski_quadratic``, ``riemann_quadratic``, ``bogoslovsky``,
            ``bogoslovsky_general``, ``deformed``.
        params: Keyword arguments of the matching constructor.

    Returns:
        The generating function.

    Raises:
        InputError: For an unknown kind or parameters the constructor does not accept.
    """
    try:
        constructor: Callable[..., FinslerFunction] = _GENERATORS[kind]
    except KeyError as e:
        msg: str = f"Unknown generating function {kind!r}; known: {', '.join(sorted(_GENERATORS))}"
        raise InputError(msg) from e
    try:
        generator: FinslerFunction = constructor(**dict(params or {}))
    except TypeError as e:
        msg = f"Bad parameters for {kind}: {e}"
        raise InputError(msg) from e
    logger.debug("Built generating function %s", generator.name)
    return generator


def check_homogeneity(
    F: FinslerFunction,
    samples: Sequence[Sequence[float]],
    factors: Sequence[float] = HOMOGENEITY_FACTORS,
) -> float:
    """Largest relative defect of ``F²(x, βy) = β² F²(x, y)`` over samples and factors.

    Returns:
        ``max |F²(x, βy) − β²F²(x, y)| / (β²|F²(x, y)|)``.
    """
    worst: float = 0.0
    for point in samples:
        x, y = F.split(point)
        reference: float = jetcalc.primal(F.F2([*x, *y]))
        for beta in factors:
            scaled: float = jetcalc.primal(F.F2([*x, *(beta * float(v) for v in y)]))
            denominator: float = beta**2 * abs(reference) or 1.0
            worst = max(worst, abs(scaled - beta**2 * reference) / denominator)
    return worst


def euler_defect(F: FinslerFunction, point: Sequence[float]) -> float:
    """Relative defect of ``y^a y^b g_ab = F²``.

    Returns:
        The relative deviation.
    """
    _, y = F.split(point)
    metric: np.ndarray = jetcalc.to_float(hessian_metric(F, point))
    fiber: np.ndarray = np.asarray(y, dtype=float)
    value: float = jetcalc.primal(F.F2(point))
    return abs(float(fiber @ metric @ fiber) - value) / (abs(value) or 1.0)


def check_nondegenerate(F: FinslerFunction, points: Sequence[Sequence[float]] | None = None) -> int:
    """Evaluate the Hessian metric at the declared (or given) sample points.

    Returns:
        The number of points checked.
    """
    checked: Sequence[Sequence[float]] = points if points is not None else F.samples
    for point in checked:
        hessian_metric(F, point)
    return len(checked)
