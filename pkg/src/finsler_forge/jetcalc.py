"""Forward-mode derivatives, symmetric inversion and quadrature.

Every geometric routine in finsler-forge is written against ``Number`` (a float or a ``Dual``), so a
quantity evaluated at a seeded point carries its own derivatives. Seeds are tagged; a newer tag is always
the outer layer of a nested dual, which keeps mixed partials exact at any order.
"""

import itertools
import logging
import math
import numbers
from dataclasses import dataclass
from functools import cache
from typing import TYPE_CHECKING

import numpy as np
from numpy.polynomial import chebyshev
from scipy import integrate
from scipy import linalg
from scipy.stats import qmc

from finsler_forge.exceptions import EvaluationError
from finsler_forge.exceptions import InputError
from finsler_forge.exceptions import QuadratureError
from finsler_forge.exceptions import SingularMatrixError

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Sequence

logger: logging.Logger = logging.getLogger(__name__)

SPECTRAL_NODES: int = 33
DEGENERACY_THRESHOLD: float = 1e-12

_tags: itertools.count[int] = itertools.count(1)


class Dual:
    """A first-order perturbation ``re + sum_k eps[k] * d_k`` in the directions of one seed tag.

    ``re`` and the entries of ``eps`` are numbers of strictly lower tag (or floats).
    """

    __slots__ = ("eps", "re", "tag")

    def __init__(self, tag: int, re: Number, eps: tuple[Number, ...]) -> None:
        self.tag: int = tag
        self.re: Number = re
        self.eps: tuple[Number, ...] = eps

    def __repr__(self) -> str:
        return f"Dual(tag={self.tag}, re={self.re!r}, eps={self.eps!r})"

    def chain(self, value: Number, slope: Number) -> Dual:
        """Apply a unary function whose value and derivative at ``self.re`` are known.

        Returns:
            The composed dual number.
        """
        return Dual(self.tag, value, tuple(mul(slope, e) for e in self.eps))

    def __add__(self, other: object) -> Number:
        if not _is_number(other):
            return NotImplemented
        return add(self, other)

    def __radd__(self, other: object) -> Number:
        if not _is_number(other):
            return NotImplemented
        return add(other, self)

    def __sub__(self, other: object) -> Number:
        if not _is_number(other):
            return NotImplemented
        return add(self, neg(other))

    def __rsub__(self, other: object) -> Number:
        if not _is_number(other):
            return NotImplemented
        return add(other, neg(self))

    def __mul__(self, other: object) -> Number:
        if not _is_number(other):
            return NotImplemented
        return mul(self, other)

    def __rmul__(self, other: object) -> Number:
        if not _is_number(other):
            return NotImplemented
        return mul(other, self)

    def __truediv__(self, other: object) -> Number:
        if not _is_number(other):
            return NotImplemented
        return mul(self, reciprocal(other))

    def __rtruediv__(self, other: object) -> Number:
        if not _is_number(other):
            return NotImplemented
        return mul(other, reciprocal(self))

    def __pow__(self, other: object) -> Number:
        if not _is_number(other):
            return NotImplemented
        return power(self, other)

    def __rpow__(self, other: object) -> Number:
        if not _is_number(other):
            return NotImplemented
        return power(other, self)

    def __neg__(self) -> Number:
        return neg(self)

    def __pos__(self) -> Dual:
        return self

    def __abs__(self) -> Number:
        return dabs(self)

    def __float__(self) -> float:
        return primal(self)

    def __lt__(self, other: object) -> bool:
        return primal(self) < primal(other)  # type: ignore[arg-type]

    def __le__(self, other: object) -> bool:
        return primal(self) <= primal(other)  # type: ignore[arg-type]

    def __gt__(self, other: object) -> bool:
        return primal(self) > primal(other)  # type: ignore[arg-type]

    def __ge__(self, other: object) -> bool:
        return primal(self) >= primal(other)  # type: ignore[arg-type]


type Number = float | Dual


def _is_number(x: object) -> bool:
    return isinstance(x, Dual | numbers.Real)


def _top(x: object) -> int:
    return x.tag if isinstance(x, Dual) else 0


def is_zero(x: object) -> bool:
    """Return True for a plain zero (duals never count as zero)."""
    return not isinstance(x, Dual) and x == 0


def primal(x: object) -> float:
    """Strip every perturbation layer.

    Returns:
        The underlying float.
    """
    while isinstance(x, Dual):
        x = x.re
    return float(x)  # type: ignore[arg-type]


def add(a: Number, b: Number) -> Number:
    """Add two numbers of any nesting.

    Returns:
        The sum.
    """
    ta: int = _top(a)
    tb: int = _top(b)
    if ta > tb:
        return Dual(ta, add(a.re, b), a.eps)  # type: ignore[union-attr]
    if tb > ta:
        return Dual(tb, add(a, b.re), b.eps)  # type: ignore[union-attr]
    if ta:
        eps: tuple[Number, ...] = tuple(
            add(x, y) for x, y in zip(a.eps, b.eps, strict=True)  # type: ignore[union-attr]
        )
        return Dual(ta, add(a.re, b.re), eps)  # type: ignore[union-attr]
    return a + b


def mul(a: Number, b: Number) -> Number:
    """Multiply two numbers of any nesting.

    Returns:
        The product.
    """
    if is_zero(a) or is_zero(b):
        return 0.0
    ta: int = _top(a)
    tb: int = _top(b)
    if ta > tb:
        return Dual(ta, mul(a.re, b), tuple(mul(e, b) for e in a.eps))  # type: ignore[union-attr]
    if tb > ta:
        return Dual(tb, mul(a, b.re), tuple(mul(a, e) for e in b.eps))  # type: ignore[union-attr]
    if ta:
        eps: tuple[Number, ...] = tuple(
            add(mul(a.re, eb), mul(ea, b.re))  # type: ignore[union-attr]
            for ea, eb in zip(a.eps, b.eps, strict=True)  # type: ignore[union-attr]
        )
        return Dual(ta, mul(a.re, b.re), eps)  # type: ignore[union-attr]
    return a * b


def neg(a: Number) -> Number:
    """Negate a number.

    Returns:
        ``-a``.
    """
    if isinstance(a, Dual):
        return Dual(a.tag, neg(a.re), tuple(neg(e) for e in a.eps))
    return -a


def reciprocal(a: Number) -> Number:
    """Return ``1 / a``.

    Raises:
        EvaluationError: If ``a`` is zero.
    """
    if isinstance(a, Dual):
        inv: Number = reciprocal(a.re)
        return a.chain(inv, neg(mul(inv, inv)))
    if a == 0:
        msg: str = "Division by zero"
        raise EvaluationError(msg)
    return 1.0 / a


def power(a: Number, b: Number) -> Number:
    """Raise ``a`` to the power ``b``.

    Constant exponents differentiate through ``b * a**(b-1)``; integer exponents accept negative bases.

    Returns:
        ``a ** b``.

    Raises:
        EvaluationError: For a negative base with a non-integer exponent or a zero base with a negative one.
    """
    if isinstance(b, Dual):
        return exp(mul(b, log(a)))
    exponent: float = float(b)
    if exponent == 0:
        return 1.0
    base: float = primal(a)
    integral: bool = exponent.is_integer()
    if base < 0 and not integral:
        msg: str = f"Negative base {base} with non-integer exponent {exponent}"
        raise EvaluationError(msg)
    if base == 0 and exponent < 1 and (exponent < 0 or isinstance(a, Dual)):
        msg = f"Zero base with exponent {exponent}"
        raise EvaluationError(msg)
    if isinstance(a, Dual):
        return a.chain(power(a.re, exponent), mul(exponent, power(a.re, exponent - 1)))
    if integral:
        return float(a ** int(exponent))
    return a**exponent


def sin(x: Number) -> Number:
    """Sine."""
    if isinstance(x, Dual):
        return x.chain(sin(x.re), cos(x.re))
    return math.sin(x)


def cos(x: Number) -> Number:
    """Cosine."""
    if isinstance(x, Dual):
        return x.chain(cos(x.re), neg(sin(x.re)))
    return math.cos(x)


def tan(x: Number) -> Number:
    """Tangent."""
    if isinstance(x, Dual):
        c: Number = cos(x.re)
        return x.chain(tan(x.re), reciprocal(mul(c, c)))
    return math.tan(x)


def exp(x: Number) -> Number:
    """Exponential."""
    if isinstance(x, Dual):
        e: Number = exp(x.re)
        return x.chain(e, e)
    return math.exp(x)


def log(x: Number) -> Number:
    """Natural logarithm.

    Raises:
        EvaluationError: For a non-positive argument.
    """
    if isinstance(x, Dual):
        return x.chain(log(x.re), reciprocal(x.re))
    if x <= 0:
        msg: str = f"log of non-positive value {x}"
        raise EvaluationError(msg)
    return math.log(x)


def sqrt(x: Number) -> Number:
    """Square root.

    Raises:
        EvaluationError: For a negative argument, or zero when derivatives are requested.
    """
    if isinstance(x, Dual):
        root: Number = sqrt(x.re)
        return x.chain(root, reciprocal(mul(2.0, root)))
    if x < 0:
        msg: str = f"sqrt of negative value {x}"
        raise EvaluationError(msg)
    return math.sqrt(x)


def sinh(x: Number) -> Number:
    """Hyperbolic sine."""
    if isinstance(x, Dual):
        return x.chain(sinh(x.re), cosh(x.re))
    return math.sinh(x)


def cosh(x: Number) -> Number:
    """Hyperbolic cosine."""
    if isinstance(x, Dual):
        return x.chain(cosh(x.re), sinh(x.re))
    return math.cosh(x)


def tanh(x: Number) -> Number:
    """Hyperbolic tangent."""
    if isinstance(x, Dual):
        t: Number = tanh(x.re)
        return x.chain(t, add(1.0, neg(mul(t, t))))
    return math.tanh(x)


def sech(x: Number) -> Number:
    """Hyperbolic secant."""
    if isinstance(x, Dual):
        s: Number = sech(x.re)
        return x.chain(s, neg(mul(s, tanh(x.re))))
    return 1.0 / math.cosh(x)


def dabs(x: Number) -> Number:
    """Absolute value; the derivative uses the sign of the primal value."""
    if isinstance(x, Dual):
        return x if primal(x) >= 0 else neg(x)
    return abs(x)


def sign(x: Number) -> float:
    """Sign of the primal value (0 maps to +1)."""
    return -1.0 if primal(x) < 0 else 1.0


# Seeding and extraction


def seed(point: Sequence[Number]) -> tuple[int, list[Dual]]:
    """Attach a fresh tag to every coordinate of ``point``.

    Args:
        point: Coordinates, possibly already dual.

    Returns:
        The new tag and the seeded coordinates.
    """
    tag: int = next(_tags)
    size: int = len(point)
    duals: list[Dual] = [
        Dual(tag, p, tuple(1.0 if k == i else 0.0 for k in range(size))) for i, p in enumerate(point)
    ]
    return tag, duals


def tangent(x: Number, tag: int, k: int) -> Number:
    """Directional derivative of ``x`` along seed direction ``k`` of ``tag``.

    Returns:
        The derivative, carrying every other tag.
    """
    if isinstance(x, Dual):
        if x.tag == tag:
            return x.eps[k]
        if x.tag > tag:
            return Dual(x.tag, tangent(x.re, tag, k), tuple(tangent(e, tag, k) for e in x.eps))
    return 0.0


def strip(x: Number, tag: int) -> Number:
    """Drop the perturbation of ``tag`` and keep every other layer.

    Returns:
        ``x`` with the ``tag`` directions set to zero.
    """
    if isinstance(x, Dual):
        if x.tag == tag:
            return x.re
        if x.tag > tag:
            return Dual(x.tag, strip(x.re, tag), tuple(strip(e, tag) for e in x.eps))
    return x


def elementwise(fn: Callable[[Number], Number], values: object) -> np.ndarray:
    """Apply ``fn`` to every entry of an array-like of numbers.

    Returns:
        An object array of the same shape.
    """
    array: np.ndarray = np.asarray(values, dtype=object)
    out: np.ndarray = np.empty(array.shape, dtype=object)
    for index in np.ndindex(array.shape):
        out[index] = fn(array[index])
    return out


def to_float(values: object) -> np.ndarray:
    """Primal values of an array-like of numbers.

    Returns:
        A float array of the same shape.
    """
    array: np.ndarray = np.asarray(values, dtype=object)
    out: np.ndarray = np.empty(array.shape, dtype=float)
    for index in np.ndindex(array.shape):
        out[index] = primal(array[index])
    return out


def differentiate(fn: Callable[[list[Number]], object], point: Sequence[Number]) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``fn`` and its first derivatives at ``point``.

    ``fn`` may return a number or any array-like of numbers; ``point`` may itself be dual.

    Args:
        fn: Function of the coordinate list.
        point: Where to evaluate.

    Returns:
        The value (object array) and the derivatives with the direction as trailing axis.
    """
    tag, duals = seed(point)
    out: np.ndarray = np.asarray(fn(duals), dtype=object)
    value: np.ndarray = elementwise(lambda v: strip(v, tag), out)
    derivs: np.ndarray = np.empty((*out.shape, len(point)), dtype=object)
    for k in range(len(point)):
        derivs[..., k] = elementwise(lambda v, k=k: tangent(v, tag, k), out)
    return value, derivs


def gradient(fn: Callable[[list[Number]], Number], point: Sequence[Number]) -> list[Number]:
    """Gradient of a scalar function, valid at dual points.

    Returns:
        One entry per coordinate.
    """
    tag, duals = seed(point)
    result: Number = fn(duals)
    return [tangent(result, tag, k) for k in range(len(point))]


def hessian(fn: Callable[[list[Number]], Number], point: Sequence[Number]) -> np.ndarray:
    """Hessian of a scalar function, valid at dual points.

    Returns:
        A symmetric object array.
    """
    size: int = len(point)
    tag, duals = seed(point)
    grads: list[Number] = gradient(fn, duals)
    out: np.ndarray = np.empty((size, size), dtype=object)
    for j in range(size):
        for k in range(size):
            out[j, k] = tangent(grads[k], tag, j)
    return out


def partial(fn: Callable[[list[Number]], Number], point: Sequence[Number], axes: Sequence[int]) -> Number:
    """Mixed partial derivative of any order along coordinate axes.

    Args:
        fn: Scalar function of the coordinate list.
        point: Where to differentiate.
        axes: One axis index per differentiation.

    Returns:
        The derivative.
    """
    if not axes:
        return fn(list(point))
    axis: int = axes[0]
    rest: Sequence[int] = axes[1:]
    tag, duals = seed([point[axis]])
    shifted: list[Number] = list(point)
    shifted[axis] = duals[0]
    return tangent(partial(fn, shifted, rest), tag, 0)


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a scalar field at one point."""

    value: float
    """Field value."""

    grad: tuple[float, ...]
    """Exact gradient, one entry per coordinate."""

    hess: tuple[tuple[float, ...], ...]
    """Exact Hessian, symmetric."""


@dataclass(frozen=True)
class ScalarField:
    """A scalar function of ``dim`` coordinates written against ``Number``."""

    dim: int
    """Number of coordinates."""

    fn: Callable[[Sequence[Number]], Number]
    """The pure evaluation rule."""

    name: str = "field"
    """Label used in messages."""

    def __call__(self, point: Sequence[Number]) -> Number:
        return self.fn(point)

    def eval(self, point: Sequence[float]) -> Jet2:
        """Evaluate value, gradient and Hessian at a float point.

        Returns:
            The second-order jet.
        """
        return eval_jet2(self, point)


def constant_field(dim: int, value: float, name: str = "constant") -> ScalarField:
    """A field that ignores its coordinates.

    Returns:
        The constant field.
    """
    return ScalarField(dim=dim, fn=lambda _point: value, name=name)


def eval_jet2(field: ScalarField, point: Sequence[float]) -> Jet2:
    """Evaluate ``field`` with exact first and second derivatives.

    Args:
        field: The field to evaluate.
        point: Float coordinates, one per field dimension.

    Returns:
        The second-order jet.

    Raises:
        InputError: If the point has the wrong dimension.
        EvaluationError: If any component is not finite.
    """
    if len(point) != field.dim:
        msg: str = f"{field.name} expects {field.dim} coordinates, got {len(point)}"
        raise InputError(msg)

    inner, first = seed([float(p) for p in point])
    outer, second = seed(first)
    result: Number = field(second)

    size: int = field.dim
    value: float = primal(result)
    grad: list[float] = [primal(tangent(result, outer, k)) for k in range(size)]
    raw: list[list[float]] = [
        [primal(tangent(tangent(result, outer, k), inner, j)) for k in range(size)] for j in range(size)
    ]
    hess: tuple[tuple[float, ...], ...] = tuple(
        tuple(0.5 * (raw[j][k] + raw[k][j]) for k in range(size)) for j in range(size)
    )

    if not all(math.isfinite(v) for v in (value, *grad, *itertools.chain.from_iterable(hess))):
        msg = f"{field.name} is not finite at {tuple(point)}"
        raise EvaluationError(msg)
    return Jet2(value=value, grad=tuple(grad), hess=hess)


@dataclass(frozen=True)
class TaylorField:
    """Lift a float function with a partial-derivative oracle to dual inputs.

    ``partial(orders, point)`` must return the mixed partial of the given per-axis orders.
    """

    dim: int
    partial: Callable[[tuple[int, ...], tuple[float, ...]], float]
    name: str = "taylor"

    def __call__(self, point: Sequence[Number]) -> Number:
        return self._lift(list(point), (0,) * self.dim)

    def as_field(self) -> ScalarField:
        """Wrap this lift as a ScalarField.

        Returns:
            The field.
        """
        return ScalarField(dim=self.dim, fn=self, name=self.name)

    def _lift(self, point: list[Number], orders: tuple[int, ...]) -> Number:
        tag: int = max(_top(p) for p in point)
        if tag == 0:
            return float(self.partial(orders, tuple(float(p) for p in point)))

        base: list[Number] = [strip(p, tag) for p in point]
        width: int = next(len(p.eps) for p in point if isinstance(p, Dual) and p.tag == tag)
        eps: list[Number] = []
        for k in range(width):
            total: Number = 0.0
            for axis, p in enumerate(point):
                step: Number = tangent(p, tag, k)
                if is_zero(step):
                    continue
                bumped: tuple[int, ...] = tuple(o + 1 if i == axis else o for i, o in enumerate(orders))
                total = add(total, mul(self._lift(base, bumped), step))
            eps.append(total)
        return Dual(tag, self._lift(base, orders), tuple(eps))


# Linear algebra


def invert_symmetric(m: object) -> np.ndarray:
    """Invert a symmetric (possibly indefinite, possibly dual) matrix.

    The float path uses a pivoted LDLᵀ factorization; dual entries are differentiated through
    ``d(A⁻¹) = -A⁻¹ dA A⁻¹`` one tag at a time.

    Args:
        m: Square symmetric matrix of numbers.

    Returns:
        The inverse, float if the input was float, object otherwise.

    Raises:
        InputError: If the matrix is not square or not symmetric.
        SingularMatrixError: If the determinant falls below the degeneracy threshold.
    """
    array: np.ndarray = np.asarray(m, dtype=object)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:  # noqa: PLR2004
        msg: str = f"Expected a square matrix, got shape {array.shape}"
        raise InputError(msg)

    tag: int = max((_top(v) for v in array.flat), default=0)
    if tag:
        return _invert_dual(array, tag)

    values: np.ndarray = array.astype(float)
    scale: float = float(np.max(np.abs(values))) if values.size else 0.0
    if not np.allclose(values, values.T, rtol=0.0, atol=1e-12 * max(scale, 1.0)):
        msg = "Matrix is not symmetric"
        raise InputError(msg)

    size: int = values.shape[0]
    lu, d, perm = linalg.ldl(values)
    det: float = float(np.linalg.det(d))
    if scale == 0 or abs(det) <= DEGENERACY_THRESHOLD * scale**size:
        msg = f"Matrix is degenerate (det={det:.3e}, scale={scale:.3e})"
        raise SingularMatrixError(msg)

    lower: np.ndarray = lu[perm]
    x: np.ndarray = linalg.solve_triangular(lower, np.eye(size)[perm], lower=True, unit_diagonal=True)
    inverse: np.ndarray = x.T @ np.linalg.solve(d, x)
    return 0.5 * (inverse + inverse.T)


def _invert_dual(array: np.ndarray, tag: int) -> np.ndarray:
    base: np.ndarray = elementwise(lambda v: strip(v, tag), array)
    inverse: np.ndarray = invert_symmetric(base)
    width: int = next(len(v.eps) for v in array.flat if isinstance(v, Dual) and v.tag == tag)
    slopes: list[np.ndarray] = []
    for k in range(width):
        direction: np.ndarray = elementwise(lambda v, k=k: tangent(v, tag, k), array)
        slopes.append(-(inverse @ direction @ inverse))
    size: int = array.shape[0]
    out: np.ndarray = np.empty((size, size), dtype=object)
    for i in range(size):
        for j in range(size):
            out[i, j] = Dual(tag, inverse[i, j], tuple(s[i, j] for s in slopes))
    return out


def determinant_scale(m: np.ndarray) -> tuple[float, float]:
    """Determinant and entry scale of the primal part of a square matrix.

    Returns:
        ``(det, max|entry|)``.
    """
    values: np.ndarray = to_float(m)
    return float(np.linalg.det(values)), float(np.max(np.abs(values))) if values.size else 0.0


def is_degenerate(m: np.ndarray) -> bool:
    """Check the degeneracy threshold ``|det| < 1e-12 * max|entry|^dim`` on the primal part.

    Returns:
        True if the matrix counts as degenerate.
    """
    det, scale = determinant_scale(m)
    return scale == 0 or abs(det) < DEGENERACY_THRESHOLD * scale ** np.asarray(m).shape[0]


# Quadrature


def quad_1d(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> float:
    """Adaptive quadrature of a float function.

    Public utility for plain float integrands; the jet-aware integrals use the spectral rule instead, and this
    adaptive scipy routine is the independent cross-check for them.

    Args:
        f: Integrand.
        a: Lower limit.
        b: Upper limit.
        tol: Absolute error target.

    Returns:
        The integral.

    Raises:
        QuadratureError: If the error estimate stays above ``tol``.
    """
    result: tuple = integrate.quad(f, a, b, epsabs=tol, epsrel=0.0, limit=200, full_output=1)
    value: float = float(result[0])
    error: float = float(result[1])
    if len(result) > 3 or error > tol:  # noqa: PLR2004
        message: str = str(result[3]) if len(result) > 3 else "error estimate above tolerance"  # noqa: PLR2004
        msg: str = f"Quadrature on [{a}, {b}] did not converge: {message.strip()}"
        raise QuadratureError(msg, best_estimate=value, error_estimate=error)
    return value


@cache
def spectral_rule(size: int = SPECTRAL_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Clenshaw-Curtis nodes on [0, 1] and the cumulative integration matrix.

    ``matrix[k] @ g(nodes)`` approximates the integral of ``g`` from 0 to ``nodes[k]``; the last row holds
    the full-interval weights.

    Returns:
        Read-only nodes and matrix.
    """
    x: np.ndarray = -np.cos(np.pi * np.arange(size) / (size - 1))
    vander: np.ndarray = chebyshev.chebvander(x, size - 1)
    basis: np.ndarray = np.eye(size)
    integrated: np.ndarray = np.column_stack([
        chebyshev.chebval(x, chebyshev.chebint(basis[m], lbnd=-1)) for m in range(size)
    ])
    matrix: np.ndarray = 0.5 * integrated @ np.linalg.inv(vander)
    nodes: np.ndarray = (x + 1.0) / 2.0
    nodes.setflags(write=False)
    matrix.setflags(write=False)
    return nodes, matrix


def spectral_integral(
    fn: Callable[[Number], Number],
    lower: Number,
    upper: Number,
    size: int = SPECTRAL_NODES,
) -> Number:
    """Integrate a smooth dual-compatible function on ``[lower, upper]``.

    Returns:
        The integral, carrying derivatives with respect to the limits and anything ``fn`` closes over.
    """
    nodes, matrix = spectral_rule(size)
    width: Number = add(upper, neg(lower))
    total: Number = 0.0
    for t, w in zip(nodes, matrix[-1], strict=True):
        total = add(total, mul(float(w), fn(add(lower, mul(width, float(t))))))
    return mul(width, total)


@dataclass(frozen=True)
class Profile:
    """Samples of an integrand on the spectral nodes of ``[lower, upper]`` with running integrals."""

    points: tuple[Number, ...]
    """The sample abscissae ``lower + (upper - lower) t_k``."""

    values: tuple[Number, ...]
    """The integrand at each abscissa."""

    running: tuple[Number, ...]
    """The integral from ``lower`` to each abscissa."""

    @property
    def total(self) -> Number:
        """Integral over the whole interval."""
        return self.running[-1]


def node_points(lower: Number, upper: Number, size: int = SPECTRAL_NODES) -> tuple[Number, ...]:
    """Spectral abscissae of ``[lower, upper]``.

    Returns:
        One abscissa per node, ``lower`` first and ``upper`` last.
    """
    nodes, _ = spectral_rule(size)
    width: Number = add(upper, neg(lower))
    return tuple(add(lower, mul(width, float(t))) for t in nodes)


def cumulative(
    values: Sequence[Number],
    lower: Number,
    upper: Number,
    size: int = SPECTRAL_NODES,
) -> tuple[Number, ...]:
    """Running integrals of node samples.

    Returns:
        The integral from ``lower`` to each node.
    """
    _, matrix = spectral_rule(size)
    width: Number = add(upper, neg(lower))
    out: list[Number] = []
    for row in matrix:
        total: Number = 0.0
        for w, v in zip(row, values, strict=True):
            total = add(total, mul(float(w), v))
        out.append(mul(width, total))
    return tuple(out)


def profile(fn: Callable[[Number], Number], lower: Number, upper: Number, size: int = SPECTRAL_NODES) -> Profile:
    """Sample ``fn`` on the spectral nodes and integrate cumulatively.

    Returns:
        The profile.
    """
    points: tuple[Number, ...] = node_points(lower, upper, size)
    values: tuple[Number, ...] = tuple(fn(p) for p in points)
    return Profile(points=points, values=values, running=cumulative(values, lower, upper, size))


def top_tag(*values: object) -> int:
    """Newest seed tag carried by any of the values (0 for plain floats).

    Returns:
        The tag.
    """
    return max((_top(v) for v in values), default=0)


def anchored(running: Number, integrand: Callable[[Number], Number], point: Number, floor: int) -> Number:
    """Extend a running integral to a point seeded with tags newer than ``floor``.

    ``running`` is the integral up to ``point`` with every tag above ``floor`` removed. Each newer layer adds
    ``integrand * (point - base)``, so derivatives along those tags are exact at any order.

    Returns:
        The integral at ``point``.
    """
    tag: int = _top(point)
    if tag <= floor:
        return running
    base: Number = strip(point, tag)
    inner: Number = anchored(running, integrand, base, floor)
    return add(inner, mul(integrand(base), add(point, neg(base))))


def second_jet(fn: Callable[[Number], Number], s: Number) -> tuple[Number, Number, Number]:
    """Value, first and second derivative of a one-variable function at a possibly dual point.

    Returns:
        ``(f, f', f'')``.
    """
    outer_tag, (first,) = seed([s])
    inner_tag, (second,) = seed([first])
    out: Number = fn(second)
    value: Number = strip(strip(out, inner_tag), outer_tag)
    slope: Number = strip(tangent(out, inner_tag, 0), outer_tag)
    curvature: Number = tangent(tangent(out, inner_tag, 0), outer_tag, 0)
    return value, slope, curvature


# Sample points


def halton_points(low: Sequence[float], high: Sequence[float], count: int, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points in a box; the same seed gives the same points.

    Args:
        low: Lower corner.
        high: Upper corner.
        count: Number of points.
        seed: Scrambling seed.

    Returns:
        A ``count x dim`` float array.

    Raises:
        InputError: If the box is degenerate or the corners differ in length.
    """
    lower: np.ndarray = np.asarray(low, dtype=float)
    upper: np.ndarray = np.asarray(high, dtype=float)
    if lower.shape != upper.shape or np.any(upper <= lower):
        msg: str = f"Degenerate sample box {tuple(lower)} .. {tuple(upper)}"
        raise InputError(msg)
    sampler = qmc.Halton(d=lower.size, scramble=True, rng=np.random.default_rng(seed))
    return qmc.scale(sampler.random(count), lower, upper)
