"""Finite-difference solver for the horizontal generating function ``psi``.

Solves ``eps1 psi_11 + eps2 psi_22 = Υ2`` on a rectangle. Equal signs give an elliptic Dirichlet problem
solved with a sparse five-point operator; opposite signs give a wave equation marched along ``x1`` with
leapfrog steps from the boundary data on the first two grid lines.
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING
from typing import Literal

import numpy as np
from scipy import interpolate
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from finsler_forge import jetcalc
from finsler_forge.ansatzgen.recipes import check_sign
from finsler_forge.ansatzgen.recipes import value_of
from finsler_forge.exceptions import InputError
from finsler_forge.exceptions import SolverError
from finsler_forge.jetcalc import ScalarField
from finsler_forge.jetcalc import TaylorField

if TYPE_CHECKING:
    from finsler_forge.ansatzgen.recipes import Coefficient

logger: logging.Logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE: float = 1e-8
SPLINE_DEGREE: int = 5
BLOW_UP_FACTOR: float = 1e12

type PsiMethod = Literal["elliptic", "hyperbolic"]


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid, boundary nodes included."""

    x1: tuple[float, float]
    x2: tuple[float, float]
    n1: int = 101
    n2: int = 101

    def __post_init__(self) -> None:
        if min(self.n1, self.n2) <= SPLINE_DEGREE:
            msg: str = f"A psi grid needs more than {SPLINE_DEGREE} nodes per axis, got {self.n1}x{self.n2}"
            raise InputError(msg)
        if self.x1[1] <= self.x1[0] or self.x2[1] <= self.x2[0]:
            msg = f"Grid ranges must increase, got x1={self.x1}, x2={self.x2}"
            raise InputError(msg)

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates along each axis.

        Returns:
            ``(x1, x2)``.
        """
        return np.linspace(*self.x1, self.n1), np.linspace(*self.x2, self.n2)

    @property
    def steps(self) -> tuple[float, float]:
        """Grid spacings ``(h1, h2)``."""
        return (self.x1[1] - self.x1[0]) / (self.n1 - 1), (self.x2[1] - self.x2[0]) / (self.n2 - 1)


@dataclass(frozen=True)
class PsiSolution:
    """Grid solution with a smooth interpolant."""

    x1: np.ndarray
    x2: np.ndarray
    values: np.ndarray
    residual: float
    """Largest residual of the discrete operator on interior nodes."""

    method: PsiMethod

    def field(self, dim: int = 2) -> ScalarField:
        """Interpolated ``psi`` as a field of ``dim`` coordinates whose first two are ``(x1, x2)``.

        The quintic spline lifts to dual inputs, so ``psi`` can feed a generator directly.

        Returns:
            The field.
        """
        spline = interpolate.RectBivariateSpline(
            self.x1, self.x2, self.values, kx=SPLINE_DEGREE, ky=SPLINE_DEGREE, s=0
        )

        def partial(orders: tuple[int, ...], point: tuple[float, ...]) -> float:
            if max(orders) >= SPLINE_DEGREE:
                return 0.0
            return float(spline.ev(point[0], point[1], dx=orders[0], dy=orders[1]))

        lift: TaylorField = TaylorField(dim=2, partial=partial, name="psi")
        return ScalarField(dim=dim, fn=lambda p: lift([p[0], p[1]]), name="psi")


def _sample(coefficient: Coefficient, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    out: np.ndarray = np.empty((len(x1), len(x2)))
    for i, a in enumerate(x1):
        for j, b in enumerate(x2):
            out[i, j] = jetcalc.primal(value_of(coefficient, [float(a), float(b)]))
    return out


def _operator(values: np.ndarray, eps1: int, eps2: int, h1: float, h2: float) -> np.ndarray:
    """Five-point ``eps1 psi_11 + eps2 psi_22`` on interior nodes.

    Returns:
        The interior array.
    """
    d11: np.ndarray = (values[2:, 1:-1] - 2.0 * values[1:-1, 1:-1] + values[:-2, 1:-1]) / (h1 * h1)
    d22: np.ndarray = (values[1:-1, 2:] - 2.0 * values[1:-1, 1:-1] + values[1:-1, :-2]) / (h2 * h2)
    return eps1 * d11 + eps2 * d22


def _second_difference(size: int) -> sparse.csr_matrix:
    return sparse.diags([np.ones(size - 1), -2.0 * np.ones(size), np.ones(size - 1)], offsets=[-1, 0, 1])


def _solve_elliptic(
    upsilon: np.ndarray, boundary: np.ndarray, eps1: int, eps2: int, h1: float, h2: float
) -> np.ndarray:
    values: np.ndarray = boundary.copy()
    values[1:-1, 1:-1] = 0.0
    inner1, inner2 = values.shape[0] - 2, values.shape[1] - 2
    matrix = eps1 / (h1 * h1) * sparse.kron(_second_difference(inner1), sparse.identity(inner2)) + eps2 / (
        h2 * h2
    ) * sparse.kron(sparse.identity(inner1), _second_difference(inner2))
    rhs: np.ndarray = upsilon[1:-1, 1:-1] - _operator(values, eps1, eps2, h1, h2)
    try:
        interior: np.ndarray = sparse_linalg.spsolve(sparse.csc_matrix(matrix), rhs.ravel())
    except RuntimeError as e:
        msg: str = f"Sparse solve for psi failed: {e}"
        raise SolverError(msg) from e
    values[1:-1, 1:-1] = interior.reshape(inner1, inner2)
    return values


def _march_hyperbolic(
    upsilon: np.ndarray, boundary: np.ndarray, eps1: int, eps2: int, h1: float, h2: float
) -> np.ndarray:
    courant: float = h1 / h2
    if courant > 1.0 + 1e-12:
        msg: str = f"Leapfrog marching is unstable for h1/h2 = {courant:.4g} > 1; refine x2 or coarsen x1"
        raise SolverError(msg)
    values: np.ndarray = boundary.copy()
    limit: float = BLOW_UP_FACTOR * (1.0 + float(np.max(np.abs(boundary))))
    for i in range(1, values.shape[0] - 1):
        d22: np.ndarray = (values[i, 2:] - 2.0 * values[i, 1:-1] + values[i, :-2]) / (h2 * h2)
        values[i + 1, 1:-1] = (
            2.0 * values[i, 1:-1] - values[i - 1, 1:-1] + h1 * h1 / eps1 * (upsilon[i, 1:-1] - eps2 * d22)
        )
        if not np.all(np.isfinite(values[i + 1])) or np.max(np.abs(values[i + 1])) > limit:
            msg = f"psi marching blew up at x1 line {i + 1}"
            raise SolverError(msg)
    return values


def solve_psi(
    upsilon2: Coefficient,
    eps1: int,
    eps2: int,
    grid: Grid,
    boundary: Coefficient = 0.0,
) -> PsiSolution:
    """Solve ``eps1 psi_11 + eps2 psi_22 = Υ2`` with second-order finite differences.

    Args:
        upsilon2: Source as a field of ``(x1, x2)`` or a constant.
        eps1: Signature flag of ``x1``.
        eps2: Signature flag of ``x2``.
        grid: The rectangle and its resolution.
        boundary: Dirichlet data; in the hyperbolic case it also supplies the first two ``x1`` lines.

    Returns:
        The grid solution.

    Raises:
        SolverError: If the discrete residual stays above tolerance or marching is unstable.
    """
    check_sign("eps1", eps1)
    check_sign("eps2", eps2)
    x1, x2 = grid.axes()
    h1, h2 = grid.steps
    upsilon: np.ndarray = _sample(upsilon2, x1, x2)
    data: np.ndarray = _sample(boundary, x1, x2)
    frame: np.ndarray = np.zeros_like(data)
    frame[[0, -1], :] = data[[0, -1], :]
    frame[:, [0, -1]] = data[:, [0, -1]]

    method: PsiMethod = "elliptic" if eps1 * eps2 > 0 else "hyperbolic"
    if method == "elliptic":
        values: np.ndarray = _solve_elliptic(upsilon, frame, eps1, eps2, h1, h2)
    else:
        frame[1, :] = data[1, :]
        values = _march_hyperbolic(upsilon, frame, eps1, eps2, h1, h2)

    residual: float = float(np.max(np.abs(_operator(values, eps1, eps2, h1, h2) - upsilon[1:-1, 1:-1])))
    rounding: float = 100.0 * np.finfo(float).eps * float(np.max(np.abs(values))) / min(h1, h2) ** 2
    if residual > RESIDUAL_TOLERANCE * (1.0 + float(np.max(np.abs(upsilon)))) + rounding:
        msg: str = f"psi residual {residual:.3g} above {RESIDUAL_TOLERANCE} after the {method} solve"
        raise SolverError(msg)
    logger.info("Solved psi (%s) on %dx%d grid, residual %.3g", method, grid.n1, grid.n2, residual)
    return PsiSolution(x1=x1, x2=x2, values=values, residual=residual, method=method)

