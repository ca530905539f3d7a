"""N-connections, adapted frames and d-metrics.

Coordinates are ``u = (x^1..x^n, y^1..y^m)``. Arrays index the N-connection as ``N[i, a]`` (= N_i^a) and
derivatives carry the coordinate direction as the trailing axis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from dataclasses import field
from typing import TYPE_CHECKING

import numpy as np

from finsler_forge import jetcalc
from finsler_forge.exceptions import InputError
from finsler_forge.jetcalc import ScalarField

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Sequence

    from finsler_forge.jetcalc import Number

logger: logging.Logger = logging.getLogger(__name__)

type MatrixRule = Callable[[Sequence[Number]], np.ndarray]
type Entry = ScalarField | float | None


def matrix_rule(entries: Sequence[Sequence[Entry]]) -> MatrixRule:
    """Build a matrix-valued rule from a table of fields, constants and ``None`` (zero).

    Returns:
        A callable returning an object array.
    """
    table: list[list[Entry]] = [list(row) for row in entries]

    def rule(point: Sequence[Number]) -> np.ndarray:
        out: np.ndarray = np.zeros((len(table), len(table[0]) if table else 0), dtype=object)
        for i, row in enumerate(table):
            for j, entry in enumerate(row):
                if isinstance(entry, ScalarField):
                    out[i, j] = entry(point)
                elif entry is not None:
                    out[i, j] = float(entry)
        return out

    return rule


def diagonal_rule(entries: Sequence[Entry]) -> MatrixRule:
    """Diagonal matrix rule.

    Returns:
        A callable returning an object array.
    """
    size: int = len(entries)
    return matrix_rule([[entries[i] if i == j else None for j in range(size)] for i in range(size)])


def zero_rule(rows: int, cols: int) -> MatrixRule:
    """A rule that always returns a zero block.

    Returns:
        A callable returning a zero object array.
    """
    return lambda _point: np.zeros((rows, cols), dtype=object)


def settle(values: np.ndarray) -> np.ndarray:
    """Convert to a float array when no entry is dual.

    Returns:
        The array, float when possible.
    """
    if any(isinstance(v, jetcalc.Dual) for v in np.asarray(values, dtype=object).flat):
        return values
    return np.asarray(values, dtype=object).astype(float)


@dataclass(frozen=True)
class NConnection:
    """Nonlinear connection coefficients ``N_i^a`` over the total space."""

    n: int
    m: int
    coeffs: MatrixRule
    name: str = "N"

    @classmethod
    def from_fields(cls, entries: Sequence[Sequence[Entry]], name: str = "N") -> NConnection:
        """Build from an ``n x m`` table of fields.

        Returns:
            The N-connection.
        """
        n: int = len(entries)
        m: int = len(entries[0]) if n else 0
        return cls(n=n, m=m, coeffs=matrix_rule(entries), name=name)

    @classmethod
    def zero(cls, n: int, m: int) -> NConnection:
        """The holonomic (trivial) N-connection.

        Returns:
            The N-connection.
        """
        return cls(n=n, m=m, coeffs=zero_rule(n, m), name="0")

    @property
    def dim(self) -> int:
        """Total-space dimension."""
        return self.n + self.m

    def __call__(self, point: Sequence[Number]) -> np.ndarray:
        if len(point) != self.dim:
            msg: str = f"N-connection {self.name} expects {self.dim} coordinates, got {len(point)}"
            raise InputError(msg)
        return np.asarray(self.coeffs(point), dtype=object)


def adapt(derivative: np.ndarray, N: np.ndarray) -> np.ndarray:
    """Turn coordinate derivatives (direction on the trailing axis) into N-adapted ones.

    ``e_k = ∂_k − N_k^b ∂_b`` on the first ``n`` directions; vertical directions are unchanged.

    Returns:
        The adapted derivatives.
    """
    n, m = N.shape
    out: np.ndarray = np.array(derivative, dtype=object, copy=True)
    vertical: np.ndarray = derivative[..., n : n + m]
    out[..., :n] = derivative[..., :n] - vertical @ N.T
    return out


@dataclass(frozen=True)
class FramePack:
    """N-adapted frame and coframe at one point, as coordinate-component rows."""

    e_down: np.ndarray
    """Row ``α`` holds the coordinate components of ``e_α``."""

    e_up: np.ndarray
    """Row ``α`` holds the coordinate components of ``e^α``."""

    def duality_defect(self) -> float:
        """Max deviation of ``<e^α, e_β>`` from the identity."""
        pairing: np.ndarray = jetcalc.to_float(self.e_up @ self.e_down.T)
        return float(np.max(np.abs(pairing - np.eye(pairing.shape[0]))))


def frames_from(N: np.ndarray) -> FramePack:
    """Frame and coframe for evaluated coefficients.

    Returns:
        The frame pack.
    """
    n, m = N.shape
    dim: int = n + m
    e_down: np.ndarray = np.eye(dim, dtype=object)
    e_up: np.ndarray = np.eye(dim, dtype=object)
    e_down[:n, n:] = -N
    e_up[n:, :n] = N.T
    return FramePack(e_down=settle(e_down), e_up=settle(e_up))


def adapted_frames(N: NConnection, point: Sequence[Number]) -> FramePack:
    """N-adapted frame ``e_i = ∂_i − N_i^a ∂_a, e_a = ∂_a`` and coframe ``e^a = dy^a + N_i^a dx^i``.

    Returns:
        The frame pack.
    """
    return frames_from(N(point))


@dataclass(frozen=True)
class Anholonomy:
    """Commutator coefficients ``[e_α, e_β] = w^γ_αβ e_γ``."""

    w: np.ndarray
    """Full array ``w[γ, α, β]``."""

    n: int

    @property
    def omega(self) -> np.ndarray:
        """``Ω[a, i, j]``, the horizontal-horizontal block."""
        return self.w[self.n :, : self.n, : self.n]


def _coefficient_derivatives(N: NConnection, point: Sequence[Number]) -> tuple[np.ndarray, np.ndarray]:
    value, deriv = jetcalc.differentiate(lambda u: N(u), point)
    return value, deriv


def omega_from(N: np.ndarray, dN: np.ndarray) -> np.ndarray:
    """N-curvature ``Ω^a_ij = e_j N_i^a − e_i N_j^a`` from coefficients and their derivatives.

    Returns:
        ``Ω[a, i, j]``.
    """
    n, m = N.shape
    eN: np.ndarray = adapt(dN, N)
    omega: np.ndarray = np.empty((m, n, n), dtype=object)
    for a in range(m):
        for i in range(n):
            for j in range(n):
                omega[a, i, j] = eN[i, a, j] - eN[j, a, i]
    return omega


def ncurvature(N: NConnection, point: Sequence[Number]) -> np.ndarray:
    """N-connection curvature at a point.

    Returns:
        ``Ω[a, i, j]``, antisymmetric in ``i, j``.
    """
    value, deriv = _coefficient_derivatives(N, point)
    return settle(omega_from(value, deriv))


def anholonomy_from(N: np.ndarray, dN: np.ndarray) -> Anholonomy:
    """Commutator coefficients of the adapted frame from coefficients and their derivatives.

    Returns:
        The anholonomy coefficients.
    """
    n, m = N.shape
    dim: int = n + m
    w: np.ndarray = np.zeros((dim, dim, dim), dtype=object)
    omega: np.ndarray = omega_from(N, dN)
    w[n:, :n, :n] = omega
    for b in range(m):
        for i in range(n):
            for a in range(m):
                w[n + b, i, n + a] = dN[i, b, n + a]
                w[n + b, n + a, i] = -dN[i, b, n + a]
    return Anholonomy(w=settle(w), n=n)


def anholonomy_coeffs(N: NConnection, point: Sequence[Number]) -> Anholonomy:
    """Anholonomy coefficients: ``w^b_ia = ∂_a N_i^b`` and ``w^a_ij = Ω^a_ij``.

    Returns:
        The anholonomy coefficients.
    """
    value, deriv = _coefficient_derivatives(N, point)
    return anholonomy_from(value, deriv)


def nadapted_derivative(field_: ScalarField, N: NConnection, index: int, point: Sequence[Number]) -> Number:
    """Apply ``e_α`` to a scalar field.

    Returns:
        ``∂_i f − N_i^a ∂_a f`` for horizontal ``index``, ``∂_a f`` otherwise.
    """
    grad: list[Number] = jetcalc.gradient(field_.fn, point)
    if index >= N.n:
        return grad[index]
    coeffs: np.ndarray = N(point)
    total: Number = grad[index]
    for a in range(N.m):
        total = jetcalc.add(total, jetcalc.neg(jetcalc.mul(coeffs[index, a], grad[N.n + a])))
    return total


# d-metrics


def assemble(g: np.ndarray, h: np.ndarray, N: np.ndarray) -> np.ndarray:
    """Coordinate form of a d-metric ``g ⊕ h`` with N-connection ``N[i, a]``.

    Returns:
        ``[[g + N h Nᵀ, N h], [h Nᵀ, h]]``.
    """
    n, m = N.shape
    full: np.ndarray = np.empty((n + m, n + m), dtype=object)
    Nh: np.ndarray = N @ h
    full[:n, :n] = g + Nh @ N.T
    full[:n, n:] = Nh
    full[n:, :n] = Nh.T
    full[n:, n:] = h
    return full


@dataclass(frozen=True)
class ShellBlocks:
    """One evaluated shell: its metric block and its N block onto every earlier coordinate."""

    h: np.ndarray
    N: np.ndarray


@dataclass(frozen=True)
class MetricBlocks:
    """An evaluated d-metric."""

    g: np.ndarray
    shells: tuple[ShellBlocks, ...]

    def split(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Fold lower shells into the horizontal block.

        Returns:
            ``(g_eff, h, N)`` for the top shell.
        """
        lower: np.ndarray = self.g
        for shell in self.shells[:-1]:
            lower = assemble(lower, shell.h, shell.N)
        top: ShellBlocks = self.shells[-1]
        return lower, top.h, top.N

    def full(self) -> np.ndarray:
        """Assembled coordinate-frame metric.

        Returns:
            The full symmetric matrix.
        """
        g, h, N = self.split()
        return assemble(g, h, N)


@dataclass(frozen=True)
class DMetric:
    """A d-metric with an h-block and one to three v-shells.

    ``evaluate`` computes every block in one pass so generators can share intermediate results.
    """

    n: int
    """Base (horizontal) dimension."""

    shell_dims: tuple[int, ...]
    """Dimensions of the v-shells, innermost first."""

    evaluate: Callable[[Sequence[Number]], MetricBlocks] = field(repr=False)
    """Block evaluation rule."""

    name: str = "d-metric"

    def __post_init__(self) -> None:
        if not 1 <= len(self.shell_dims) <= 3:  # noqa: PLR2004
            msg: str = f"A d-metric has one to three shells, got {len(self.shell_dims)}"
            raise InputError(msg)

    @classmethod
    def from_rules(
        cls,
        g: MatrixRule,
        shells: Sequence[tuple[MatrixRule, MatrixRule]],
        n: int,
        shell_dims: Sequence[int],
        name: str = "d-metric",
    ) -> DMetric:
        """Build from per-block rules.

        Returns:
            The d-metric.
        """
        rules: tuple[tuple[MatrixRule, MatrixRule], ...] = tuple(shells)

        def evaluate(point: Sequence[Number]) -> MetricBlocks:
            return MetricBlocks(
                g=np.asarray(g(point), dtype=object),
                shells=tuple(
                    ShellBlocks(h=np.asarray(h(point), dtype=object), N=np.asarray(N(point), dtype=object))
                    for h, N in rules
                ),
            )

        return cls(n=n, shell_dims=tuple(shell_dims), evaluate=evaluate, name=name)

    @classmethod
    def single(cls, g: MatrixRule, h: MatrixRule, N: MatrixRule, n: int, m: int, name: str = "d-metric") -> DMetric:
        """Build a one-shell d-metric.

        Returns:
            The d-metric.
        """
        return cls.from_rules(g=g, shells=[(h, N)], n=n, shell_dims=[m], name=name)

    @property
    def m(self) -> int:
        """Total fiber dimension."""
        return sum(self.shell_dims)

    @property
    def dim(self) -> int:
        """Total-space dimension."""
        return self.n + self.m

    @property
    def split_dims(self) -> tuple[int, int]:
        """``(n_eff, m_top)`` of the top h/v split."""
        return self.dim - self.shell_dims[-1], self.shell_dims[-1]

    def blocks(self, point: Sequence[Number]) -> MetricBlocks:
        """Evaluate every block.

        Returns:
            The evaluated blocks.

        Raises:
            InputError: If the point has the wrong dimension.
        """
        if len(point) != self.dim:
            msg: str = f"{self.name} expects {self.dim} coordinates, got {len(point)}"
            raise InputError(msg)
        return self.evaluate(list(point))

    def split(self, point: Sequence[Number]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Blocks of the top h/v split.

        Returns:
            ``(g_eff, h, N)``.
        """
        return self.blocks(point).split()

    def flatten(self) -> DMetric:
        """Equivalent one-shell metric whose h-block carries every lower shell.

        Returns:
            The flattened d-metric.
        """
        if len(self.shell_dims) == 1:
            return self
        n_eff, m_top = self.split_dims

        def evaluate(point: Sequence[Number]) -> MetricBlocks:
            g, h, N = self.blocks(point).split()
            return MetricBlocks(g=g, shells=(ShellBlocks(h=h, N=N),))

        return DMetric(n=n_eff, shell_dims=(m_top,), evaluate=evaluate, name=f"{self.name} (flattened)")

    def nconnection(self) -> NConnection:
        """N-connection of the top split.

        Returns:
            The N-connection.
        """
        n_eff, m_top = self.split_dims
        return NConnection(n=n_eff, m=m_top, coeffs=lambda u: self.split(u)[2], name=f"N[{self.name}]")

    def full(self) -> Callable[[Sequence[Number]], np.ndarray]:
        """Assembled coordinate metric as a rule.

        Returns:
            A callable returning the full matrix.
        """
        return lambda u: self.blocks(u).full()


def assemble_offdiagonal(metric: DMetric, point: Sequence[Number]) -> np.ndarray:
    """Generic off-diagonal coordinate metric of a d-metric.

    Multi-shell metrics are assembled shell by shell.

    Returns:
        The symmetric ``dim x dim`` matrix.
    """
    return settle(metric.blocks(point).full())


@dataclass(frozen=True)
class SplitJet:
    """Top-split blocks of a d-metric with inverses and first derivatives at one point."""

    g: np.ndarray
    h: np.ndarray
    N: np.ndarray
    dg: np.ndarray
    """``dg[i, j, μ] = ∂_μ g_ij``."""
    dh: np.ndarray
    dN: np.ndarray
    ginv: np.ndarray
    hinv: np.ndarray

    @property
    def n(self) -> int:
        """Horizontal dimension of the split."""
        return self.g.shape[0]

    @property
    def m(self) -> int:
        """Vertical dimension of the split."""
        return self.h.shape[0]

    def e(self, derivative: np.ndarray) -> np.ndarray:
        """N-adapted version of a coordinate-derivative array.

        Returns:
            Derivatives along ``e_α``.
        """
        return adapt(derivative, self.N)

    @property
    def omega(self) -> np.ndarray:
        """N-curvature ``Ω[a, i, j]``."""
        return omega_from(self.N, self.dN)


def metric_jet(metric: DMetric, point: Sequence[Number]) -> SplitJet:
    """Blocks, inverses and derivatives of the top split.

    Returns:
        The split jet.
    """
    n_eff, m_top = metric.split_dims

    def packed(u: Sequence[Number]) -> np.ndarray:
        g, h, N = metric.split(u)
        return np.concatenate([np.asarray(g, dtype=object).ravel(), h.ravel(), N.ravel()])

    value, deriv = jetcalc.differentiate(packed, point)
    dim: int = metric.dim
    sizes: list[int] = [n_eff * n_eff, m_top * m_top, n_eff * m_top]
    offsets: np.ndarray = np.cumsum([0, *sizes])
    g: np.ndarray = value[offsets[0] : offsets[1]].reshape(n_eff, n_eff)
    h: np.ndarray = value[offsets[1] : offsets[2]].reshape(m_top, m_top)
    N: np.ndarray = value[offsets[2] : offsets[3]].reshape(n_eff, m_top)
    return SplitJet(
        g=g,
        h=h,
        N=N,
        dg=deriv[offsets[0] : offsets[1]].reshape(n_eff, n_eff, dim),
        dh=deriv[offsets[1] : offsets[2]].reshape(m_top, m_top, dim),
        dN=deriv[offsets[2] : offsets[3]].reshape(n_eff, m_top, dim),
        ginv=jetcalc.invert_symmetric(g),
        hinv=jetcalc.invert_symmetric(h),
    )
