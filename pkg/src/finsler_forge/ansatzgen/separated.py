"""Residuals of the separated field equations and of the generic curvature pipeline.

``residuals_separated`` evaluates the closed forms the field equations take on the shell ansatz, straight
from the metric coefficients and their derivatives. ``residuals_generic`` runs the full connection and
curvature pipeline instead and serves as an independent check.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from finsler_forge import jetcalc
from finsler_forge.ansatzgen.recipes import ResidualReport
from finsler_forge.ansatzgen.recipes import check_kind
from finsler_forge.ansatzgen.recipes import value_of
from finsler_forge.connections import get_connection
from finsler_forge.dcurv import curvature_pack
from finsler_forge.exceptions import ShapeError
from finsler_forge.parallel import map_threads

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Sequence

    from finsler_forge.ansatzgen.recipes import ConnectionKind
    from finsler_forge.ansatzgen.recipes import Source
    from finsler_forge.dcurv import CurvaturePack
    from finsler_forge.jetcalc import Number
    from finsler_forge.nholon import DMetric
    from finsler_forge.nholon import MetricBlocks

logger: logging.Logger = logging.getLogger(__name__)

SHAPE_TOLERANCE: float = 1e-9


@dataclass(frozen=True)
class BlockJet:
    """Packed coefficient functions with exact first and second derivatives at one point."""

    value: np.ndarray
    first: np.ndarray
    """``first[q, k] = ∂_k value[q]``."""

    second: np.ndarray
    """``second[q, j, k] = ∂_j ∂_k value[q]``."""

    def d(self, slot: int, *axes: int) -> Number:
        """Derivative of one packed entry along up to two coordinate axes.

        Returns:
            The derivative (the value itself for no axes).
        """
        if not axes:
            return self.value[slot]
        if len(axes) == 1:
            return self.first[slot, axes[0]]
        return self.second[slot, axes[0], axes[1]]


def block_jet(fn: Callable[[Sequence[Number]], np.ndarray], point: Sequence[Number]) -> BlockJet:
    """Differentiate a packed coefficient vector twice.

    Returns:
        The jet.
    """
    size: int = len(point)

    def with_first(p: Sequence[Number]) -> np.ndarray:
        value, first = jetcalc.differentiate(fn, p)
        return np.concatenate([value.ravel(), first.ravel()])

    outer_value, outer_first = jetcalc.differentiate(with_first, point)
    count: int = len(outer_value) // (size + 1)
    return BlockJet(
        value=outer_value[:count],
        first=outer_value[count:].reshape(count, size),
        second=outer_first[count:].reshape(count, size, size),
    )


@dataclass(frozen=True)
class ShellSlots:
    """Where one shell's coefficients sit in a packed vector."""

    base: int
    """Coordinate index of the shell's ``v``."""

    h_a: int
    h_b: int
    w: tuple[int, ...]
    n: tuple[int, ...]


@dataclass(frozen=True)
class PrintedShell:
    """Slots substituted by the printed form of the outermost shell's equations."""

    w_denominator: int
    """Metric entry dividing the ``w`` bracket."""

    bracket_partner: int
    """Metric entry whose ``v``-derivative multiplies ``∂_v h_a`` inside the bracket."""


def pack_layout(metric: DMetric) -> tuple[Callable[[Sequence[Number]], np.ndarray], tuple[ShellSlots, ...]]:
    """Packing rule ``[g1, g2, then per shell h_a, h_b, w..., n...]`` for a 2+2+... shell ansatz.

    Returns:
        The rule and the per-shell slots; the base block sits in slots 0 and 1.

    Raises:
        ShapeError: If the metric is not built from two-dimensional blocks.
    """
    if metric.n != 2 or any(d != 2 for d in metric.shell_dims):  # noqa: PLR2004
        msg: str = f"The separated equations need 2-dimensional blocks, got n={metric.n}, shells={metric.shell_dims}"
        raise ShapeError(msg)

    slots: list[ShellSlots] = []
    offset: int = 2
    for index in range(len(metric.shell_dims)):
        base: int = 2 + 2 * index
        slots.append(
            ShellSlots(
                base=base,
                h_a=offset,
                h_b=offset + 1,
                w=tuple(range(offset + 2, offset + 2 + base)),
                n=tuple(range(offset + 2 + base, offset + 2 + 2 * base)),
            )
        )
        offset += 2 + 2 * base

    def packed(point: Sequence[Number]) -> np.ndarray:
        blocks: MetricBlocks = metric.blocks(point)
        parts: list[Number] = [blocks.g[0, 0], blocks.g[1, 1]]
        for shell in blocks.shells:
            parts.extend([shell.h[0, 0], shell.h[1, 1], *shell.N[:, 0], *shell.N[:, 1]])
        return np.asarray(parts, dtype=object)

    return packed, tuple(slots)


def check_shape(metric: DMetric, jet: BlockJet, slots: Sequence[ShellSlots], point: Sequence[float]) -> None:
    """Reject metrics outside the shell ansatz.

    Blocks must be diagonal, the base block may depend on the base coordinates only, and each shell on
    coordinates up to its own ``v``.

    Raises:
        ShapeError: On the first violation found.
    """
    blocks: MetricBlocks = metric.blocks(point)
    off_diagonal: list[Number] = [blocks.g[0, 1], *(shell.h[0, 1] for shell in blocks.shells)]
    if any(abs(jetcalc.primal(v)) > SHAPE_TOLERANCE for v in off_diagonal):
        msg: str = f"{metric.name} has non-diagonal blocks at {tuple(point)}"
        raise ShapeError(msg)

    def depends(slot_ids: Sequence[int], first_axis: int) -> bool:
        return any(
            abs(jetcalc.primal(jet.first[q, k])) > SHAPE_TOLERANCE * (1.0 + abs(jetcalc.primal(jet.value[q])))
            for q in slot_ids
            for k in range(first_axis, metric.dim)
        )

    if depends([0, 1], 2):
        msg = f"{metric.name}: the base block depends on fiber coordinates"
        raise ShapeError(msg)
    for index, slot in enumerate(slots):
        if depends([slot.h_a, slot.h_b, *slot.w, *slot.n], slot.base + 1):
            msg = f"{metric.name}: shell {index + 1} depends on its Killing or later coordinates"
            raise ShapeError(msg)


def base_equation(jet: BlockJet, upsilon: Number) -> Number:
    """Horizontal equation ``R^1_1 + Υ2`` of a diagonal two-dimensional base.

    Returns:
        The residual.
    """
    g1, g2 = jet.d(0), jet.d(1)
    bracket: Number = (
        jet.d(1, 0, 0)
        - jet.d(0, 0) * jet.d(1, 0) / (2.0 * g1)
        - jet.d(1, 0) * jet.d(1, 0) / (2.0 * g2)
        + jet.d(0, 1, 1)
        - jet.d(0, 1) * jet.d(1, 1) / (2.0 * g2)
        - jet.d(0, 1) * jet.d(0, 1) / (2.0 * g1)
    )
    return -bracket / (2.0 * g1 * g2) + upsilon


def shell_bracket(jet: BlockJet, slots: ShellSlots, partner: int | None = None) -> Number:
    """``∂²h_b - (∂h_b)²/2h_b - ∂h_a ∂h_b/2h_a`` along the shell's ``v``.

    Returns:
        The bracket.
    """
    v: int = slots.base
    h_a, h_b = jet.d(slots.h_a), jet.d(slots.h_b)
    other: Number = jet.d(slots.h_b if partner is None else partner, v)
    return (
        jet.d(slots.h_b, v, v)
        - jet.d(slots.h_b, v) * jet.d(slots.h_b, v) / (2.0 * h_b)
        - jet.d(slots.h_a, v) * other / (2.0 * h_a)
    )


def shell_equations(
    jet: BlockJet,
    slots: ShellSlots,
    upsilon: Number,
    prefix: str = "",
    printed: PrintedShell | None = None,
) -> dict[str, Number]:
    """Residuals of one shell for the canonical d-connection.

    Returns:
        ``ricci_v`` and one ``mixed_w_k``/``mixed_n_k`` pair per earlier coordinate (1-based).
    """
    v: int = slots.base
    h_a, h_b = jet.d(slots.h_a), jet.d(slots.h_b)
    bracket: Number = shell_bracket(jet, slots, printed.bracket_partner if printed else None)
    out: dict[str, Number] = {f"{prefix}ricci_v": -bracket / (2.0 * h_a * h_b) + upsilon}

    w_denominator: Number = jet.d(printed.w_denominator) if printed else h_b
    n_denominator: Number = h_b if printed else h_a
    for k in range(slots.base):
        w_k: Number = jet.d(slots.w[k])
        out[f"{prefix}mixed_w_{k + 1}"] = (
            w_k * bracket / (2.0 * w_denominator)
            + jet.d(slots.h_b, v) / (4.0 * h_b) * (jet.d(slots.h_a, k) / h_a + jet.d(slots.h_b, k) / h_b)
            - jet.d(slots.h_b, k, v) / (2.0 * h_b)
        )
        out[f"{prefix}mixed_n_{k + 1}"] = h_b / (2.0 * h_a) * jet.d(slots.n[k], v, v) + (
            h_b / h_a * jet.d(slots.h_a, v) - 1.5 * jet.d(slots.h_b, v)
        ) * jet.d(slots.n[k], v) / (2.0 * n_denominator)
    return out


def hv_shell_equations(jet: BlockJet, slots: ShellSlots) -> dict[str, Number]:
    """Mixed residuals of a four-dimensional solution for the h-v connection.

    Returns:
        ``mixed_w_j`` and ``mixed_n_i`` for ``j, i`` in 1..2.
    """
    v: int = 2
    g1, g2 = jet.d(0), jet.d(1)
    h3, h4 = jet.d(slots.h_a), jet.d(slots.h_b)
    h3_s, h4_s = jet.d(slots.h_a, v), jet.d(slots.h_b, v)
    h3_ss, h4_ss = jet.d(slots.h_a, v, v), jet.d(slots.h_b, v, v)
    a_star: Number = (h3_ss * h3 - h3_s * h3_s) / (2.0 * h3 * h3) + (h4_ss * h4 - h4_s * h4_s) / (2.0 * h4 * h4)

    def d_a(k: int) -> Number:
        return (
            (jet.d(slots.h_a, k, v) * h3 - h3_s * jet.d(slots.h_a, k)) / (2.0 * h3 * h3)
            + (jet.d(slots.h_b, k, v) * h4 - h4_s * jet.d(slots.h_b, k)) / (2.0 * h4 * h4)
        )

    k_terms: tuple[Number, Number] = (
        -0.5 * (jet.d(0, 1) / (g2 * h3) + jet.d(1, 0) / (g2 * h4)),
        0.5 * (jet.d(1, 0) / (g1 * h3) - jet.d(1, 1) / (g2 * h4)),
    )
    out: dict[str, Number] = {}
    for j in range(2):
        b_j: Number = h4_s / (2.0 * h4) * (jet.d(0, j) / (2.0 * g1) - jet.d(1, j) / (2.0 * g2)) - d_a(j)
        out[f"mixed_w_{j + 1}"] = h3_s / (2.0 * h3) * jet.d(slots.w[j], v) + a_star * jet.d(slots.w[j]) + b_j
        out[f"mixed_n_{j + 1}"] = -h4_s / (2.0 * h3) * jet.d(slots.n[j], v) + h4_s / 2.0 * k_terms[j]
    return out


def _separated_at(metric: DMetric, kind: ConnectionKind, source: Source, point: Sequence[float]) -> dict[str, Number]:
    packed, slots = pack_layout(metric)
    if len(slots) != 1:
        msg: str = f"{metric.name} has {len(slots)} shells; use the eight-dimensional evaluator"
        raise ShapeError(msg)
    jet: BlockJet = block_jet(packed, point)
    check_shape(metric, jet, slots, point)
    shell: ShellSlots = slots[0]
    out: dict[str, Number] = {"ricci_h": base_equation(jet, source.base(point))}
    canonical: dict[str, Number] = shell_equations(jet, shell, value_of(source.upsilon4, point))
    if kind == "canonical":
        out.update(canonical)
    else:
        out["ricci_v"] = canonical["ricci_v"]
        out.update(hv_shell_equations(jet, shell))
    logger.debug("Separated residuals at %s: %s", tuple(point), {k: jetcalc.primal(v) for k, v in out.items()})
    return out


def residuals_separated(
    metric: DMetric,
    conn_kind: str,
    source: Source,
    points: Sequence[Sequence[float]],
    threads: int = 1,
) -> ResidualReport:
    """Evaluate the separated field equations of a four-dimensional shell ansatz.

    Args:
        metric: Diagonal 2+2 blocks; ``g`` depends on ``x``, the shell on ``(x, v)``, nothing on ``y4``.
        conn_kind: ``canonical`` or ``hv``; selects the form of the mixed equations.
        source: Diagonal source.
        points: Sample points.
        threads: Worker threads for the scan.

    Returns:
        Per-equation maxima.
    """
    kind: ConnectionKind = check_kind(conn_kind)
    residuals: list[dict[str, Number]] = map_threads(
        lambda p: _separated_at(metric, kind, source, p), [tuple(p) for p in points], threads
    )
    return ResidualReport.collect(points, residuals)


def block_sources(metric: DMetric, source: Source, point: Sequence[Number]) -> list[Number]:
    """Source value on every diagonal entry of the adapted frame.

    Returns:
        One value per coordinate.
    """
    out: list[Number] = [source.base(point)] * metric.n
    for index, size in enumerate(metric.shell_dims):
        out.extend([value_of(source.shell(index), point)] * size)
    return out


def _block_names(metric: DMetric) -> list[str]:
    names: list[str] = ["ricci_h"] * metric.n
    for index, size in enumerate(metric.shell_dims):
        label: str = "ricci_v" if len(metric.shell_dims) == 1 else f"shell{index + 1}_ricci_v"
        names.extend([label] * size)
    return names


def einstein_sources(upsilon: Sequence[Number]) -> list[Number]:
    """Diagonal of the Einstein-form source whose trace reversal is ``R^α_α = −Υ_α``.

    Returns:
        ``−Υ_α + ½ Σ_γ Υ_γ`` per coordinate.
    """
    half_trace: Number = 0.5 * sum(upsilon, start=0.0)
    return [half_trace - u for u in upsilon]


def _block_maxima(metric: DMetric, residual: np.ndarray) -> dict[str, float]:
    n_eff, _ = metric.split_dims
    values: np.ndarray = np.abs(jetcalc.to_float(residual))
    return {
        "einstein_hh": float(np.max(values[:n_eff, :n_eff])),
        "einstein_hv": float(np.max(values[:n_eff, n_eff:])),
        "einstein_vh": float(np.max(values[n_eff:, :n_eff])),
        "einstein_vv": float(np.max(values[n_eff:, n_eff:])),
    }


def _generic_at(metric: DMetric, kind: ConnectionKind, source: Source, point: Sequence[float]) -> dict[str, Number]:
    pack: CurvaturePack = curvature_pack(get_connection(kind), metric, point)
    g, h, _ = metric.split(point)
    n_eff, m_top = metric.split_dims
    inverse: np.ndarray = np.zeros((metric.dim, metric.dim), dtype=object)
    inverse[:n_eff, :n_eff] = jetcalc.invert_symmetric(g)
    inverse[n_eff:, n_eff:] = jetcalc.invert_symmetric(h)
    ricci: np.ndarray = inverse @ pack.ricci.full()
    upsilon: list[Number] = block_sources(metric, source, point)

    out: dict[str, Number] = {}
    for index, (name, u) in enumerate(zip(_block_names(metric), upsilon, strict=True)):
        value: float = abs(jetcalc.primal(ricci[index, index] + u))
        out[name] = max(out.get(name, 0.0), value)

    if m_top == 2:  # noqa: PLR2004
        prefix: str = "" if len(metric.shell_dims) == 1 else f"shell{len(metric.shell_dims)}_"
        for k in range(n_eff):
            out[f"{prefix}mixed_w_{k + 1}"] = pack.ricci.R_ai[0, k]
            out[f"{prefix}mixed_n_{k + 1}"] = pack.ricci.R_ai[1, k]

    einstein: np.ndarray = inverse @ pack.einstein - np.diag(np.asarray(einstein_sources(upsilon), dtype=object))
    out.update(_block_maxima(metric, einstein))
    return out


def residuals_generic(
    metric: DMetric,
    conn_kind: str,
    source: Source,
    points: Sequence[Sequence[float]],
    threads: int = 1,
) -> ResidualReport:
    """Field-equation residuals of any d-metric through the full connection and curvature pipeline.

    Every component of ``E^α_β − Υ^α_β`` is checked: the Einstein d-tensor comes from the curvature
    pack and the source is the trace reversal of the diagonal ``R^α_α = −Υ_α`` convention. The maxima
    over the four blocks are reported as ``einstein_hh``, ``einstein_hv``, ``einstein_vh`` and
    ``einstein_vv``. The diagonal equations are also reported in mixed Ricci form ``R^α_α + Υ_α`` and,
    for a two-dimensional top shell, the ``R_ai`` components under the separated equation ids, so the
    two evaluators can be compared entry by entry.

    Returns:
        Per-equation maxima.
    """
    kind: ConnectionKind = check_kind(conn_kind)
    residuals: list[dict[str, Number]] = map_threads(
        lambda p: _generic_at(metric, kind, source, p), [tuple(p) for p in points], threads
    )
    return ResidualReport.collect(points, residuals)
