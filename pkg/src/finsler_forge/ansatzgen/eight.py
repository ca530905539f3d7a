"""Eight-dimensional three-shell metrics: diagonal prime metrics, shell generation and solitonic deformations.

Two coordinate layouts are used. The ``frw`` layout ``(t, hr | htheta, hphi | vr, x1 | vtheta, vphi)`` keeps
every block two-dimensional so the separated three-shell equations apply. The ``solitonic`` layout
``(x1, hr, t | htheta | vr, hphi | vtheta, vphi)`` puts ``(t, htheta, vr)`` in front of the shells they
deform; it is the same diagonal metric with the coordinates permuted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING
from typing import Literal

import numpy as np

from finsler_forge import jetcalc
from finsler_forge.ansatzgen.recipes import ResidualReport
from finsler_forge.ansatzgen.recipes import ShellRecipe
from finsler_forge.ansatzgen.recipes import Source
from finsler_forge.ansatzgen.recipes import check_sign
from finsler_forge.ansatzgen.recipes import conformal_source
from finsler_forge.ansatzgen.recipes import value_of
from finsler_forge.ansatzgen.separated import BlockJet
from finsler_forge.ansatzgen.separated import PrintedShell
from finsler_forge.ansatzgen.separated import base_equation
from finsler_forge.ansatzgen.separated import block_jet
from finsler_forge.ansatzgen.separated import check_shape
from finsler_forge.ansatzgen.separated import pack_layout
from finsler_forge.ansatzgen.separated import shell_equations
from finsler_forge.ansatzgen.shells import VerticalShell
from finsler_forge.exceptions import InputError
from finsler_forge.exceptions import PreconditionError
from finsler_forge.exceptions import ShapeError
from finsler_forge.jetcalc import SPECTRAL_NODES
from finsler_forge.jetcalc import ScalarField
from finsler_forge.nholon import DMetric
from finsler_forge.nholon import MetricBlocks
from finsler_forge.nholon import ShellBlocks
from finsler_forge.parallel import map_threads
from finsler_forge.soliton import MAX_MODULATION
from finsler_forge.soliton import kp_line_soliton

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Sequence

    from finsler_forge.ansatzgen.recipes import Coefficient
    from finsler_forge.ansatzgen.separated import ShellSlots
    from finsler_forge.jetcalc import Number
    from finsler_forge.soliton import LineSoliton
    from finsler_forge.soliton import SolitonParams

logger: logging.Logger = logging.getLogger(__name__)

type Layout = Literal["frw", "solitonic"]
type ShellSpec = ShellRecipe | Callable[[Sequence[Number]], ShellBlocks]

LAYOUTS: tuple[Layout, ...] = ("frw", "solitonic")
FRW_COORDINATES: tuple[str, ...] = ("t", "hr", "htheta", "hphi", "vr", "x1", "vtheta", "vphi")
SOLITONIC_COORDINATES: tuple[str, ...] = ("x1", "hr", "t", "htheta", "vr", "hphi", "vtheta", "vphi")
SHELL_COUNT: int = 3


@dataclass(frozen=True)
class FansParams:
    """Scale factors and curvature constants of the diagonal prime metric.

    ``ha`` and ``va`` are functions of time alone: fields of the single coordinate ``t`` or constants.
    """

    ha: Coefficient = 1.0
    va: Coefficient = 1.0
    hk: float = 0.0
    vk: float = 0.0
    eps1: int = 1
    """Signature flag of the extra fiber coordinate ``x1``."""

    def __post_init__(self) -> None:
        check_sign("eps1", self.eps1)

    def scale(self, which: Literal["ha", "va"], t: Number) -> Number:
        """Scale factor at time ``t``.

        Returns:
            The value.
        """
        return value_of(self.ha if which == "ha" else self.va, [t])

    def acceleration(self, which: Literal["ha", "va"], t: Number) -> Number:
        """Second time derivative of a scale factor.

        Returns:
            The value.
        """
        return jetcalc.partial(lambda p: self.scale(which, p[0]), [t], [0, 0])


def check_layout(layout: str) -> Layout:
    """Validate a coordinate layout name.

    Returns:
        The layout.

    Raises:
        InputError: For an unknown layout.
    """
    if layout not in LAYOUTS:
        msg: str = f"Unknown 8-d layout {layout!r}; use one of {', '.join(LAYOUTS)}"
        raise InputError(msg)
    return layout  # type: ignore[return-value]


def _diag(*entries: Number) -> np.ndarray:
    size: int = len(entries)
    out: np.ndarray = np.zeros((size, size), dtype=object)
    for i, e in enumerate(entries):
        out[i, i] = e
    return out


def _fans_entries(
    params: FansParams, t: Number, hr: Number, htheta: Number, vr: Number, vtheta: Number
) -> dict[str, Number]:
    ha: Number = params.scale("ha", t)
    va: Number = params.scale("va", t)
    h_sphere: Number = ha * ha * hr * hr
    v_sphere: Number = va * va * vr * vr
    hs: Number = jetcalc.sin(htheta)
    vs: Number = jetcalc.sin(vtheta)
    return {
        "t": -1.0,
        "hr": ha * ha / (1.0 - params.hk * hr * hr),
        "htheta": h_sphere,
        "hphi": h_sphere * hs * hs,
        "vr": va * va / (1.0 - params.vk * vr * vr),
        "x1": float(params.eps1),
        "vtheta": v_sphere,
        "vphi": v_sphere * vs * vs,
    }


def diagonal_fans(params: FansParams, layout: str = "frw") -> DMetric:
    """Diagonal prime metric of two FLRW-type spaces, the second one on the velocity fiber.

    Returns:
        The three-shell d-metric in the requested coordinate layout.
    """
    chosen: Layout = check_layout(layout)
    names: tuple[str, ...] = FRW_COORDINATES if chosen == "frw" else SOLITONIC_COORDINATES
    # base size, then the three shell sizes
    sizes: tuple[int, ...] = (2, 2, 2, 2) if chosen == "frw" else (3, 1, 2, 2)

    def evaluate(point: Sequence[Number]) -> MetricBlocks:
        at: dict[str, Number] = dict(zip(names, point, strict=True))
        entries: dict[str, Number] = _fans_entries(params, at["t"], at["hr"], at["htheta"], at["vr"], at["vtheta"])
        ordered: list[Number] = [entries[name] for name in names]
        blocks: list[np.ndarray] = []
        start: int = 0
        for size in sizes:
            blocks.append(_diag(*ordered[start : start + size]))
            start += size
        shells: list[ShellBlocks] = []
        previous: int = sizes[0]
        for h in blocks[1:]:
            shells.append(ShellBlocks(h=h, N=np.zeros((previous, h.shape[0]), dtype=object)))
            previous += h.shape[0]
        return MetricBlocks(g=blocks[0], shells=tuple(shells))

    return DMetric(n=sizes[0], shell_dims=sizes[1:], evaluate=evaluate, name=f"diagonal 8-d prime ({chosen})")


def fans_source(params: FansParams) -> Source:
    """Diagonal source solved by the prime metric in the ``frw`` layout.

    Returns:
        ``Υ2 = -ha''/ha``, ``Υ4 = -1/(ha r)^2``, ``Υ6 = 0``, ``Υ8 = -1/(va vr)^2``.
    """

    def upsilon2(p: Sequence[Number]) -> Number:
        return -params.acceleration("ha", p[0]) / params.scale("ha", p[0])

    def upsilon4(p: Sequence[Number]) -> Number:
        a: Number = params.scale("ha", p[0]) * p[1]
        return -1.0 / (a * a)

    def upsilon8(p: Sequence[Number]) -> Number:
        a: Number = params.scale("va", p[0]) * p[4]
        return -1.0 / (a * a)

    return Source(
        upsilon2=ScalarField(dim=8, fn=upsilon2, name="upsilon2"),
        upsilon4=ScalarField(dim=8, fn=upsilon4, name="upsilon4"),
        upsilon6=0.0,
        upsilon8=ScalarField(dim=8, fn=upsilon8, name="upsilon8"),
    )


def fans_shell(params: FansParams, index: int) -> Callable[[Sequence[Number]], ShellBlocks]:
    """Prescribed shell ``index`` of the ``frw`` prime metric, for mixing with generated shells.

    Returns:
        A block rule.
    """
    prime: DMetric = diagonal_fans(params, "frw")
    return lambda point: prime.blocks(point).shells[index]


@dataclass(frozen=True)
class ConformalBase:
    """Horizontal block ``(eps1 e^psi, eps2 e^psi)``."""

    psi: Coefficient = 0.0
    signs: tuple[int, int] = (1, 1)

    def __post_init__(self) -> None:
        check_sign("eps1", self.signs[0])
        check_sign("eps2", self.signs[1])

    def __call__(self, point: Sequence[Number]) -> np.ndarray:
        scale: Number = jetcalc.exp(value_of(self.psi, point))
        return _diag(self.signs[0] * scale, self.signs[1] * scale)

    def source(self, point: Sequence[Number]) -> Number:
        """Horizontal source this base solves.

        Returns:
            The value at ``point``.
        """
        return conformal_source(self.psi, self.signs, point)


def conformal_base(psi: Coefficient = 0.0, signs: tuple[int, int] = (1, 1)) -> ConformalBase:
    """Conformally flat horizontal block.

    Returns:
        The block rule.
    """
    return ConformalBase(psi=psi, signs=signs)


def generate_three_shell(
    base: Callable[[Sequence[Number]], np.ndarray],
    shells: Sequence[ShellSpec],
    v0: float = 0.0,
    nodes: int = SPECTRAL_NODES,
    *,
    literal: bool = False,
) -> DMetric:
    """Stack a two-dimensional base and three two-dimensional shells in the ``frw`` block layout.

    Args:
        base: Rule for the 2x2 horizontal block.
        shells: Per shell a recipe to generate from, or a block rule to use as given.
        v0: Base point of the v-integrations of generated shells.
        nodes: Spectral nodes per v-integral.
        literal: Generate the outermost shell with the previous shell's ``h0`` inside its ``varsigma``
            integral.

    Returns:
        The eight-dimensional d-metric.

    Raises:
        InputError: Unless exactly three shells are given.
        PreconditionError: If ``literal`` is set but the two outer shells are not both generated.
    """
    if len(shells) != SHELL_COUNT:
        msg: str = f"An 8-d metric has {SHELL_COUNT} shells, got {len(shells)}"
        raise InputError(msg)
    if literal and not (isinstance(shells[1], ShellRecipe) and isinstance(shells[2], ShellRecipe)):
        msg = "The literal varsigma reading needs generated second and third shells"
        raise PreconditionError(msg)

    rules: list[Callable[[Sequence[Number]], ShellBlocks]] = []
    for index, spec in enumerate(shells):
        if not isinstance(spec, ShellRecipe):
            rules.append(spec)
            continue
        sigma_h0: Coefficient | None = None
        if literal and index == SHELL_COUNT - 1:
            sigma_h0 = shells[1].h0  # type: ignore[union-attr]
            logger.warning("Third shell uses the previous shell's h0 inside varsigma (literal reading)")
        shell: VerticalShell = VerticalShell(recipe=spec, base=2 + 2 * index, v0=v0, nodes=nodes, sigma_h0=sigma_h0)
        rules.append(shell.blocks)

    def evaluate(point: Sequence[Number]) -> MetricBlocks:
        return MetricBlocks(g=np.asarray(base(point), dtype=object), shells=tuple(rule(point) for rule in rules))

    generated: int = sum(isinstance(s, ShellRecipe) for s in shells)
    logger.info("Built three-shell 8-d metric with %d generated shells", generated)
    return DMetric(n=2, shell_dims=(2, 2, 2), evaluate=evaluate, name="three-shell 8-d metric")


def _printed_top(slots: Sequence[ShellSlots]) -> PrintedShell:
    return PrintedShell(w_denominator=slots[0].h_b, bracket_partner=slots[1].h_b)


def _eight_at(metric: DMetric, source: Source, point: Sequence[float], *, literal: bool) -> dict[str, Number]:
    packed, slots = pack_layout(metric)
    if len(slots) != SHELL_COUNT:
        msg: str = f"{metric.name} has {len(slots)} shells; the 8-d equations need {SHELL_COUNT}"
        raise ShapeError(msg)
    jet: BlockJet = block_jet(packed, point)
    check_shape(metric, jet, slots, point)
    out: dict[str, Number] = {"ricci_h": base_equation(jet, source.base(point))}
    for index, slot in enumerate(slots):
        printed: PrintedShell | None = _printed_top(slots) if literal and index == SHELL_COUNT - 1 else None
        upsilon: Number = value_of(source.shell(index), point)
        out.update(shell_equations(jet, slot, upsilon, prefix=f"shell{index + 1}_", printed=printed))
    return out


def residuals_8d(
    metric: DMetric,
    source: Source,
    points: Sequence[Sequence[float]],
    threads: int = 1,
    *,
    literal: bool = False,
) -> ResidualReport:
    """Separated field equations of a three-shell metric, one shell kernel per shell.

    Args:
        metric: Two-dimensional base and shells in the ``frw`` block layout.
        source: Diagonal source with one coefficient per block.
        points: Sample points.
        threads: Worker threads for the scan.
        literal: Evaluate the outermost shell's equations with the printed denominators.

    Returns:
        Per-equation maxima, ids prefixed ``shell1_`` to ``shell3_``.
    """
    if literal:
        logger.warning("Outermost shell equations use the literal printed denominators")
    residuals: list[dict[str, Number]] = map_threads(
        lambda p: _eight_at(metric, source, p, literal=literal), [tuple(p) for p in points], threads
    )
    return ResidualReport.collect(points, residuals)


@dataclass(frozen=True)
class SolitonicCoefficients:
    """First-order coefficients of the solitonic deformation."""

    varpi5: float = 1.0
    """Polarization of the ``vr`` entry."""

    varpi6: float = 1.0
    """Polarization of the ``hphi`` entry."""

    w3: float = 1.0
    w4: float = 1.0
    n3: float = 1.0
    n4: float = 1.0


def generate_8d_solitonic(
    params: SolitonParams,
    fans: FansParams,
    eps: float | None = None,
    coefficients: SolitonicCoefficients | None = None,
) -> DMetric:
    """Deform the ``solitonic``-layout prime metric by a line soliton ``xi(t, htheta, vr)``.

    The ``vr`` and ``hphi`` entries are multiplied by ``1 + eps varpi xi``; the ``vr`` row of ``N`` gets
    ``eps w xi`` on ``dt`` and ``dhtheta``, the ``hphi`` row ``eps n xi``.

    Args:
        params: Line-soliton data.
        fans: Prime-metric data.
        eps: Deformation amplitude, ``params.amplitude`` when None.
        coefficients: First-order coefficients.

    Returns:
        The d-metric; at ``eps = 0`` it evaluates to the prime metric bit for bit.

    Raises:
        PreconditionError: If ``eps`` is outside ``[0, 0.1]``.
    """
    amplitude: float = params.amplitude if eps is None else eps
    if not 0.0 <= amplitude <= MAX_MODULATION:
        msg: str = f"Solitonic amplitude {amplitude} is outside the first-order range [0, {MAX_MODULATION}]"
        raise PreconditionError(msg)
    c: SolitonicCoefficients = coefficients or SolitonicCoefficients()
    soliton: LineSoliton = kp_line_soliton(params)
    prime: DMetric = diagonal_fans(fans, "solitonic")

    def evaluate(point: Sequence[Number]) -> MetricBlocks:
        blocks: MetricBlocks = prime.blocks(point)
        xi: Number = soliton.field([point[2], point[3], point[4]])
        middle: ShellBlocks = blocks.shells[1]
        h: np.ndarray = middle.h.copy()
        h[0, 0] = h[0, 0] * (1.0 + amplitude * c.varpi5 * xi)
        h[1, 1] = h[1, 1] * (1.0 + amplitude * c.varpi6 * xi)
        N: np.ndarray = middle.N.copy()
        N[2, 0] = amplitude * c.w3 * xi
        N[3, 0] = amplitude * c.w4 * xi
        N[2, 1] = amplitude * c.n3 * xi
        N[3, 1] = amplitude * c.n4 * xi
        return MetricBlocks(g=blocks.g, shells=(blocks.shells[0], ShellBlocks(h=h, N=N), blocks.shells[2]))

    logger.info("Solitonic 8-d deformation, eps=%g, omega=%.6g", amplitude, soliton.omega)
    return DMetric(n=3, shell_dims=(1, 2, 2), evaluate=evaluate, name=f"solitonic 8-d metric (eps={amplitude:g})")
