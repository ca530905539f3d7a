"""Off-diagonal deformations of a four-dimensional FLRW-type prime metric.

Coordinates are ``(hr, t, htheta, hphi)``. The prime metric is diagonal,
``ha^2 dr^2 - dt^2 + ha^2 r^2 (dtheta^2 + sin^2 theta dphi^2)``, and the target metric is generated with
the h-v closing from a generating function scaled by the prime shell so that ``f = 1`` and the matching
shell source return the prime metric.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from dataclasses import field
from typing import TYPE_CHECKING

import numpy as np

from finsler_forge import jetcalc
from finsler_forge.ansatzgen.generators import generate_sol1
from finsler_forge.ansatzgen.recipes import SolutionRecipe
from finsler_forge.ansatzgen.recipes import Source
from finsler_forge.ansatzgen.recipes import value_of
from finsler_forge.jetcalc import SPECTRAL_NODES
from finsler_forge.jetcalc import ScalarField
from finsler_forge.nholon import DMetric
from finsler_forge.nholon import MetricBlocks
from finsler_forge.nholon import ShellBlocks

if TYPE_CHECKING:
    from collections.abc import Sequence

    from finsler_forge.ansatzgen.recipes import Coefficient
    from finsler_forge.ansatzgen.recipes import ConnectionKind
    from finsler_forge.jetcalc import Number

logger: logging.Logger = logging.getLogger(__name__)

COORDINATES: tuple[str, ...] = ("hr", "t", "htheta", "hphi")
SIGNS: tuple[int, int, int, int] = (1, -1, 1, 1)


def prime_4d(ha: Coefficient = 1.0) -> DMetric:
    """Diagonal prime metric with scale factor ``ha`` (a field of the four coordinates or a constant).

    Returns:
        The d-metric, N-coefficients zero.
    """

    def evaluate(point: Sequence[Number]) -> MetricBlocks:
        a: Number = value_of(ha, point)
        r, theta = point[0], point[2]
        s: Number = jetcalc.sin(theta)
        return MetricBlocks(
            g=np.array([[a * a, 0.0], [0.0, -1.0]], dtype=object),
            shells=(
                ShellBlocks(
                    h=np.array([[a * a * r * r, 0.0], [0.0, a * a * r * r * s * s]], dtype=object),
                    N=np.zeros((2, 2), dtype=object),
                ),
            ),
        )

    return DMetric(n=2, shell_dims=(2,), evaluate=evaluate, name="prime FLRW metric")


@dataclass(frozen=True)
class CosmoRecipe:
    """Polarization data of a four-dimensional cosmological deformation.

    ``f`` is the bare generating function; the generator works with ``ha r sin(theta) (f - f0)``. The
    shell source ``upsilon4`` and every coefficient are fields of ``(hr, t, htheta, hphi)`` or constants.
    """

    f: Coefficient = 1.0
    f0: Coefficient = 0.0
    psi: Coefficient = 0.0
    ha: Coefficient = 1.0
    h0: Coefficient = 1.0
    varsigma0: Coefficient = 1.0
    w0: tuple[Coefficient, Coefficient] = (0.0, 0.0)
    n0: tuple[Coefficient, Coefficient] = (0.0, 0.0)
    source: Source = field(default_factory=Source)
    v0: float = math.pi / 4.0
    """Base angle of the v-integrations; must keep ``sin`` away from zero."""

    @classmethod
    def identity(cls, v0: float = math.pi / 4.0) -> CosmoRecipe:
        """Recipe that reproduces the prime metric with ``ha = 1``.

        Returns:
            The recipe with ``f = 1``, ``Υ4 = -1/r^2`` and ``varsigma0 = 1/cos^2 v0``.
        """
        upsilon4: ScalarField = ScalarField(dim=4, fn=lambda p: -1.0 / (p[0] * p[0]), name="upsilon4")
        return cls(varsigma0=1.0 / math.cos(v0) ** 2, source=Source(upsilon4=upsilon4), v0=v0)

    def generating_function(self, point: Sequence[Number]) -> Number:
        """Scaled generating function ``ha r sin(theta) (f - f0)``.

        Returns:
            Its value at ``point``.
        """
        a: Number = value_of(self.ha, point)
        return a * point[0] * jetcalc.sin(point[2]) * (value_of(self.f, point) - value_of(self.f0, point))

    @property
    def solution(self) -> SolutionRecipe:
        """The recipe handed to the four-dimensional generator."""
        return SolutionRecipe(
            psi=self.psi,
            f=ScalarField(dim=4, fn=self.generating_function, name="f_scaled"),
            signs=SIGNS,
            h0=self.h0,
            varsigma0=self.varsigma0,
            w0=self.w0,
            n0=self.n0,
            source=self.source,
            v0=self.v0,
        )


def generate_4d_cosmo(
    recipe: CosmoRecipe,
    connection: ConnectionKind = "hv",
    nodes: int = SPECTRAL_NODES,
) -> DMetric:
    """Target metric of a cosmological deformation.

    Returns:
        The d-metric; ``polarizations`` recovers its ratios to ``prime_4d(recipe.ha)``.
    """
    generated: DMetric = generate_sol1(recipe.solution, connection=connection, nodes=nodes)
    logger.info("Generated 4-d cosmological deformation (v0=%g, %s closing)", recipe.v0, connection)
    return DMetric(n=2, shell_dims=(2,), evaluate=generated.evaluate, name="4-d cosmological deformation")


@dataclass(frozen=True)
class Polarizations:
    """Ratios of target to prime diagonal entries, with the target N-coefficients."""

    eta: tuple[float, float, float, float]
    """``(eta_r, eta_t, eta_theta, eta_phi)``."""

    w: tuple[float, float]
    n: tuple[float, float]


def polarizations(target: DMetric, prime: DMetric, point: Sequence[float]) -> Polarizations:
    """Polarization functions of ``target`` relative to ``prime`` at ``point``.

    Returns:
        The polarizations.
    """
    t: MetricBlocks = target.blocks(point)
    p: MetricBlocks = prime.blocks(point)
    top, base = t.shells[0], p.shells[0]
    ratios: list[float] = [
        jetcalc.primal(t.g[0, 0]) / jetcalc.primal(p.g[0, 0]),
        jetcalc.primal(t.g[1, 1]) / jetcalc.primal(p.g[1, 1]),
        jetcalc.primal(top.h[0, 0]) / jetcalc.primal(base.h[0, 0]),
        jetcalc.primal(top.h[1, 1]) / jetcalc.primal(base.h[1, 1]),
    ]
    return Polarizations(
        eta=(ratios[0], ratios[1], ratios[2], ratios[3]),
        w=(jetcalc.primal(top.N[0, 0]), jetcalc.primal(top.N[1, 0])),
        n=(jetcalc.primal(top.N[0, 1]), jetcalc.primal(top.N[1, 1])),
    )
