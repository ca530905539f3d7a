"""Distortion of the Levi-Civita connection relative to the canonical d-connection."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from finsler_forge import jetcalc
from finsler_forge.connections.canonical import CanonicalConnection
from finsler_forge.connections.canonical import horizontal_by_vertical
from finsler_forge.connections.canonical import vertical_by_horizontal
from finsler_forge.nholon import metric_jet
from finsler_forge.nholon import settle

if TYPE_CHECKING:
    from collections.abc import Sequence

    from finsler_forge.jetcalc import Number
    from finsler_forge.nholon import DMetric
    from finsler_forge.nholon import SplitJet

logger: logging.Logger = logging.getLogger(__name__)

LC_TOLERANCE: float = 1e-8


@dataclass(frozen=True)
class DistortionTensor:
    """``∇ = D̂ + Ẑ`` split into the eight N-adapted families (upper, vector, direction)."""

    Z_a_jk: np.ndarray
    Z_i_bk: np.ndarray
    Z_a_bk: np.ndarray
    Z_i_kb: np.ndarray
    Z_i_jk: np.ndarray
    Z_a_jb: np.ndarray
    Z_a_bc: np.ndarray
    Z_i_ab: np.ndarray

    @property
    def n(self) -> int:
        """Horizontal dimension."""
        return self.Z_i_jk.shape[0]

    @property
    def m(self) -> int:
        """Vertical dimension."""
        return self.Z_a_bc.shape[0]

    def full(self) -> np.ndarray:
        """All families in one ``Z[γ, β, α]`` array.

        Returns:
            The ``dim x dim x dim`` array.
        """
        n, m = self.n, self.m
        out: np.ndarray = np.zeros((n + m, n + m, n + m), dtype=object)
        out[:n, :n, :n] = self.Z_i_jk
        out[n:, n:, n:] = self.Z_a_bc
        out[n:, n:, :n] = self.Z_a_bk
        out[n:, :n, :n] = self.Z_a_jk
        out[:n, n:, :n] = self.Z_i_bk
        out[:n, :n, n:] = self.Z_i_kb
        out[n:, :n, n:] = self.Z_a_jb
        out[:n, n:, n:] = self.Z_i_ab
        return settle(out)

    def max_abs(self) -> float:
        """Largest absolute component."""
        values: np.ndarray = jetcalc.to_float(self.full())
        return float(np.max(np.abs(values))) if values.size else 0.0


def _omega_lowered(jet: SplitJet) -> np.ndarray:
    # ½ g^ij Ω^a_jk h_ab as [i, k, b]
    omega: np.ndarray = jet.omega
    lowered: np.ndarray = np.transpose(omega, (1, 2, 0)) @ jet.h
    return np.tensordot(jet.ginv, lowered, axes=(1, 0)) * 0.5


def distortion_from(jet: SplitJet) -> DistortionTensor:
    """Distortion families from a metric jet.

    Returns:
        The distortion tensor.
    """
    n, m = jet.n, jet.m
    dgv: np.ndarray = jet.dg[:, :, n:]
    omega: np.ndarray = jet.omega
    # −½ h^ab ∂_b g_jk − ½ Ω^a_jk
    z_a_jk: np.ndarray = np.moveaxis(dgv @ jet.hinv.T, -1, 0) * -0.5 - omega * 0.5
    mixed: np.ndarray = _omega_lowered(jet)
    c_h: np.ndarray = horizontal_by_vertical(jet)
    # Ĉ^i_kb + ½ g^ij Ω^a_jk h_ab
    z_i_bk: np.ndarray = np.transpose(c_h + mixed, (0, 2, 1))
    z_i_kb: np.ndarray = mixed
    dNv: np.ndarray = jet.dN[:, :, n:]
    l_v: np.ndarray = vertical_by_horizontal(jet)
    # L̂^a_bj − ∂_b N_j^a, as [a, j, b]
    z_a_jb: np.ndarray = np.transpose(l_v, (0, 2, 1)) - np.transpose(dNv, (1, 0, 2))
    eh: np.ndarray = jet.e(jet.dh)[:, :, :n]
    hN: np.ndarray = np.transpose(np.tensordot(jet.h, dNv, axes=(0, 1)), (1, 0, 2))
    # hN[j, a, b] = h_ca ∂_b N_j^c
    bracket: np.ndarray = -np.transpose(eh, (2, 0, 1)) + hN + np.transpose(hN, (0, 2, 1))
    z_i_ab: np.ndarray = np.tensordot(jet.ginv, bracket, axes=(1, 0)) * 0.5
    return DistortionTensor(
        Z_a_jk=settle(z_a_jk),
        Z_i_bk=settle(z_i_bk),
        Z_a_bk=np.zeros((m, m, n)),
        Z_i_kb=settle(z_i_kb),
        Z_i_jk=np.zeros((n, n, n)),
        Z_a_jb=settle(z_a_jb),
        Z_a_bc=np.zeros((m, m, m)),
        Z_i_ab=settle(z_i_ab),
    )


def distortion_tensor(metric: DMetric, point: Sequence[Number]) -> DistortionTensor:
    """Distortion tensor of a d-metric at a point.

    The canonical families plus this tensor give the Levi-Civita connection of the assembled metric in the
    adapted frame. ``Z^i_jk``, ``Z^a_bc`` and ``Z^a_bk`` vanish identically.

    Returns:
        The distortion tensor.
    """
    return distortion_from(metric_jet(metric, point))


@dataclass(frozen=True)
class LCReport:
    """Outcome of checking the conditions under which the canonical connection is Levi-Civita."""

    max_lv_defect: float
    """Largest ``|L̂^c_aj − ∂_a N_j^c|``."""

    max_c_h: float
    """Largest ``|Ĉ^i_jb|``."""

    max_omega: float
    """Largest ``|Ω^a_ji|``."""

    points: int
    tolerance: float = LC_TOLERANCE

    @property
    def violated(self) -> tuple[str, ...]:
        """Names of the conditions above tolerance."""
        named: dict[str, float] = {
            "L_v - dN/dy": self.max_lv_defect,
            "C_h": self.max_c_h,
            "Omega": self.max_omega,
        }
        return tuple(name for name, value in named.items() if value >= self.tolerance)

    @property
    def extractable(self) -> bool:
        """Whether every condition holds."""
        return not self.violated


def check_lc_conditions(
    metric: DMetric,
    points: Sequence[Sequence[Number]],
    tolerance: float = LC_TOLERANCE,
) -> LCReport:
    """Evaluate ``L̂^c_aj − e_a N_j^c``, ``Ĉ^i_jb`` and ``Ω^a_ji`` over sample points.

    Returns:
        The report with maxima and the verdict.
    """
    worst: list[float] = [0.0, 0.0, 0.0]
    connection = CanonicalConnection()
    for point in points:
        jet: SplitJet = metric_jet(metric, point)
        coeffs = connection.coefficients(jet)
        defect: np.ndarray = jetcalc.to_float(coeffs.L_v - np.transpose(jet.dN[:, :, jet.n :], (1, 2, 0)))
        for slot, values in enumerate((defect, jetcalc.to_float(coeffs.C_h), jetcalc.to_float(jet.omega))):
            if values.size:
                worst[slot] = max(worst[slot], float(np.max(np.abs(values))))
    report = LCReport(
        max_lv_defect=worst[0],
        max_c_h=worst[1],
        max_omega=worst[2],
        points=len(points),
        tolerance=tolerance,
    )
    logger.info("LC conditions over %d points: %s", report.points, report.violated or "all satisfied")
    return report
