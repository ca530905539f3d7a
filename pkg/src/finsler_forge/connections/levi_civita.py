"""Coordinate Levi-Civita connection and its components in the N-adapted frame."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from finsler_forge import jetcalc
from finsler_forge.connections.base import christoffel
from finsler_forge.nholon import DMetric
from finsler_forge.nholon import frames_from
from finsler_forge.nholon import metric_jet
from finsler_forge.nholon import settle

if TYPE_CHECKING:
    from collections.abc import Sequence

    from finsler_forge.jetcalc import Number
    from finsler_forge.nholon import FramePack
    from finsler_forge.nholon import MatrixRule


def levi_civita(full_metric: DMetric | MatrixRule, point: Sequence[Number]) -> np.ndarray:
    """Coordinate Christoffel symbols ``Γ[μ, ν, λ] = ½ g^μσ (∂_λ g_σν + ∂_ν g_σλ − ∂_σ g_νλ)``.

    Args:
        full_metric: A d-metric (assembled on the fly) or a rule returning the full matrix.
        point: Coordinates.

    Returns:
        The symbols, symmetric in the last two indices.

    Raises:
        SingularMatrixError: If the metric is singular at the point.
    """
    rule: MatrixRule = full_metric.full() if isinstance(full_metric, DMetric) else full_metric
    value, deriv = jetcalc.differentiate(rule, point)
    return settle(christoffel(jetcalc.invert_symmetric(value), deriv))


def frame_push(gamma: np.ndarray, N: np.ndarray, dN: np.ndarray) -> np.ndarray:
    """Express coordinate connection symbols in the N-adapted frame.

    ``Γ̃^γ_βα = e^γ_μ (e_α^λ ∂_λ e_β^μ + e_α^λ e_β^ν Γ^μ_νλ)``.

    Args:
        gamma: Coordinate symbols ``Γ[μ, ν, λ]``.
        N: N-connection coefficients ``N[i, a]``.
        dN: Their coordinate derivatives.

    Returns:
        ``Γ̃[γ, β, α]`` with ``∇_{e_α} e_β = Γ̃^γ_βα e_γ``.
    """
    n, m = N.shape
    frames: FramePack = frames_from(np.asarray(N, dtype=object))
    e: np.ndarray = np.asarray(frames.e_down, dtype=object)
    theta: np.ndarray = np.asarray(frames.e_up, dtype=object)
    de: np.ndarray = np.zeros((n + m, n + m, n + m), dtype=object)
    de[:n, n:, :] = -np.asarray(dN, dtype=object)
    inhomogeneous: np.ndarray = np.transpose(de @ e.T, (1, 0, 2))
    rotated: np.ndarray = np.transpose(np.transpose(np.asarray(gamma, dtype=object) @ e.T, (0, 2, 1)) @ e.T, (0, 2, 1))
    return settle(np.tensordot(theta, inhomogeneous + rotated, axes=(1, 0)))


def adapted_levi_civita(metric: DMetric, point: Sequence[Number]) -> np.ndarray:
    """Levi-Civita connection of the assembled metric in the adapted frame of the top split.

    Returns:
        ``Γ̃[γ, β, α]``.
    """
    jet = metric_jet(metric, point)
    return frame_push(levi_civita(metric, point), jet.N, jet.dN)
