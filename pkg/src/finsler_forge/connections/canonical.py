"""The canonical d-connection."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from finsler_forge.connections.base import DConnection
from finsler_forge.connections.base import DConnectionCoeffs
from finsler_forge.connections.base import christoffel

if TYPE_CHECKING:
    from finsler_forge.nholon import SplitJet


def vertical_by_horizontal(jet: SplitJet) -> np.ndarray:
    """``L̂^a_bk = ∂_b N_k^a + ½ h^ac (e_k h_bc − h_dc ∂_b N_k^d − h_db ∂_c N_k^d)``.

    Returns:
        ``L_v[a, b, k]``.
    """
    n: int = jet.n
    dNv: np.ndarray = jet.dN[:, :, n:]
    eh: np.ndarray = jet.e(jet.dh)[:, :, :n]
    first: np.ndarray = np.transpose(np.transpose(dNv, (0, 2, 1)) @ jet.h, (1, 2, 0))
    second: np.ndarray = np.transpose(first, (1, 0, 2))
    bracket: np.ndarray = eh - first - second
    half: np.ndarray = np.transpose(np.transpose(bracket, (0, 2, 1)) @ jet.hinv.T, (2, 0, 1)) * 0.5
    return np.transpose(dNv, (1, 2, 0)) + half


def horizontal_by_vertical(jet: SplitJet) -> np.ndarray:
    """``Ĉ^i_jc = ½ g^ik ∂_c g_jk``.

    Returns:
        ``C_h[i, j, c]``.
    """
    dgv: np.ndarray = jet.dg[:, :, jet.n :]
    return np.transpose(np.transpose(dgv, (0, 2, 1)) @ jet.ginv.T, (2, 0, 1)) * 0.5


def horizontal(jet: SplitJet) -> np.ndarray:
    """``L̂^i_jk = ½ g^ir (e_k g_jr + e_j g_kr − e_r g_jk)``.

    Returns:
        ``L_h[i, j, k]``.
    """
    return christoffel(jet.ginv, jet.e(jet.dg)[:, :, : jet.n])


def vertical(jet: SplitJet) -> np.ndarray:
    """``Ĉ^a_bc = ½ h^ad (∂_c h_bd + ∂_b h_cd − ∂_d h_bc)``.

    Returns:
        ``C_v[a, b, c]``.
    """
    return christoffel(jet.hinv, jet.dh[:, :, jet.n :])


class CanonicalConnection(DConnection):
    """The unique metric-compatible d-connection with vanishing pure h- and v-torsion."""

    kind = "canonical"
    description = "Metric compatible; torsion only through the N-connection"

    def coefficients(self, jet: SplitJet) -> DConnectionCoeffs:
        """Compute the four families directly from the d-metric.

        Returns:
            The coefficient families.
        """
        return DConnectionCoeffs(
            L_h=horizontal(jet),
            L_v=vertical_by_horizontal(jet),
            C_h=horizontal_by_vertical(jet),
            C_v=vertical(jet),
            kind=self.kind,
        )
