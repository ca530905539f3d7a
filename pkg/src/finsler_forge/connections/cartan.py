"""Cartan and h-v d-connections on tangent-bundle models."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from finsler_forge.connections.base import DConnection
from finsler_forge.connections.base import DConnectionCoeffs
from finsler_forge.connections.base import christoffel
from finsler_forge.connections.base import identify
from finsler_forge.connections.canonical import horizontal

if TYPE_CHECKING:
    from finsler_forge.nholon import SplitJet

logger: logging.Logger = logging.getLogger(__name__)


def christoffel_repeated(inverse: np.ndarray, derivative: np.ndarray) -> np.ndarray:
    """The combination with the second derivative taken along the same index as the first.

    ``½ inv^{ir} (D[j,r,k] + D[k,r,k] − D[j,k,r])``, no sum over the repeated ``k``.

    Returns:
        ``C[i, j, k]``.
    """
    size: int = derivative.shape[0]
    combined: np.ndarray = np.empty((size, size, size), dtype=object)
    for j in range(size):
        for k in range(size):
            for r in range(size):
                combined[j, k, r] = derivative[j, r, k] + derivative[k, r, k] - derivative[j, k, r]
    return np.moveaxis(combined @ inverse.T, -1, 0) * 0.5


def vertical_cartan(inverse: np.ndarray, derivative: np.ndarray, *, repeated: bool) -> np.ndarray:
    """Vertical Christoffel-type coefficients, symmetric by default.

    Returns:
        ``C[i, j, k]``.
    """
    if repeated:
        return christoffel_repeated(inverse, derivative)
    return christoffel(inverse, derivative)


class CartanConnection(DConnection):
    """The Cartan d-connection: both families from the h-block, identified onto the fiber."""

    kind = "cartan"
    description = "Metric compatible on Finsler lifts, torsion induced by the N-connection"
    tangent_bundle = True

    def __init__(self, *, repeated_index: bool = False) -> None:
        """Initialize the connection.

        Args:
            repeated_index: Use ``∂_c g_bd + ∂_c g_cd`` literally instead of the symmetric combination.
        """
        self.repeated_index: bool = repeated_index
        if repeated_index:
            logger.warning("Cartan connection uses the repeated-index C combination; it is not metric compatible")

    def coefficients(self, jet: SplitJet) -> DConnectionCoeffs:
        """``L^i_jk`` from ``e_k g`` and ``C^i_jk`` from ``∂_{y^k} g``, both on the h-block.

        Returns:
            The coefficient families.
        """
        lower: np.ndarray = horizontal(jet)
        upper: np.ndarray = vertical_cartan(jet.ginv, jet.dg[:, :, jet.n :], repeated=self.repeated_index)
        return DConnectionCoeffs(L_h=lower, L_v=identify(lower), C_h=upper, C_v=identify(upper), kind=self.kind)


class HVConnection(DConnection):
    """The h-v connection: ``L̃`` from the h-block, ``C̃`` from the v-block."""

    kind = "hv"
    description = "h-block Christoffels along e_k, v-block Christoffels along ∂_b"
    tangent_bundle = True

    def coefficients(self, jet: SplitJet) -> DConnectionCoeffs:
        """Compute ``L̃`` and ``C̃`` and identify them onto the other families.

        Returns:
            The coefficient families.
        """
        lower: np.ndarray = horizontal(jet)
        upper: np.ndarray = christoffel(jet.hinv, jet.dh[:, :, jet.n :])
        return DConnectionCoeffs(L_h=lower, L_v=identify(lower), C_h=identify(upper), C_v=upper, kind=self.kind)
