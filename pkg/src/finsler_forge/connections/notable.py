"""Berwald, Chern and Hashiguchi d-connections."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np

from finsler_forge.connections.base import DConnection
from finsler_forge.connections.base import DConnectionCoeffs
from finsler_forge.connections.base import identify
from finsler_forge.connections.canonical import horizontal
from finsler_forge.connections.cartan import vertical_cartan

if TYPE_CHECKING:
    from finsler_forge.nholon import SplitJet

logger: logging.Logger = logging.getLogger(__name__)


def fiber_gradient(jet: SplitJet) -> np.ndarray:
    """``∂N_k^a/∂y^b`` arranged as ``[a, b, k]``.

    Returns:
        The array.
    """
    return np.transpose(jet.dN[:, :, jet.n :], (1, 2, 0))


def _zeros(*shape: int) -> np.ndarray:
    return np.zeros(shape, dtype=object)


class BerwaldConnection(DConnection):
    """Berwald: ``L = ∂N/∂y`` on both families, no C."""

    kind = "berwald"
    description = "Built from the N-connection only; not metric compatible in general"
    tangent_bundle = True

    def coefficients(self, jet: SplitJet) -> DConnectionCoeffs:
        """Compute the coefficients.

        Returns:
            The coefficient families.
        """
        lower: np.ndarray = fiber_gradient(jet)
        n, m = jet.n, jet.m
        return DConnectionCoeffs(
            L_h=lower,
            L_v=identify(lower),
            C_h=_zeros(n, n, m),
            C_v=_zeros(m, m, m),
            kind=self.kind,
        )


class ChernConnection(DConnection):
    """Chern: the canonical horizontal family, no C."""

    kind = "chern"
    description = "Pure h- and v-torsion vanish; not metric compatible on y-dependent Hessians"
    tangent_bundle = True

    def coefficients(self, jet: SplitJet) -> DConnectionCoeffs:
        """Compute the coefficients.

        Returns:
            The coefficient families.
        """
        lower: np.ndarray = horizontal(jet)
        n, m = jet.n, jet.m
        return DConnectionCoeffs(
            L_h=lower,
            L_v=identify(lower),
            C_h=_zeros(n, n, m),
            C_v=_zeros(m, m, m),
            kind=self.kind,
        )


class HashiguchiConnection(DConnection):
    """Hashiguchi: ``L = ∂N/∂y`` with the Cartan C-coefficients of the v-block."""

    kind = "hashiguchi"
    description = "Berwald horizontal part with Cartan vertical part"
    tangent_bundle = True

    def __init__(self, *, repeated_index: bool = False) -> None:
        """Initialize the connection.

        Args:
            repeated_index: Use the repeated-index C combination instead of the symmetric one.
        """
        self.repeated_index: bool = repeated_index
        if repeated_index:
            logger.warning("Hashiguchi connection uses the repeated-index C combination")

    def coefficients(self, jet: SplitJet) -> DConnectionCoeffs:
        """Compute the coefficients.

        Returns:
            The coefficient families.
        """
        lower: np.ndarray = fiber_gradient(jet)
        upper: np.ndarray = vertical_cartan(jet.hinv, jet.dh[:, :, jet.n :], repeated=self.repeated_index)
        return DConnectionCoeffs(L_h=lower, L_v=identify(lower), C_h=identify(upper), C_v=upper, kind=self.kind)
