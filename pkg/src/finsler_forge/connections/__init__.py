"""Distinguished connections for finsler-forge."""

from __future__ import annotations

from typing import TYPE_CHECKING

from finsler_forge.connections.base import DConnection
from finsler_forge.connections.base import DConnectionCoeffs
from finsler_forge.connections.canonical import CanonicalConnection
from finsler_forge.connections.cartan import CartanConnection
from finsler_forge.connections.cartan import HVConnection
from finsler_forge.connections.distortion import DistortionTensor
from finsler_forge.connections.distortion import LCReport
from finsler_forge.connections.distortion import check_lc_conditions
from finsler_forge.connections.distortion import distortion_tensor
from finsler_forge.connections.levi_civita import adapted_levi_civita
from finsler_forge.connections.levi_civita import frame_push
from finsler_forge.connections.levi_civita import levi_civita
from finsler_forge.connections.notable import BerwaldConnection
from finsler_forge.connections.notable import ChernConnection
from finsler_forge.connections.notable import HashiguchiConnection
from finsler_forge.exceptions import InputError

if TYPE_CHECKING:
    from collections.abc import Sequence

    from finsler_forge.jetcalc import Number
    from finsler_forge.nholon import DMetric

__all__: list[str] = [
    "BerwaldConnection",
    "CanonicalConnection",
    "CartanConnection",
    "ChernConnection",
    "DConnection",
    "DConnectionCoeffs",
    "DistortionTensor",
    "HVConnection",
    "HashiguchiConnection",
    "LCReport",
    "adapted_levi_civita",
    "canonical_dconnection",
    "cartan_dconnection",
    "check_lc_conditions",
    "distortion_tensor",
    "frame_push",
    "get_connection",
    "hv_dconnection",
    "levi_civita",
    "notable_dconnection",
]

# Registry of connection kinds; the canonical connection is the default
_CONNECTIONS: dict[str, type[DConnection]] = {
    cls.kind: cls
    for cls in (
        CanonicalConnection,
        CartanConnection,
        HVConnection,
        BerwaldConnection,
        ChernConnection,
        HashiguchiConnection,
    )
}

NOTABLE_KINDS: frozenset[str] = frozenset({"berwald", "chern", "hashiguchi"})


def get_connection(kind: str = "canonical", *, repeated_index: bool = False) -> DConnection:
    """Get the connection registered under ``kind``.

    Args:
        kind: Registry name.
        repeated_index: Select the repeated-index C combination (cartan and hashiguchi only).

    Returns:
        A connection instance.

    Raises:
        InputError: If the kind is unknown.
    """
    try:
        cls: type[DConnection] = _CONNECTIONS[kind]
    except KeyError as e:
        msg: str = f"Unknown d-connection {kind!r}; known: {', '.join(sorted(_CONNECTIONS))}"
        raise InputError(msg) from e
    if cls in {CartanConnection, HashiguchiConnection}:
        return cls(repeated_index=repeated_index)  # type: ignore[call-arg]
    return cls()


def canonical_dconnection(metric: DMetric, point: Sequence[Number]) -> DConnectionCoeffs:
    """Canonical d-connection coefficients at a point.

    Returns:
        The coefficient families.
    """
    return CanonicalConnection()(metric, point)


def cartan_dconnection(metric: DMetric, point: Sequence[Number], *, repeated_index: bool = False) -> DConnectionCoeffs:
    """Cartan d-connection coefficients at a point.

    Returns:
        The coefficient families.
    """
    return CartanConnection(repeated_index=repeated_index)(metric, point)


def hv_dconnection(metric: DMetric, point: Sequence[Number]) -> DConnectionCoeffs:
    """h-v d-connection coefficients at a point.

    Returns:
        The coefficient families.
    """
    return HVConnection()(metric, point)


def notable_dconnection(kind: str, metric: DMetric, point: Sequence[Number]) -> DConnectionCoeffs:
    """Berwald, Chern or Hashiguchi coefficients at a point.

    Returns:
        The coefficient families.

    Raises:
        InputError: If ``kind`` is not one of the three.
    """
    if kind not in NOTABLE_KINDS:
        msg: str = f"Unknown notable d-connection {kind!r}; known: {', '.join(sorted(NOTABLE_KINDS))}"
        raise InputError(msg)
    return get_connection(kind)(metric, point)
