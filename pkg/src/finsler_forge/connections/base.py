"""Base class for distinguished connections."""

from __future__ import annotations

from abc import ABC
from abc import abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from finsler_forge.exceptions import ShapeError
from finsler_forge.nholon import metric_jet
from finsler_forge.nholon import settle

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Sequence

    from finsler_forge.jetcalc import Number
    from finsler_forge.nholon import DMetric
    from finsler_forge.nholon import SplitJet


@dataclass(frozen=True)
class DConnectionCoeffs:
    """The four N-adapted coefficient families of a d-connection at one point.

    Index order is (upper, vector, direction): ``D_{e_k} e_j = L_h[i, j, k] e_i``.
    """

    L_h: np.ndarray
    """``L^i_jk``, shape ``(n, n, n)``."""

    L_v: np.ndarray
    """``L^a_bk``, shape ``(m, m, n)``."""

    C_h: np.ndarray
    """``C^i_jc``, shape ``(n, n, m)``."""

    C_v: np.ndarray
    """``C^a_bc``, shape ``(m, m, m)``."""

    kind: str = "canonical"

    @property
    def n(self) -> int:
        """Horizontal dimension."""
        return self.L_h.shape[0]

    @property
    def m(self) -> int:
        """Vertical dimension."""
        return self.C_v.shape[0]

    def full(self) -> np.ndarray:
        """Coefficients ``Γ[γ, β, α]`` over the whole adapted frame; mixed h/v blocks vanish.

        Trailing axes (such as a derivative direction) are kept.

        Returns:
            The ``dim x dim x dim`` array.
        """
        n, m = self.n, self.m
        out: np.ndarray = np.zeros((n + m, n + m, n + m, *self.L_h.shape[3:]), dtype=object)
        out[:n, :n, :n] = self.L_h
        out[n:, n:, :n] = self.L_v
        out[:n, :n, n:] = self.C_h
        out[n:, n:, n:] = self.C_v
        return settle(out)

    def packed(self) -> np.ndarray:
        """All coefficients in one flat array, in field order.

        Returns:
            The flat object array.
        """
        return np.concatenate([np.asarray(a, dtype=object).ravel() for a in (self.L_h, self.L_v, self.C_h, self.C_v)])

    @classmethod
    def unpack(cls, flat: np.ndarray, n: int, m: int, kind: str) -> DConnectionCoeffs:
        """Rebuild from ``packed`` output; trailing axes (such as a derivative direction) are kept.

        Returns:
            The coefficient families.
        """
        shapes: list[tuple[int, int, int]] = [(n, n, n), (m, m, n), (n, n, m), (m, m, m)]
        tail: tuple[int, ...] = flat.shape[1:]
        parts: list[np.ndarray] = []
        offset: int = 0
        for shape in shapes:
            size: int = shape[0] * shape[1] * shape[2]
            parts.append(flat[offset : offset + size].reshape(*shape, *tail))
            offset += size
        return cls(L_h=parts[0], L_v=parts[1], C_h=parts[2], C_v=parts[3], kind=kind)


def christoffel(inverse: np.ndarray, derivative: np.ndarray) -> np.ndarray:
    """Christoffel-type combination ``½ inv^{ir} (D[j,r,k] + D[k,r,j] − D[j,k,r])``.

    ``D[j, r, k]`` is the derivative of the metric entry ``(j, r)`` along direction ``k``.

    Returns:
        ``Γ[i, j, k]``.
    """
    combined: np.ndarray = (
        np.transpose(derivative, (0, 2, 1)) + np.transpose(derivative, (2, 0, 1)) - derivative
    )
    return np.moveaxis(combined @ inverse.T, -1, 0) * 0.5


def identify(block: np.ndarray) -> np.ndarray:
    """Reuse a horizontal family for the vertical one under ``a = n + i``.

    Returns:
        A copy of the block.
    """
    return np.array(block, dtype=object, copy=True)


class DConnection(ABC):
    """Base class for every d-connection kind.

    Attributes:
        kind: Registry name of the connection.
        description: One-line summary.
        tangent_bundle: Whether the connection needs ``m = n`` (index identification).
    """

    kind: str = ""
    description: str = ""
    tangent_bundle: bool = False

    @abstractmethod
    def coefficients(self, jet: SplitJet) -> DConnectionCoeffs:
        """Compute the four families from the metric blocks and their first derivatives.

        Args:
            jet: Blocks of the top h/v split with inverses and derivatives.

        Returns:
            The coefficient families.
        """

    def __call__(self, metric: DMetric, point: Sequence[Number]) -> DConnectionCoeffs:
        """Evaluate the connection of a d-metric at a point.

        Returns:
            The coefficient families.

        Raises:
            ShapeError: If the connection needs ``m = n`` and the metric does not have it.
        """
        n, m = metric.split_dims
        if self.tangent_bundle and n != m:
            msg: str = f"The {self.kind} d-connection needs m = n, got n={n}, m={m}"
            raise ShapeError(msg)
        coeffs: DConnectionCoeffs = self.coefficients(metric_jet(metric, point))
        return DConnectionCoeffs(
            L_h=settle(coeffs.L_h),
            L_v=settle(coeffs.L_v),
            C_h=settle(coeffs.C_h),
            C_v=settle(coeffs.C_v),
            kind=self.kind,
        )

    def field(self, metric: DMetric) -> Callable[[Sequence[Number]], DConnectionCoeffs]:
        """Bind a metric so the coefficients can be evaluated (and differentiated) at any point.

        Returns:
            A callable from points to coefficient families.
        """
        return lambda point: self(metric, point)
