"""Generating data for exact solutions and the residual report they are checked against."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from typing import TYPE_CHECKING
from typing import Literal

from finsler_forge import jetcalc
from finsler_forge.exceptions import InputError
from finsler_forge.jetcalc import ScalarField

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Mapping
    from collections.abc import Sequence

    from finsler_forge.jetcalc import Number

logger: logging.Logger = logging.getLogger(__name__)

type Coefficient = ScalarField | float
type ConnectionKind = Literal["canonical", "hv"]

CONNECTION_KINDS: tuple[ConnectionKind, ...] = ("canonical", "hv")
F_STAR_BOUND: float = 1e-6


def value_of(coefficient: Coefficient, point: Sequence[Number]) -> Number:
    """Evaluate a field or constant at a (possibly dual) point.

    Returns:
        The value.
    """
    if isinstance(coefficient, ScalarField):
        return coefficient(point)
    return float(coefficient)


def rule_of(coefficient: Coefficient) -> Callable[[Sequence[Number]], Number]:
    """Turn a coefficient into a function of the coordinate list.

    Returns:
        The evaluation rule.
    """
    return lambda point: value_of(coefficient, point)


def check_kind(kind: str) -> ConnectionKind:
    """Validate a connection kind for the separated systems.

    Returns:
        The kind.

    Raises:
        InputError: If the kind is not ``canonical`` or ``hv``.
    """
    if kind not in CONNECTION_KINDS:
        msg: str = f"Separated systems exist for {', '.join(CONNECTION_KINDS)}, not {kind!r}"
        raise InputError(msg)
    return kind  # type: ignore[return-value]


def check_sign(name: str, value: int) -> int:
    """Validate a signature flag.

    Returns:
        The flag.

    Raises:
        InputError: If the flag is not +1 or -1.
    """
    if value not in {1, -1}:
        msg: str = f"Signature flag {name} must be +1 or -1, got {value}"
        raise InputError(msg)
    return value


def conformal_source(
    psi: Coefficient, signs: tuple[int, int], point: Sequence[Number], *, printed: bool = False
) -> Number:
    """Source solved by a conformally flat base ``(eps1 e^psi, eps2 e^psi)``.

    The printed relation ``eps1 psi•• + eps2 psi'' = Υ2`` drops the conformal factor; the h-block
    equation holds with ``Υ2 = (eps1 psi•• + eps2 psi'') e^{-psi} / 2``. With ``printed`` the printed
    combination is returned.

    Returns:
        The source value at ``point``.
    """
    rule: Callable[[Sequence[Number]], Number] = rule_of(psi)
    laplace: Number = signs[0] * jetcalc.partial(rule, point, [0, 0]) + signs[1] * jetcalc.partial(rule, point, [1, 1])
    if printed:
        return laplace
    return 0.5 * jetcalc.exp(-value_of(psi, point)) * laplace


@dataclass(frozen=True)
class Source:
    """Diagonal source of a shell ansatz.

    Each value is shared by the two diagonal equations of its block, so one coefficient per block is
    enough: ``upsilon2`` for the base, ``upsilon4`` for the first shell and so on.
    """

    upsilon2: Coefficient = 0.0
    upsilon4: Coefficient = 0.0
    upsilon6: Coefficient = 0.0
    upsilon8: Coefficient = 0.0

    def base(self, point: Sequence[Number]) -> Number:
        """Source of the horizontal block.

        Returns:
            The value at ``point``.
        """
        return value_of(self.upsilon2, point)

    def shell(self, index: int) -> Coefficient:
        """Source coefficient of shell ``index`` (0 is the first v-shell).

        Returns:
            The coefficient.

        Raises:
            InputError: For an index outside 0..2.
        """
        coefficients: tuple[Coefficient, ...] = (self.upsilon4, self.upsilon6, self.upsilon8)
        if not 0 <= index < len(coefficients):
            msg: str = f"No source for shell {index}"
            raise InputError(msg)
        return coefficients[index]


@dataclass(frozen=True)
class ShellRecipe:
    """Generating data of one two-dimensional v-shell whose second coordinate is a Killing direction.

    ``w0``, ``n0`` and ``n1`` hold one entry per earlier coordinate; missing entries are zero.
    """

    f: Coefficient
    """Generating function; its derivative along the shell's first coordinate must not vanish."""

    source: Coefficient = 0.0
    f0: Coefficient = 0.0
    h0: Coefficient = 1.0
    varsigma0: Coefficient = 1.0
    w0: tuple[Coefficient, ...] = ()
    n0: tuple[Coefficient, ...] = ()
    n1: tuple[Coefficient, ...] = ()
    signs: tuple[int, int] = (1, 1)
    """Signature flags of the two shell coordinates."""

    def __post_init__(self) -> None:
        check_sign("eps_a", self.signs[0])
        check_sign("eps_b", self.signs[1])

    def w0_at(self, k: int) -> Coefficient:
        """Integration function of ``w_k``.

        Returns:
            The coefficient (zero when not given).
        """
        return self.w0[k] if k < len(self.w0) else 0.0

    def n0_at(self, k: int) -> Coefficient:
        """Integration function of ``n_k``.

        Returns:
            The coefficient (zero when not given).
        """
        return self.n0[k] if k < len(self.n0) else 0.0

    def n1_at(self, k: int) -> Coefficient:
        """Second integration function of ``n_k``, multiplying the v-integral.

        Returns:
            The coefficient (zero when not given).
        """
        return self.n1[k] if k < len(self.n1) else 0.0


@dataclass(frozen=True)
class SolutionRecipe:
    """Generating data of a four-dimensional separated solution.

    Coordinates are ``(x1, x2, v, y4)``; ``psi`` fixes the horizontal block, the remaining fields fix the
    single v-shell.
    """

    psi: Coefficient
    f: Coefficient
    signs: tuple[int, int, int, int] = (1, 1, 1, 1)
    f0: Coefficient = 0.0
    h0: Coefficient = 1.0
    varsigma0: Coefficient = 1.0
    w0: tuple[Coefficient, Coefficient] = (0.0, 0.0)
    n0: tuple[Coefficient, Coefficient] = (0.0, 0.0)
    n1: tuple[Coefficient, Coefficient] = (0.0, 0.0)
    source: Source = field(default_factory=Source)
    v0: float = 0.0
    """Base point of every v-integration."""

    printed_formulas: bool = False
    """Use the closing formulas exactly as printed instead of the ones solving the separated system."""

    def __post_init__(self) -> None:
        for name, value in zip(("eps1", "eps2", "eps3", "eps4"), self.signs, strict=True):
            check_sign(name, value)

    @property
    def shell(self) -> ShellRecipe:
        """The v-shell part of the recipe."""
        return ShellRecipe(
            f=self.f,
            source=self.source.upsilon4,
            f0=self.f0,
            h0=self.h0,
            varsigma0=self.varsigma0,
            w0=self.w0,
            n0=self.n0,
            n1=self.n1,
            signs=(self.signs[2], self.signs[3]),
        )

    def horizontal(self, point: Sequence[Number]) -> tuple[Number, Number]:
        """Diagonal h-block ``(eps1 e^psi, eps2 e^psi)``.

        Returns:
            The two entries.
        """
        scale: Number = jetcalc.exp(value_of(self.psi, point))
        return self.signs[0] * scale, self.signs[1] * scale

    def effective_source(self, point: Sequence[Number]) -> Number:
        """Horizontal source that ``psi`` actually solves for; see ``conformal_source``.

        Returns:
            The source value at ``point``.
        """
        return conformal_source(self.psi, (self.signs[0], self.signs[1]), point, printed=self.printed_formulas)

    def residual_source(self) -> Source:
        """Source to check the generated metric against, with the effective horizontal part.

        Returns:
            The source.
        """
        return replace(self.source, upsilon2=ScalarField(dim=4, fn=self.effective_source, name="upsilon2"))


@dataclass(frozen=True)
class ResidualReport:
    """Per-equation maxima of a residual scan."""

    maxima: Mapping[str, float]
    """Largest absolute residual of every equation."""

    argmax: Mapping[str, tuple[float, ...]]
    """Sample point where each maximum occurs."""

    samples: int

    @classmethod
    def collect(
        cls,
        points: Sequence[Sequence[float]],
        residuals: Sequence[Mapping[str, Number]],
    ) -> ResidualReport:
        """Reduce per-point residuals to per-equation maxima.

        Non-finite residuals are kept as ``inf`` so they fail every tolerance.

        Returns:
            The report.

        Raises:
            InputError: If no points were evaluated.
        """
        if not points:
            msg: str = "A residual scan needs at least one sample point"
            raise InputError(msg)
        maxima: dict[str, float] = {}
        argmax: dict[str, tuple[float, ...]] = {}
        for point, values in zip(points, residuals, strict=True):
            for name, value in values.items():
                size: float = abs(jetcalc.primal(value))
                if not math.isfinite(size):
                    size = math.inf
                if name not in maxima or size > maxima[name]:
                    maxima[name] = size
                    argmax[name] = tuple(float(p) for p in point)
        return cls(maxima=maxima, argmax=argmax, samples=len(points))

    @property
    def worst(self) -> tuple[str, float]:
        """Equation with the largest residual and its value."""
        name: str = max(self.maxima, key=lambda key: self.maxima[key])
        return name, self.maxima[name]

    def passed(self, tolerance: float) -> bool:
        """Return True when every equation is below ``tolerance``."""
        return all(value < tolerance for value in self.maxima.values())

    def violations(self, tolerance: float) -> list[str]:
        """Equations at or above ``tolerance``.

        Returns:
            Equation ids in report order.
        """
        return [name for name, value in self.maxima.items() if value >= tolerance]
