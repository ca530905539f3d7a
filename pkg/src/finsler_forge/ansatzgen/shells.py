"""One generated v-shell: its metric block from the generating function and its canonical N-coefficients.

A shell occupies coordinates ``(v, y)`` at positions ``base`` and ``base + 1``; ``y`` is a Killing
direction and every earlier coordinate plays the role of ``x``. The same kernel builds the single shell of
a four-dimensional solution and each shell of the eight-dimensional one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from finsler_forge import jetcalc
from finsler_forge.ansatzgen.recipes import F_STAR_BOUND
from finsler_forge.ansatzgen.recipes import rule_of
from finsler_forge.ansatzgen.recipes import value_of
from finsler_forge.exceptions import PreconditionError
from finsler_forge.jetcalc import SPECTRAL_NODES
from finsler_forge.nholon import ShellBlocks

if TYPE_CHECKING:
    from collections.abc import Sequence

    from finsler_forge.ansatzgen.recipes import Coefficient
    from finsler_forge.ansatzgen.recipes import ShellRecipe
    from finsler_forge.jetcalc import Number

logger: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VerticalShell:
    """Evaluator for a shell recipe placed at coordinate ``base``."""

    recipe: ShellRecipe
    base: int
    """Index of the shell's ``v`` coordinate; coordinates ``0..base-1`` are its ``x``."""

    v0: float = 0.0
    nodes: int = SPECTRAL_NODES
    printed: bool = False
    """Use the printed ``varsigma`` and closing formulas."""

    sigma_h0: Coefficient | None = None
    """Integration function used inside the ``varsigma`` integral when it differs from ``h0``."""

    def at(self, point: Sequence[Number], s: Number) -> list[Number]:
        """Copy of ``point`` with the shell's ``v`` replaced by ``s``.

        Returns:
            The shifted point.
        """
        shifted: list[Number] = list(point)
        shifted[self.base] = s
        return shifted

    def phi(self, point: Sequence[Number]) -> Number:
        """Return ``f - f0``."""
        return value_of(self.recipe.f, point) - value_of(self.recipe.f0, point)

    def f_star(self, point: Sequence[Number]) -> Number:
        """Derivative of the generating function along ``v``.

        Returns:
            The derivative.
        """
        return jetcalc.partial(rule_of(self.recipe.f), point, [self.base])

    def integrand(self, point: Sequence[Number]) -> Number:
        """Integrand ``Υ f* (f - f0)`` of the ``varsigma`` integral.

        Returns:
            Its value at ``point``.
        """
        return value_of(self.recipe.source, point) * self.f_star(point) * self.phi(point)

    def running(self, point: Sequence[Number]) -> Number:
        """The ``varsigma`` integral from ``v0`` to the point's ``v``.

        Returns:
            The integral, exact in every seeded direction of ``point``.
        """
        return jetcalc.spectral_integral(
            lambda s: self.integrand(self.at(point, s)), self.v0, point[self.base], self.nodes
        )

    def sigma(self, point: Sequence[Number], running: Number) -> Number:
        """The function ``varsigma`` given the running integral at ``point``.

        Returns:
            Its value.

        Raises:
            PreconditionError: If ``1/varsigma`` crosses zero on ``[v0, v]``.
        """
        h0: Number = value_of(self.sigma_h0 if self.sigma_h0 is not None else self.recipe.h0, point)
        start: Number = value_of(self.recipe.varsigma0, point)
        eps_a: int = self.recipe.signs[0]
        if self.printed:
            return start - eps_a / 8.0 * h0 * running
        inverse: Number = 1.0 / start + 2.0 * jetcalc.sign(start) * eps_a * h0 * running
        if jetcalc.sign(inverse) != jetcalc.sign(start) or jetcalc.primal(inverse) == 0:
            msg: str = f"varsigma changes sign between v0={self.v0} and v={jetcalc.primal(point[self.base])}"
            raise PreconditionError(msg)
        return 1.0 / inverse

    def h_pair(self, point: Sequence[Number], running: Number) -> tuple[Number, Number]:
        """Diagonal shell block ``(eps_a h0 f*^2 |varsigma|, eps_b (f - f0)^2)``.

        Returns:
            The two entries.

        Raises:
            PreconditionError: If ``|f*|`` is below the bound.
        """
        f_star: Number = self.f_star(point)
        if abs(jetcalc.primal(f_star)) < F_STAR_BOUND:
            coords: tuple[float, ...] = tuple(jetcalc.primal(p) for p in point)
            msg: str = f"|f*| = {abs(jetcalc.primal(f_star)):.3g} is below {F_STAR_BOUND} at {coords}"
            raise PreconditionError(msg)
        eps_a, eps_b = self.recipe.signs
        h0: Number = value_of(self.recipe.h0, point)
        sigma: Number = self.sigma(point, running)
        phi: Number = self.phi(point)
        return eps_a * h0 * f_star * f_star * jetcalc.dabs(sigma), eps_b * phi * phi

    def h_at(self, point: Sequence[Number]) -> tuple[Number, Number]:
        """Shell block at ``point``.

        Returns:
            The two diagonal entries.
        """
        return self.h_pair(point, self.running(point))

    def canonical_closing(self, point: Sequence[Number]) -> tuple[list[Number], list[Number]]:
        """N-coefficients solving the canonical mixed equations of this shell.

        ``w_k`` is algebraic; where the source vanishes the shell's bracket does too and ``w_k`` falls
        back to its integration function. ``n_k`` integrates ``|h_b|^{3/2} / |h_a|`` along ``v``.

        Returns:
            ``(w, n)`` with one entry per earlier coordinate.
        """
        size: int = self.base
        w: list[Number] = self._closing_w(point)
        integral: Number = self._closing_n_integral(point)
        n: list[Number] = [
            value_of(self.recipe.n0_at(k), point) + value_of(self.recipe.n1_at(k), point) * integral
            for k in range(size)
        ]
        return w, n

    def _closing_w(self, point: Sequence[Number]) -> list[Number]:
        fallback: list[Number] = [value_of(self.recipe.w0_at(k), point) for k in range(self.base)]
        if self.printed:
            slope: list[Number] = jetcalc.gradient(lambda p: self.sigma(p, self.running(p)), point)
            if jetcalc.primal(slope[self.base]) == 0:
                return fallback
            return [-slope[k] / slope[self.base] for k in range(self.base)]

        h_a, h_b = self.h_at(point)
        upsilon: Number = value_of(self.recipe.source, point)
        beta: Number = 2.0 * h_a * h_b * upsilon
        if jetcalc.primal(beta) == 0:
            logger.debug("Shell at %d has a zero source here, w takes its integration functions", self.base)
            return fallback

        def h_b_of(p: Sequence[Number]) -> Number:
            phi: Number = self.phi(p)
            return self.recipe.signs[1] * phi * phi

        grad_a: list[Number] = jetcalc.gradient(lambda p: self.h_at(p)[0], point)
        grad_b: list[Number] = jetcalc.gradient(h_b_of, point)
        hess_b: np.ndarray = jetcalc.hessian(h_b_of, point)
        v: int = self.base
        return [
            (hess_b[k, v] - grad_b[v] / 2.0 * (grad_a[k] / h_a + grad_b[k] / h_b)) / beta for k in range(self.base)
        ]

    def _closing_n_integral(self, point: Sequence[Number]) -> Number:
        samples: jetcalc.Profile = jetcalc.profile(
            lambda s: self.integrand(self.at(point, s)), self.v0, point[self.base], self.nodes
        )
        values: list[Number] = []
        for s, running in zip(samples.points, samples.running, strict=True):
            here: list[Number] = self.at(point, s)
            if self.printed:
                phi: Number = self.phi(here)
                if jetcalc.primal(phi) == 0:
                    msg: str = f"f - f0 vanishes at v={jetcalc.primal(s)}; move v0 off the zero"
                    raise PreconditionError(msg)
                f_star: Number = self.f_star(here)
                values.append(self.sigma(here, running) * f_star * f_star / (phi * phi * phi))
                continue
            h_a, h_b = self.h_pair(here, running)
            values.append(jetcalc.power(jetcalc.dabs(h_b), 1.5) / jetcalc.dabs(h_a))
        return jetcalc.cumulative(values, self.v0, point[self.base], self.nodes)[-1]

    def blocks(self, point: Sequence[Number]) -> ShellBlocks:
        """Shell block with canonical N-coefficients.

        Returns:
            ``h`` (2x2) and ``N`` (base x 2, columns ``w`` and ``n``).
        """
        h_a, h_b = self.h_at(point)
        w, n = self.canonical_closing(point)
        h: np.ndarray = np.array([[h_a, 0.0], [0.0, h_b]], dtype=object)
        N: np.ndarray = np.zeros((self.base, 2), dtype=object)
        for k in range(self.base):
            N[k, 0] = w[k]
            N[k, 1] = n[k]
        return ShellBlocks(h=h, N=N)
