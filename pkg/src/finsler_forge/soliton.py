"""Line solitons of the three-dimensional KP-type equation and the solitonic fraction modulation.

The equation is ``xi_rr + eps (xi_t + 6 xi xi_theta + xi_thetathetatheta)_theta = 0`` in coordinates
``(t, theta, r)``.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from finsler_forge import jetcalc
from finsler_forge.cosmo import acceleration_test
from finsler_forge.exceptions import DispersionError
from finsler_forge.exceptions import InputError
from finsler_forge.exceptions import PreconditionError
from finsler_forge.jetcalc import ScalarField

logger: logging.Logger = logging.getLogger(__name__)

MAX_MODULATION: float = 0.1
GRID_SIZE: int = 21


@dataclass(frozen=True)
class SolitonParams:
    """Line-soliton data: ``xi = 2 kappa^2 sech^2(kappa theta + l r - omega t)``."""

    kappa: float
    l: float = 0.0  # noqa: E741
    eps_sign: int = 1
    """Sign of the dispersive term."""

    amplitude: float = 0.0
    """Deformation amplitude used when the soliton modulates a metric."""

    omega: float | None = None
    """Frequency; found from the dispersion relation when None."""

    def __post_init__(self) -> None:
        if self.kappa == 0:
            msg: str = "A line soliton needs kappa != 0"
            raise InputError(msg)
        if self.eps_sign not in {1, -1}:
            msg = f"eps_sign must be +1 or -1, got {self.eps_sign}"
            raise InputError(msg)


@dataclass(frozen=True)
class LineSoliton:
    """A solved line soliton."""

    params: SolitonParams
    omega: float
    residual: float
    """Largest equation residual on the check grid."""

    field: ScalarField
    """``xi(t, theta, r)``, dual-compatible."""

    def phase(self, t: np.ndarray, theta: np.ndarray, r: np.ndarray) -> np.ndarray:
        """Phase ``kappa theta + l r - omega t``.

        Returns:
            The phase array.
        """
        return self.params.kappa * theta + self.params.l * r - self.omega * t

    def __call__(self, t: np.ndarray, theta: np.ndarray, r: np.ndarray) -> np.ndarray:
        return 2.0 * self.params.kappa**2 / np.cosh(self.phase(t, theta, r)) ** 2


def _equation_residual(p: SolitonParams, omega: float, z: np.ndarray) -> np.ndarray:
    """Residual of the soliton equation as a function of the phase.

    With ``S = sech^2 z``: ``S' = -2 S tanh z``, ``S'' = 4S - 6S^2``, ``S''' = S'(4 - 12 S)`` and
    ``S'''' = 4S'' - 12(S'^2 + S S'')``.

    Returns:
        The residual array.
    """
    k: float = p.kappa
    s: np.ndarray = 1.0 / np.cosh(z) ** 2
    s1: np.ndarray = -2.0 * s * np.tanh(z)
    s2: np.ndarray = 4.0 * s - 6.0 * s * s
    s4: np.ndarray = 4.0 * s2 - 12.0 * (s1 * s1 + s * s2)
    a: float = 2.0 * k * k
    xi_rr: np.ndarray = a * p.l**2 * s2
    xi_t_theta: np.ndarray = -a * omega * k * s2
    nonlinear: np.ndarray = 6.0 * a * a * k * k * (s1 * s1 + s * s2)
    xi_4theta: np.ndarray = a * k**4 * s4
    return xi_rr + p.eps_sign * (xi_t_theta + nonlinear + xi_4theta)


def soliton_grid(p: SolitonParams, omega: float, size: int = GRID_SIZE) -> np.ndarray:
    """Phases of a ``size^3`` grid spanning one soliton width around the crest.

    Returns:
        The phase array, shape ``(size, size, size)``.
    """
    width: float = 2.0 / abs(p.kappa)
    t, theta, r = np.meshgrid(
        np.linspace(0.0, 1.0, size), np.linspace(-width, width, size), np.linspace(-1.0, 1.0, size), indexing="ij"
    )
    return p.kappa * theta + p.l * r - omega * t


def kp_line_soliton(p: SolitonParams) -> LineSoliton:
    """Solve the dispersion relation and certify the soliton on a grid.

    ``omega`` is the root of the residual at the crest, found by a secant iteration from the KdV value
    ``4 kappa^3``.

    Returns:
        The soliton with its residual.

    Raises:
        DispersionError: If no frequency makes the residual vanish.
    """
    crest: np.ndarray = np.zeros(1)
    omega: float
    if p.omega is not None:
        omega = p.omega
    else:
        guess: float = 4.0 * p.kappa**3
        try:
            omega = float(
                optimize.newton(lambda w: float(_equation_residual(p, w, crest)[0]), guess, x1=guess + 1.0, tol=1e-14)
            )
        except (RuntimeError, OverflowError) as e:
            msg: str = f"No frequency solves the dispersion relation for kappa={p.kappa}, l={p.l}: {e}"
            raise DispersionError(msg) from e
    if not math.isfinite(omega):
        msg = f"Dispersion relation gave a non-finite frequency for kappa={p.kappa}, l={p.l}"
        raise DispersionError(msg)

    residual: float = float(np.max(np.abs(_equation_residual(p, omega, soliton_grid(p, omega)))))
    logger.info("Line soliton kappa=%g l=%g: omega=%.12g, grid residual %.3g", p.kappa, p.l, omega, residual)

    def xi(point: list[jetcalc.Number]) -> jetcalc.Number:
        t, theta, r = point
        s: jetcalc.Number = jetcalc.sech(p.kappa * theta + p.l * r - omega * t)
        return 2.0 * p.kappa**2 * s * s

    return LineSoliton(params=p, omega=omega, residual=residual, field=ScalarField(dim=3, fn=xi, name="xi"))


def modulated_fraction(gamma: float, chi_star: float, varpi5_star: float, eps: float) -> float:
    """First-order solitonic modulation of the Hubble fraction.

    Returns:
        ``gamma + eps (chi* - varpi5*)``.

    Raises:
        PreconditionError: If ``|eps|`` exceeds the first-order range.
    """
    if abs(eps) > MAX_MODULATION:
        msg: str = f"Modulation amplitude {eps} is outside the first-order range |eps| <= {MAX_MODULATION}"
        raise PreconditionError(msg)
    return gamma + eps * (chi_star - varpi5_star)


def regime_flip(gamma: float, gamma_tilde: float) -> bool:
    """Return True when the modulation changes the acceleration state."""
    flipped: bool = acceleration_test(gamma) != acceleration_test(gamma_tilde)
    if flipped:
        logger.info("Modulation flips the acceleration state: gamma %.6g -> %.6g", gamma, gamma_tilde)
    return flipped
