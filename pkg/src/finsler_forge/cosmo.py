"""Diagonal cosmology with separate horizontal and vertical scale factors.

The horizontal space carries velocity-type coordinates with scale factor ``ha`` and curvature ``hk``; the
vertical space is the observed three-space with ``va`` and ``vk``. ``hH`` and ``vH`` are the respective
Hubble rates and ``gamma = hH / vH`` their fraction.
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING
from typing import Literal

import numpy as np

from finsler_forge.exceptions import InputError
from finsler_forge.exceptions import PreconditionError
from finsler_forge.parallel import map_threads

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Sequence

logger: logging.Logger = logging.getLogger(__name__)

BLOW_UP: float = 1e12
CONSTRAINT_TOLERANCE: float = 1e-6
FIXED_POINT_TOLERANCE: float = 1e-9
FLOW_HORIZON: float = 20.0

type Closure = Literal["hubble", "full"]
type RateCase = Literal["general", "radiation", "equal_omega"]
type Regime = Literal["accel_then_decel", "always_decel", "decel_then_accel", "always_accel"]


@dataclass(frozen=True)
class CosmoParams:
    """Constants of the diagonal model."""

    hk: float = 0.0
    vk: float = 0.0
    h_omega: float = 0.0
    """Equation-of-state constant of the horizontal fluid, ``hp = h_omega * rho``."""

    v_omega: float = 0.0
    G_bar: float = 1.0
    """Gravitational constant of the total space."""

    eps1: int = 1

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.hk, self.vk, self.h_omega, self.v_omega, self.G_bar)):
            msg: str = "Cosmological constants must be finite"
            raise InputError(msg)
        if self.G_bar <= 0:
            msg = f"G_bar must be positive, got {self.G_bar}"
            raise InputError(msg)


@dataclass(frozen=True)
class CosmoState:
    """Scale factors and their time derivatives."""

    ha: float
    va: float
    ha_dot: float = 0.0
    va_dot: float = 0.0

    def __post_init__(self) -> None:
        if self.ha <= 0 or self.va <= 0:
            msg: str = f"Scale factors must be positive, got ha={self.ha}, va={self.va}"
            raise InputError(msg)

    @property
    def hubble(self) -> HubbleState:
        """Hubble rates of this state."""
        return HubbleState(hH=self.ha_dot / self.ha, vH=self.va_dot / self.va)


@dataclass(frozen=True)
class HubbleState:
    """Horizontal and vertical Hubble rates."""

    hH: float
    vH: float

    @property
    def gamma(self) -> float:
        """Fraction ``hH / vH``; ``nan`` when ``vH`` is zero."""
        return self.hH / self.vH if self.vH != 0 else math.nan


@dataclass(frozen=True)
class Thresholds:
    """Critical values of the fraction ``gamma``."""

    Hplus: float
    Hminus: float
    Hatt: float
    Hrep: float


def _curvature_terms(state: CosmoState, params: CosmoParams) -> tuple[float, float]:
    h_rate: float = state.ha_dot / state.ha
    v_rate: float = state.va_dot / state.va
    return h_rate**2 + params.hk / state.ha**2, v_rate**2 + params.vk / state.va**2


def diag_friedmann_residuals(
    state: CosmoState,
    ha_ddot: float,
    va_ddot: float,
    params: CosmoParams,
    rho: float,
    hp: float,
    vp: float,
) -> tuple[float, float, float]:
    """Left minus right side of the three diagonal field equations.

    Returns:
        The density constraint and the two second-order equations.
    """
    x_h, x_v = _curvature_terms(state, params)
    h_rate: float = state.ha_dot / state.ha
    v_rate: float = state.va_dot / state.va
    g: float = math.pi * params.G_bar
    first: float = 4.0 * v_rate * h_rate + 2.0 * x_h + x_v - 8.0 / 3.0 * g * rho
    second: float = 4.0 * ha_ddot / state.ha + 2.0 * va_ddot / state.va + 6.0 * x_h + x_v + 8.0 * g * vp
    third: float = ha_ddot / state.ha + va_ddot / state.va + 2.0 * x_h + x_v + 8.0 / 3.0 * g * hp
    return first, second, third


def conserved_density(ha: float, va: float, h_omega: float, v_omega: float, rho0: float) -> float:
    """Density scaling from the conservation law, normalised to ``rho0`` at ``ha = va = 1``.

    Returns:
        ``rho0 ha^{-4(1+h_omega)} va^{-3(1+v_omega)}``.

    Raises:
        PreconditionError: If a scale factor is not positive.
    """
    if ha <= 0 or va <= 0:
        msg: str = f"Scale factors must be positive, got ha={ha}, va={va}"
        raise PreconditionError(msg)
    return rho0 * ha ** (-4.0 * (1.0 + h_omega)) * va ** (-3.0 * (1.0 + v_omega))


def hubble_rhs(h: HubbleState) -> tuple[float, float]:
    """Time derivatives of the Hubble rates for flat, pressureless spaces.

    Returns:
        ``(hH_dot, vH_dot)``.
    """
    h_dot: float = 0.5 * h.vH**2 - h.vH * h.hH - 3.0 * h.hH**2
    v_dot: float = -2.5 * h.vH**2 - 2.0 * h.vH * h.hH + h.hH**2
    return h_dot, v_dot


def gamma_rhs(gamma: float, vH: float) -> float:
    """Time derivative of ``gamma = hH / vH`` by the quotient rule.

    Returns:
        ``gamma_dot``; it equals ``-vH (gamma - 1)(gamma^2 + 2 gamma + 1/2)``.

    Raises:
        PreconditionError: If ``vH`` is zero.
    """
    if vH == 0:
        msg: str = "The fraction hH/vH is undefined for vH = 0"
        raise PreconditionError(msg)
    h_dot, v_dot = hubble_rhs(HubbleState(hH=gamma * vH, vH=vH))
    return (h_dot - gamma * v_dot) / vH


def critical_thresholds() -> Thresholds:
    """Acceleration thresholds and the fixed points of the fraction flow.

    Returns:
        ``Hplus, Hminus = 1 ± sqrt(5/2)`` and ``Hatt, Hrep = -1 ± 1/sqrt(2)``.
    """
    root: float = math.sqrt(2.5)
    half: float = 1.0 / math.sqrt(2.0)
    return Thresholds(Hplus=1.0 + root, Hminus=1.0 - root, Hatt=-1.0 + half, Hrep=-1.0 - half)


def acceleration_quadratic(gamma: float) -> float:
    """``(vH_dot + vH^2) / vH^2`` as a function of ``gamma``; positive means the v-space accelerates.

    Returns:
        ``gamma^2 - 2 gamma - 3/2``.
    """
    return gamma * gamma - 2.0 * gamma - 1.5


def acceleration_test(gamma: float) -> Literal["accelerating", "decelerating"]:
    """Classify the vertical expansion at a given fraction.

    Returns:
        ``accelerating`` outside ``[Hminus, Hplus]``, ``decelerating`` inside.
    """
    return "accelerating" if acceleration_quadratic(gamma) > 0 else "decelerating"


def _flow(gamma: float) -> float:
    return -(gamma - 1.0) * (gamma * gamma + 2.0 * gamma + 0.5)


def _rk4_step(f: Callable[[np.ndarray], np.ndarray], y: np.ndarray, dt: float) -> np.ndarray:
    k1: np.ndarray = f(y)
    k2: np.ndarray = f(y + 0.5 * dt * k1)
    k3: np.ndarray = f(y + 0.5 * dt * k2)
    k4: np.ndarray = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def classify_regime(gamma0: float, vH0: float = 1.0) -> Regime:
    """Follow the fraction flow from ``gamma0`` and label its acceleration history.

    With ``tau`` defined by ``d tau = vH dt`` the flow ``d gamma / d tau`` is autonomous, so the history
    depends on ``gamma0`` only. Fixed points keep their constant regime.

    Returns:
        The regime label.

    Raises:
        PreconditionError: If ``vH0`` is not positive.
    """
    if vH0 <= 0:
        msg: str = f"Regime classification needs an expanding v-space, got vH0={vH0}"
        raise PreconditionError(msg)

    history: list[bool] = [acceleration_quadratic(gamma0) > 0]
    gamma: float = gamma0
    tau: float = 0.0
    while tau < FLOW_HORIZON and abs(_flow(gamma)) > FIXED_POINT_TOLERANCE:
        step: float = min(0.01, 0.1 / (1.0 + gamma * gamma))
        gamma = float(_rk4_step(lambda y: np.array([_flow(float(y[0]))]), np.array([gamma]), step)[0])
        tau += step
        accelerating: bool = acceleration_quadratic(gamma) > 0
        if accelerating != history[-1]:
            history.append(accelerating)

    logger.debug("gamma0=%g flows to %g with history %s", gamma0, gamma, history)
    if len(history) == 1:
        return "always_accel" if history[0] else "always_decel"
    return "accel_then_decel" if history[0] else "decel_then_accel"


def literal_regime_table(gamma0: float) -> tuple[Regime, ...]:
    """Regimes whose interval, read exactly as printed, contains ``gamma0``.

    The printed intervals overlap for ``Hrep < gamma0 < Hminus`` and the third one is empty, so the result
    may hold zero, one or two labels.

    Returns:
        The matching labels in table order.
    """
    t: Thresholds = critical_thresholds()
    rows: list[tuple[Regime, bool]] = [
        ("accel_then_decel", gamma0 > t.Hplus),
        ("always_decel", t.Hrep < gamma0 < t.Hplus),
        ("decel_then_accel", t.Hminus < gamma0 < t.Hrep),
        ("always_accel", gamma0 < t.Hminus),
    ]
    return tuple(label for label, matches in rows if matches)


def sweep_regimes(gammas: Sequence[float], threads: int = 1) -> list[Regime]:
    """Classify many initial fractions in worker threads.

    Returns:
        One label per initial fraction.
    """
    return map_threads(classify_regime, list(gammas), threads)


def expansion_rate_difference(h: HubbleState, h_omega: float, v_omega: float, case: RateCase = "general") -> float:
    """Difference of expansion rates that drives the total volume.

    Returns:
        ``beta`` for the requested matter case.

    Raises:
        InputError: For an unknown case.
    """
    match case:
        case "general":
            return (1.0 - 3.0 * v_omega + 2.0 * h_omega) * h.vH - (1.0 + 3.0 * v_omega - 4.0 * h_omega) * h.hH
        case "radiation":
            return 2.0 * h.hH
        case "equal_omega":
            return h.vH - h.hH
        case _:
            msg: str = f"Unknown expansion-rate case {case!r}"
            raise InputError(msg)


@dataclass(frozen=True)
class Trajectory:
    """Samples of an integrated trajectory; arrays share one time axis."""

    t: np.ndarray
    hH: np.ndarray
    vH: np.ndarray
    gamma: np.ndarray
    ha: np.ndarray
    va: np.ndarray
    rho: np.ndarray
    accelerating: np.ndarray
    constraint: np.ndarray
    """Density-constraint residual; only meaningful for the ``full`` closure."""

    singular_at: float | None = None
    """Last valid time before a finite-time blow-up, or None."""

    @property
    def max_constraint_drift(self) -> float:
        """Largest absolute density-constraint residual over the samples."""
        return float(np.max(np.abs(self.constraint)))

    def rows(self) -> list[tuple[float, ...]]:
        """Time-series rows ``t, hH, vH, gamma, ha, va, rho, accel_flag``.

        Returns:
            One tuple per sample.
        """
        return [
            (float(t), float(hh), float(vh), float(g), float(a), float(b), float(r), int(acc))
            for t, hh, vh, g, a, b, r, acc in zip(
                self.t, self.hH, self.vH, self.gamma, self.ha, self.va, self.rho, self.accelerating, strict=True
            )
        ]


def _full_rhs(params: CosmoParams, rho_of: Callable[[float, float], float]) -> Callable[[np.ndarray], np.ndarray]:
    g: float = math.pi * params.G_bar

    def rhs(y: np.ndarray) -> np.ndarray:
        ha, va, ha_dot, va_dot = (float(v) for v in y)
        x_h, x_v = _curvature_terms(CosmoState(ha=ha, va=va, ha_dot=ha_dot, va_dot=va_dot), params)
        rho: float = rho_of(ha, va)
        r2: float = -(6.0 * x_h + x_v + 8.0 * g * params.v_omega * rho)
        r3: float = -(2.0 * x_h + x_v + 8.0 / 3.0 * g * params.h_omega * rho)
        h_acc: float = (r2 - 2.0 * r3) / 2.0
        v_acc: float = r3 - h_acc
        return np.array([ha_dot, va_dot, h_acc * ha, v_acc * va])

    return rhs


def _rates(y: np.ndarray, closure: Closure) -> np.ndarray:
    return y[2:] / y[:2] if closure == "full" else y[:2]


def _hubble_rhs(y: np.ndarray) -> np.ndarray:
    h_dot, v_dot = hubble_rhs(HubbleState(hH=float(y[0]), vH=float(y[1])))
    return np.array([h_dot, v_dot, y[0] * y[2], y[1] * y[3]])


def integrate_trajectory(
    init: HubbleState | CosmoState,
    t_span: tuple[float, float],
    dt: float,
    params: CosmoParams | None = None,
    closure: Closure = "hubble",
    rho0: float | None = None,
) -> Trajectory:
    """Integrate the diagonal model with classical fixed-step RK4.

    Args:
        init: Initial rates (scale factors start at 1) or a full state.
        t_span: Start and end time.
        dt: Step size.
        params: Model constants.
        closure: ``hubble`` integrates the flat pressureless rate system; ``full`` integrates both scale
            factors with the two second-order equations and the conserved density.
        rho0: Density at ``ha = va = 1``; by default fixed by the density constraint at the start.

    Returns:
        The sampled trajectory, cut at the last finite state if the rates blow up. The full closure does not
        keep the density constraint when ``ha`` evolves; its largest excursion is ``max_constraint_drift``
        and a warning is logged above ``CONSTRAINT_TOLERANCE``.

    Raises:
        InputError: For a non-positive step or an empty span.
    """
    if dt <= 0 or t_span[1] <= t_span[0]:
        msg: str = f"Integration needs dt > 0 and t_end > t_start, got dt={dt}, span={t_span}"
        raise InputError(msg)
    params = params or CosmoParams()
    state: CosmoState = (
        init if isinstance(init, CosmoState) else CosmoState(ha=1.0, va=1.0, ha_dot=init.hH, va_dot=init.vH)
    )
    g: float = math.pi * params.G_bar
    if rho0 is None:
        x_h, x_v = _curvature_terms(state, params)
        rho_start: float = (4.0 * state.hubble.hH * state.hubble.vH + 2.0 * x_h + x_v) / (8.0 / 3.0 * g)
        rho0 = rho_start / conserved_density(state.ha, state.va, params.h_omega, params.v_omega, 1.0)

    def rho_of(ha: float, va: float) -> float:
        return conserved_density(ha, va, params.h_omega, params.v_omega, rho0)

    if closure == "full":
        rhs: Callable[[np.ndarray], np.ndarray] = _full_rhs(params, rho_of)
        y: np.ndarray = np.array([state.ha, state.va, state.ha_dot, state.va_dot])
    else:
        rhs = _hubble_rhs
        y = np.array([state.hubble.hH, state.hubble.vH, state.ha, state.va])

    def sample(y: np.ndarray) -> tuple[CosmoState, float, float]:
        if closure == "full":
            current: CosmoState = CosmoState(ha=y[0], va=y[1], ha_dot=y[2], va_dot=y[3])
            v_acc: float = rhs(y)[3] / y[1]
        else:
            current = CosmoState(ha=y[2], va=y[3], ha_dot=y[0] * y[2], va_dot=y[1] * y[3])
            v_acc = hubble_rhs(current.hubble)[1] + current.hubble.vH ** 2
        h: HubbleState = current.hubble
        x_h, x_v = _curvature_terms(current, params)
        constraint: float = 4.0 * h.hH * h.vH + 2.0 * x_h + x_v - 8.0 / 3.0 * g * rho_of(current.ha, current.va)
        return current, v_acc, constraint

    steps: int = round((t_span[1] - t_span[0]) / dt)
    samples: list[tuple[float, CosmoState, float, float]] = []
    singular_at: float | None = None
    t: float = t_span[0]
    for index in range(steps + 1):
        current, v_acc, constraint = sample(y)
        samples.append((t, current, v_acc, constraint))
        if index == steps:
            break
        nxt: np.ndarray = _rk4_step(rhs, y, dt)
        scale: np.ndarray = nxt[:2] if closure == "full" else nxt[2:]
        if not np.all(np.isfinite(nxt)) or np.any(scale <= 0) or np.any(np.abs(_rates(nxt, closure)) > BLOW_UP):
            singular_at = t
            logger.warning("Finite-time singularity after t=%g; trajectory cut there", t)
            break
        y = nxt
        t = t_span[0] + (index + 1) * dt

    drift: float = max(abs(s[3]) for s in samples)
    if closure == "full" and drift > CONSTRAINT_TOLERANCE:
        logger.warning("Density constraint drifted to %.3g (tolerance %g)", drift, CONSTRAINT_TOLERANCE)

    hubble: list[HubbleState] = [s[1].hubble for s in samples]
    return Trajectory(
        t=np.array([s[0] for s in samples]),
        hH=np.array([h.hH for h in hubble]),
        vH=np.array([h.vH for h in hubble]),
        gamma=np.array([h.gamma for h in hubble]),
        ha=np.array([s[1].ha for s in samples]),
        va=np.array([s[1].va for s in samples]),
        rho=np.array([rho_of(s[1].ha, s[1].va) for s in samples]),
        accelerating=np.array([s[2] > 0 for s in samples]),
        constraint=np.array([s[3] for s in samples]),
        singular_at=singular_at,
    )
