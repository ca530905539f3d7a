import logging
import math

import numpy as np
import pytest

from finsler_forge.cosmo import CosmoParams
from finsler_forge.cosmo import CosmoState
from finsler_forge.cosmo import HubbleState
from finsler_forge.cosmo import Trajectory
from finsler_forge.cosmo import acceleration_quadratic
from finsler_forge.cosmo import acceleration_test
from finsler_forge.cosmo import classify_regime
from finsler_forge.cosmo import conserved_density
from finsler_forge.cosmo import critical_thresholds
from finsler_forge.cosmo import diag_friedmann_residuals
from finsler_forge.cosmo import expansion_rate_difference
from finsler_forge.cosmo import gamma_rhs
from finsler_forge.cosmo import hubble_rhs
from finsler_forge.cosmo import integrate_trajectory
from finsler_forge.cosmo import literal_regime_table
from finsler_forge.cosmo import sweep_regimes
from finsler_forge.exceptions import InputError
from finsler_forge.exceptions import PreconditionError


def test_thresholds_are_roots() -> None:
    """Test that the acceleration thresholds solve the quadratic and the fixed points stop the flow."""
    t = critical_thresholds()
    assert t.Hplus == pytest.approx(1.0 + math.sqrt(2.5))
    assert acceleration_quadratic(t.Hplus) == pytest.approx(0.0, abs=1e-14)
    assert acceleration_quadratic(t.Hminus) == pytest.approx(0.0, abs=1e-14)
    for fixed in (1.0, t.Hatt, t.Hrep):
        assert gamma_rhs(fixed, 1.0) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize(("gamma", "vH"), [(0.3, 1.0), (2.0, 0.5), (-1.2, 2.0)])
def test_gamma_rhs_factorization(gamma: float, vH: float) -> None:
    """Test the quotient-rule derivative against its factored form."""
    expected: float = -vH * (gamma - 1.0) * (gamma * gamma + 2.0 * gamma + 0.5)
    assert gamma_rhs(gamma, vH) == pytest.approx(expected)


def test_gamma_rhs_needs_vertical_rate() -> None:
    """Test that the fraction is undefined without vertical expansion."""
    with pytest.raises(PreconditionError, match="vH = 0"):
        gamma_rhs(1.0, 0.0)


def test_acceleration_test() -> None:
    """Test both sides of the acceleration thresholds."""
    assert acceleration_test(3.0) == "accelerating"
    assert acceleration_test(0.0) == "decelerating"
    assert acceleration_test(-1.0) == "accelerating"


@pytest.mark.parametrize(
    ("gamma0", "regime"),
    [
        (3.0, "accel_then_decel"),
        (2.0, "always_decel"),
        (0.0, "always_decel"),
        (-0.5, "decel_then_accel"),
        (-3.0, "always_accel"),
    ],
)
def test_classify_regime(gamma0: float, regime: str) -> None:
    """Test the acceleration history along the fraction flow."""
    assert classify_regime(gamma0) == regime


def test_literal_table_differs_from_flow() -> None:
    """Test the printed intervals, which overlap and leave one regime empty."""
    assert literal_regime_table(3.0) == ("accel_then_decel",)
    assert literal_regime_table(-0.5) == ("always_decel",)
    assert literal_regime_table(-3.0) == ("always_accel",)


def test_classify_needs_expansion() -> None:
    """Test the expanding v-space precondition."""
    with pytest.raises(PreconditionError, match="expanding"):
        classify_regime(1.0, vH0=-1.0)


def test_sweep_matches_serial_classification() -> None:
    """Test that a threaded sweep keeps input order."""
    gammas: list[float] = [-3.0, -0.5, 0.0, 2.0, 3.0]
    assert sweep_regimes(gammas, threads=3) == [classify_regime(g) for g in gammas]


def test_expansion_rate_difference() -> None:
    """Test the three matter cases and the unknown-case error."""
    h = HubbleState(hH=0.4, vH=1.0)
    assert expansion_rate_difference(h, 0.0, 0.0) == pytest.approx(0.6)
    assert expansion_rate_difference(h, 0.2, 0.2, "equal_omega") == pytest.approx(0.6)
    assert expansion_rate_difference(h, 1 / 3, 1 / 3, "radiation") == pytest.approx(0.8)
    with pytest.raises(InputError, match="Unknown expansion-rate case"):
        expansion_rate_difference(h, 0.0, 0.0, "dust")  # type: ignore[arg-type]


def test_conserved_density() -> None:
    """Test the power-law scaling and the positivity precondition."""
    assert conserved_density(2.0, 1.0, 0.0, 0.0, 3.0) == pytest.approx(3.0 / 16.0)
    assert conserved_density(1.0, 2.0, 0.0, 1 / 3, 1.0) == pytest.approx(2.0**-4)
    with pytest.raises(PreconditionError):
        conserved_density(0.0, 1.0, 0.0, 0.0, 1.0)


def test_state_and_params_validation() -> None:
    """Test that scale factors and the gravitational constant are positive."""
    with pytest.raises(InputError, match="Scale factors must be positive"):
        CosmoState(ha=0.0, va=1.0)
    with pytest.raises(InputError, match="G_bar must be positive"):
        CosmoParams(G_bar=0.0)
    with pytest.raises(InputError, match="finite"):
        CosmoParams(hk=math.inf)


def test_static_state_solves_vacuum_equations() -> None:
    """Test that a static flat state with no matter leaves every equation satisfied."""
    residuals = diag_friedmann_residuals(CosmoState(ha=1.0, va=1.0), 0.0, 0.0, CosmoParams(), 0.0, 0.0, 0.0)
    assert residuals == (0.0, 0.0, 0.0)


def test_hubble_trajectory() -> None:
    """Test sampling, the row layout and the initial fraction."""
    trajectory = integrate_trajectory(HubbleState(hH=1.2, vH=1.0), (0.0, 0.5), 0.01)
    assert trajectory.singular_at is None
    assert len(trajectory.t) == 51
    assert trajectory.t[-1] == pytest.approx(0.5)
    assert trajectory.gamma[0] == pytest.approx(1.2)
    rows = trajectory.rows()
    assert len(rows[0]) == 8
    assert rows[0][7] in {0, 1}
    assert np.all(trajectory.ha > 0)


def test_full_closure_starts_on_the_constraint() -> None:
    """Test that the default density puts the initial state on the constraint surface."""
    state = CosmoState(ha=1.0, va=1.0, ha_dot=0.3, va_dot=0.8)
    trajectory = integrate_trajectory(state, (0.0, 0.2), 0.01, CosmoParams(h_omega=0.1), closure="full")
    assert trajectory.constraint[0] == pytest.approx(0.0, abs=1e-12)
    assert trajectory.hH[0] == pytest.approx(0.3)


def test_trajectory_cut_at_singularity() -> None:
    """Test that a collapsing horizontal rate ends the trajectory early."""
    trajectory = integrate_trajectory(HubbleState(hH=-5.0, vH=1.0), (0.0, 5.0), 0.01)
    assert trajectory.singular_at is not None
    assert len(trajectory.t) < 501
    assert np.all(np.isfinite(trajectory.hH))


def test_trajectory_needs_positive_step() -> None:
    """Test span and step validation."""
    with pytest.raises(InputError, match="dt > 0"):
        integrate_trajectory(HubbleState(hH=1.0, vH=1.0), (0.0, 1.0), 0.0)
    with pytest.raises(InputError, match="dt > 0"):
        integrate_trajectory(HubbleState(hH=1.0, vH=1.0), (1.0, 1.0), 0.1)


@pytest.mark.parametrize("gamma", [-1.5, 0.4, 2.7])
def test_fraction_flow_follows_rate_flow(gamma: float) -> None:
    """Test that the quotient rule on the rate system reproduces the fraction equation."""
    vH: float = 0.8
    h_dot, v_dot = hubble_rhs(HubbleState(hH=gamma * vH, vH=vH))
    assert (h_dot - gamma * v_dot) / vH == pytest.approx(gamma_rhs(gamma, vH))


def test_fixed_fraction_is_preserved() -> None:
    """Test that equal rates keep the fraction at one and the v-space decelerating over a long span."""
    trajectory = integrate_trajectory(HubbleState(hH=1.0, vH=1.0), (0.0, 10.0), 1e-3)
    assert trajectory.singular_at is None
    assert np.max(np.abs(trajectory.gamma - 1.0)) < 1e-9
    assert not trajectory.accelerating.any()


@pytest.mark.parametrize(
    ("init", "closure", "params"),
    [
        (HubbleState(hH=1.0, vH=1.0), "hubble", CosmoParams()),
        (HubbleState(hH=0.4, vH=1.1), "hubble", CosmoParams()),
        (CosmoState(ha=1.0, va=1.0, ha_dot=0.3, va_dot=0.8), "full", CosmoParams()),
        (CosmoState(ha=1.0, va=1.2, ha_dot=0.0, va_dot=0.7), "full", CosmoParams(v_omega=1 / 3)),
    ],
)
def test_integrator_is_fourth_order(init: HubbleState | CosmoState, closure: str, params: CosmoParams) -> None:
    """Test the Richardson ratio of successive step halvings."""
    finals: list[float] = [
        float(integrate_trajectory(init, (0.0, 1.0), dt, params, closure=closure).vH[-1])  # type: ignore[arg-type]
        for dt in (0.02, 0.01, 0.005)
    ]
    ratio: float = (finals[0] - finals[1]) / (finals[1] - finals[2])
    assert 12.0 <= ratio <= 20.0


def test_exact_rate_decay_converges() -> None:
    """Test the equal-rate solution ``1 / (1 + 3.5 t)`` at two step sizes."""
    errors: list[float] = [
        abs(float(integrate_trajectory(HubbleState(hH=1.0, vH=1.0), (0.0, 1.0), dt).hH[-1]) - 1.0 / 4.5)
        for dt in (0.02, 0.01)
    ]
    assert 12.0 <= errors[0] / errors[1] <= 20.0


def test_dust_closure_conserves_density_scaling() -> None:
    """Test that ``rho ha^4 va^3`` stays fixed along a dust trajectory."""
    state = CosmoState(ha=1.0, va=1.0, ha_dot=0.3, va_dot=0.8)
    trajectory = integrate_trajectory(state, (0.0, 1.0), 1e-2, CosmoParams(), closure="full")
    assert trajectory.singular_at is None
    invariant = trajectory.rho * trajectory.ha**4 * trajectory.va**3
    assert np.max(np.abs(invariant / invariant[0] - 1.0)) < 1e-6


def test_full_closure_reports_constraint_drift(caplog: pytest.LogCaptureFixture) -> None:
    """Test that an evolving horizontal scale factor pulls the state off the density constraint."""
    state = CosmoState(ha=1.0, va=1.0, ha_dot=0.3, va_dot=0.8)
    with caplog.at_level(logging.WARNING, logger="finsler_forge.cosmo"):
        trajectory = integrate_trajectory(state, (0.0, 1.0), 1e-2, CosmoParams(h_omega=0.1), closure="full")
    assert trajectory.constraint[0] == pytest.approx(0.0, abs=1e-12)
    assert trajectory.max_constraint_drift > 1e-2
    assert trajectory.max_constraint_drift == pytest.approx(float(np.max(np.abs(trajectory.constraint))))
    assert "Density constraint drifted" in caplog.text


def _static_horizontal_residuals(trajectory: Trajectory, params: CosmoParams) -> np.ndarray:
    """Residuals of all three equations with ``ha_ddot = 0`` and ``va_ddot`` taken from the second one.

    Returns:
        One row of three residuals per sample.
    """
    g: float = math.pi * params.G_bar
    rows: list[tuple[float, float, float]] = []
    for ha, va, h_rate, v_rate, rho in zip(
        trajectory.ha, trajectory.va, trajectory.hH, trajectory.vH, trajectory.rho, strict=True
    ):
        state = CosmoState(ha=float(ha), va=float(va), ha_dot=float(h_rate * ha), va_dot=float(v_rate * va))
        x_h: float = h_rate**2 + params.hk / ha**2
        x_v: float = v_rate**2 + params.vk / va**2
        vp: float = params.v_omega * rho
        va_ddot: float = -va * (6.0 * x_h + x_v + 8.0 * g * vp) / 2.0
        rows.append(diag_friedmann_residuals(state, 0.0, va_ddot, params, rho, params.h_omega * rho, vp))
    return np.abs(np.array(rows))


@pytest.mark.parametrize("va_dot", [1.0, 0.5])
def test_radiation_third_equation_follows_from_the_first_two(va_dot: float) -> None:
    """Test that the horizontal equation holds once ``ha`` is constant and the other two are imposed."""
    params = CosmoParams(h_omega=0.0, v_omega=1 / 3)
    state = CosmoState(ha=1.0, va=1.0, ha_dot=0.0, va_dot=va_dot)
    trajectory = integrate_trajectory(state, (0.0, 2.0), 1e-2, params, closure="full")
    residuals = _static_horizontal_residuals(trajectory, params)
    assert np.max(residuals[:, 0]) < 1e-6
    assert np.max(residuals[:, 2]) < 1e-6


@pytest.mark.parametrize(("h_omega", "v_omega"), [(0.0, 1 / 3), (-0.5, 0.0)])
def test_constant_horizontal_scale_closures(h_omega: float, v_omega: float) -> None:
    """Test that radiation and negative horizontal pressure admit a constant ``ha``."""
    params = CosmoParams(h_omega=h_omega, v_omega=v_omega)
    trajectory = integrate_trajectory(CosmoState(ha=1.0, va=1.0, va_dot=1.0), (0.0, 1.0), 1e-3, params, closure="full")
    assert np.max(np.abs(trajectory.ha - 1.0)) < 1e-8
    assert trajectory.max_constraint_drift < 1e-8
    assert np.max(_static_horizontal_residuals(trajectory, params)) < 1e-8


def test_dust_has_no_constant_horizontal_scale() -> None:
    """Test that pressureless matter with positive density moves ``ha``."""
    trajectory = integrate_trajectory(CosmoState(ha=1.0, va=1.0, va_dot=1.0), (0.0, 1.0), 1e-2, closure="full")
    assert trajectory.ha[-1] - 1.0 > 1e-3


def test_radiation_constant_scale_is_stable() -> None:
    """Test that a perturbed horizontal scale factor stays put over a long radiation era."""
    delta: float = 1e-3
    params = CosmoParams(v_omega=1 / 3)
    state = CosmoState(ha=1.0 + delta, va=1.0 + delta, ha_dot=0.0, va_dot=1.0)
    trajectory = integrate_trajectory(state, (0.0, 10.0), 1e-2, params, closure="full")
    assert trajectory.singular_at is None
    assert np.max(np.abs(trajectory.ha / trajectory.ha[0] - 1.0)) < 10.0 * delta
    assert np.max(np.abs(trajectory.hH)) < 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_rate_difference_shrinks_as_volume_grows(seed: int) -> None:
    """Test that ``|beta|`` moves against the total volume for equal-omega matter."""
    rng = np.random.default_rng(seed)
    direction: float = 1.0 if seed % 2 == 0 else -1.0
    h_rate, v_rate = (direction * float(r) for r in rng.uniform(0.3, 1.0, size=2))
    trajectory = integrate_trajectory(HubbleState(hH=h_rate, vH=v_rate), (0.0, 0.1), 1e-3)
    assert trajectory.singular_at is None
    beta = np.array([
        expansion_rate_difference(HubbleState(hH=float(h), vH=float(v)), 0.0, 0.0, "equal_omega")
        for h, v in zip(trajectory.hH, trajectory.vH, strict=True)
    ])
    log_volume = 4.0 * np.log(trajectory.ha) + 3.0 * np.log(trajectory.va)
    assert np.array_equal(np.sign(np.diff(np.abs(beta))), -np.sign(np.diff(log_volume)))
    product = np.abs(beta) * np.exp(log_volume)
    assert np.max(np.abs(product / product[0] - 1.0)) < 1e-8
