import pytest

from finsler_forge import jetcalc
from finsler_forge.exceptions import InputError
from finsler_forge.exceptions import PreconditionError
from finsler_forge.soliton import SolitonParams
from finsler_forge.soliton import kp_line_soliton
from finsler_forge.soliton import modulated_fraction
from finsler_forge.soliton import regime_flip


@pytest.mark.parametrize(
    ("kappa", "ell", "eps_sign", "omega"),
    [
        (1.0, 0.0, 1, 4.0),
        (1.0, 0.0, -1, 4.0),
        (1.0, 1.0, 1, 5.0),
        (1.0, 1.0, -1, 3.0),
        (2.0, 1.0, 1, 32.5),
        (2.0, 1.0, -1, 31.5),
    ],
)
def test_dispersion_relation(kappa: float, ell: float, eps_sign: int, omega: float) -> None:
    """Test ``omega = 4 kappa^3 + eps l^2 / kappa`` and the grid certificate."""
    soliton = kp_line_soliton(SolitonParams(kappa=kappa, l=ell, eps_sign=eps_sign))
    assert soliton.omega == pytest.approx(omega, rel=1e-12)
    assert soliton.residual < 1e-6


def test_soliton_profile() -> None:
    """Test the crest height and that the field and the array form agree."""
    soliton = kp_line_soliton(SolitonParams(kappa=0.5, l=0.2))
    assert jetcalc.primal(soliton.field([0.0, 0.0, 0.0])) == pytest.approx(0.5)
    assert soliton(0.3, 0.7, -0.2) == pytest.approx(jetcalc.primal(soliton.field([0.3, 0.7, -0.2])))


def test_given_frequency_is_kept() -> None:
    """Test that an explicit omega skips the root search but is still certified."""
    soliton = kp_line_soliton(SolitonParams(kappa=1.0, omega=4.5))
    assert soliton.omega == 4.5
    assert soliton.residual > 1e-3


def test_soliton_params_validation() -> None:
    """Test the kappa and sign checks."""
    with pytest.raises(InputError, match="kappa != 0"):
        SolitonParams(kappa=0.0)
    with pytest.raises(InputError, match="eps_sign"):
        SolitonParams(kappa=1.0, eps_sign=0)


def test_modulated_fraction_flips_regime() -> None:
    """Test a modulation that pushes the fraction across the upper threshold."""
    gamma_tilde: float = modulated_fraction(2.55, 0.5, -0.5, 0.05)
    assert gamma_tilde == pytest.approx(2.6)
    assert regime_flip(2.55, gamma_tilde)
    assert not regime_flip(2.0, modulated_fraction(2.0, 0.5, -0.5, 0.05))


def test_modulation_amplitude_is_first_order() -> None:
    """Test the amplitude bound."""
    with pytest.raises(PreconditionError, match="first-order range"):
        modulated_fraction(1.0, 0.0, 0.0, 0.2)
