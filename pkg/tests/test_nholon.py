import math

import numpy as np
import pytest

from finsler_forge import jetcalc
from finsler_forge.exceptions import InputError
from finsler_forge.jetcalc import ScalarField
from finsler_forge.nholon import DMetric
from finsler_forge.nholon import NConnection
from finsler_forge.nholon import adapted_frames
from finsler_forge.nholon import anholonomy_coeffs
from finsler_forge.nholon import assemble
from finsler_forge.nholon import assemble_offdiagonal
from finsler_forge.nholon import diagonal_rule
from finsler_forge.nholon import matrix_rule
from finsler_forge.nholon import metric_jet
from finsler_forge.nholon import nadapted_derivative
from finsler_forge.nholon import ncurvature
from finsler_forge.nholon import zero_rule

POINT: list[float] = [0.3, 0.5, 2.0]


@pytest.fixture
def twisted() -> NConnection:
    """N-connection on ``(x1, x2, y)`` with ``N_1 = y x2`` and ``N_2 = 0``.

    Returns:
        The N-connection.
    """
    return NConnection.from_fields([[ScalarField(dim=3, fn=lambda u: u[2] * u[1])], [None]], name="twist")


def constant_metric(n: int, shell_dims: list[int], diagonal: float = 1.0) -> DMetric:
    shells = [
        (diagonal_rule([diagonal] * m), zero_rule(n + sum(shell_dims[:k]), m)) for k, m in enumerate(shell_dims)
    ]
    return DMetric.from_rules(g=diagonal_rule([diagonal] * n), shells=shells, n=n, shell_dims=shell_dims)


def test_matrix_rule_mixes_fields_constants_and_zeros() -> None:
    """Test that a rule evaluates fields, keeps constants and fills ``None`` with zero."""
    rule = matrix_rule([[ScalarField(dim=2, fn=lambda u: u[0] * u[1]), 2.0], [None, 1]])
    assert np.array_equal(rule([3.0, 4.0]).astype(float), np.array([[12.0, 2.0], [0.0, 1.0]]))


def test_nconnection_checks_dimension(twisted: NConnection) -> None:
    """Test that coefficients are only evaluated on the total space."""
    assert twisted.dim == 3
    with pytest.raises(InputError, match="expects 3 coordinates"):
        twisted([0.0, 0.0])


def test_frame_and_coframe_are_dual(twisted: NConnection) -> None:
    """Test ``<e^α, e_β> = δ^α_β`` for the adapted frame."""
    frames = adapted_frames(twisted, POINT)
    assert frames.duality_defect() < 1e-15
    assert frames.e_down[0, 2] == pytest.approx(-1.0)
    assert frames.e_up[2, 0] == pytest.approx(1.0)


def test_ncurvature(twisted: NConnection) -> None:
    """Test ``Ω^a_12 = e_2 N_1 − e_1 N_2 = y`` and its antisymmetry."""
    omega = ncurvature(twisted, POINT)
    assert omega.shape == (1, 2, 2)
    assert omega[0, 0, 1] == pytest.approx(2.0)
    assert omega[0, 1, 0] == pytest.approx(-2.0)
    assert omega[0, 0, 0] == 0.0


def test_holonomic_connection_has_no_curvature() -> None:
    """Test that the trivial N-connection is integrable."""
    assert np.all(ncurvature(NConnection.zero(2, 2), [0.1, 0.2, 0.3, 0.4]) == 0.0)


def test_anholonomy_coefficients(twisted: NConnection) -> None:
    """Test ``[e_1, e_a] = ∂_a N_1^b e_b`` and the horizontal block."""
    anholonomy = anholonomy_coeffs(twisted, POINT)
    assert anholonomy.w[2, 0, 2] == pytest.approx(0.5)
    assert anholonomy.w[2, 2, 0] == pytest.approx(-0.5)
    assert anholonomy.omega[0, 0, 1] == pytest.approx(2.0)
    assert anholonomy.w[0].tolist() == np.zeros((3, 3)).tolist()


def test_nadapted_derivative(twisted: NConnection) -> None:
    """Test ``e_1 f = ∂_1 f − N_1 ∂_y f`` for ``f = y^2 + x1``."""
    fn = ScalarField(dim=3, fn=lambda u: u[2] * u[2] + u[0])
    assert jetcalc.primal(nadapted_derivative(fn, twisted, 0, POINT)) == pytest.approx(-3.0)
    assert jetcalc.primal(nadapted_derivative(fn, twisted, 2, POINT)) == pytest.approx(4.0)


def test_assemble_coordinate_metric() -> None:
    """Test the block form ``[[g + N h Nᵀ, N h], [h Nᵀ, h]]``."""
    full = assemble(np.array([[2.0]]), np.array([[3.0]]), np.array([[0.5]]))
    assert np.allclose(full.astype(float), [[2.75, 1.5], [1.5, 3.0]])


def test_assemble_offdiagonal_from_dmetric() -> None:
    """Test the assembled metric of a one-shell d-metric and of a diagonal three-shell one."""
    shell = (diagonal_rule([3.0]), matrix_rule([[0.5]]))
    metric = DMetric.from_rules(g=diagonal_rule([2.0]), shells=[shell], n=1, shell_dims=[1])
    assert np.allclose(assemble_offdiagonal(metric, [0.1, 0.2]).astype(float), [[2.75, 1.5], [1.5, 3.0]])
    layered = constant_metric(1, [1, 1, 1], diagonal=2.0)
    assert np.allclose(assemble_offdiagonal(layered, [0.0] * 4).astype(float), 2.0 * np.eye(4))


@pytest.mark.parametrize("shell_dims", [[], [1, 1, 1, 1]])
def test_shell_count_is_bounded(shell_dims: list[int]) -> None:
    """Test that a d-metric carries one to three shells."""
    with pytest.raises(InputError, match="one to three shells"):
        DMetric(n=2, shell_dims=tuple(shell_dims), evaluate=lambda _u: None)  # type: ignore[arg-type,return-value]


def test_blocks_check_dimension() -> None:
    """Test that a d-metric rejects points of the wrong length."""
    metric = constant_metric(2, [2])
    with pytest.raises(InputError, match="expects 4 coordinates"):
        metric.blocks([0.0, 0.0, 0.0])


def test_three_shells_split_and_flatten() -> None:
    """Test that lower shells fold into the horizontal block of the top split."""
    metric = constant_metric(2, [2, 2, 2], diagonal=2.0)
    assert metric.dim == 8
    assert metric.split_dims == (6, 2)

    g, h, N = metric.split([0.1] * 8)
    assert g.shape == (6, 6)
    assert h.shape == (2, 2)
    assert N.shape == (6, 2)

    flat = metric.flatten()
    assert flat.shell_dims == (2,)
    assert np.allclose(flat.full()([0.1] * 8).astype(float), 2.0 * np.eye(8))


def test_metric_jet_derivatives() -> None:
    """Test first derivatives and inverses of the top split."""
    g = matrix_rule([[ScalarField(dim=2, fn=lambda u: jetcalc.exp(u[0]))]])
    h = matrix_rule([[ScalarField(dim=2, fn=lambda u: 1.0 + u[1] * u[1])]])
    N = matrix_rule([[ScalarField(dim=2, fn=lambda u: u[0] * u[1])]])
    metric = DMetric.single(g=g, h=h, N=N, n=1, m=1)

    jet = metric_jet(metric, [0.2, 3.0])
    assert jetcalc.primal(jet.dg[0, 0, 0]) == pytest.approx(math.exp(0.2))
    assert jetcalc.primal(jet.dh[0, 0, 1]) == pytest.approx(6.0)
    assert jetcalc.primal(jet.dN[0, 0, 0]) == pytest.approx(3.0)
    assert jetcalc.primal(jet.hinv[0, 0]) == pytest.approx(0.1)
    assert jet.n == 1
    assert jet.m == 1
