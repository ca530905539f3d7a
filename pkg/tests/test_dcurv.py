import math

import numpy as np
import pytest

from finsler_forge import jetcalc
from finsler_forge.connections import CanonicalConnection
from finsler_forge.connections import canonical_dconnection
from finsler_forge.dcurv import coefficient_jet
from finsler_forge.dcurv import coordinate_einstein
from finsler_forge.dcurv import coordinate_ricci
from finsler_forge.dcurv import curvature_from
from finsler_forge.dcurv import curvature_pack
from finsler_forge.dcurv import dcurvature
from finsler_forge.dcurv import dtorsion
from finsler_forge.dcurv import frame_curvature_of
from finsler_forge.dcurv import ricci_dtensor
from finsler_forge.dcurv import scalar_and_einstein
from finsler_forge.nholon import DMetric
from finsler_forge.nholon import diagonal_rule
from finsler_forge.nholon import ncurvature
from finsler_forge.nholon import zero_rule
from tests.conftest import CURVED_POINT

SPHERE_POINT: list[float] = [0.8, 0.1, 0.4]


def test_canonical_torsion(curved: DMetric) -> None:
    """Test that pure h- and v-torsion vanish and ``T^a_ji`` is the N-curvature."""
    torsion = dtorsion(canonical_dconnection(curved, CURVED_POINT), curved.nconnection(), CURVED_POINT)
    assert np.max(np.abs(torsion.T_i_jk)) < 1e-14
    assert np.max(np.abs(torsion.T_a_bc)) < 1e-14
    assert np.allclose(torsion.T_a_ji, ncurvature(curved.nconnection(), CURVED_POINT))
    assert torsion.max_abs() > 0.0


def test_flat_metric_has_no_curvature() -> None:
    """Test that a constant d-metric with trivial N-connection is flat."""
    flat = DMetric.single(
        g=diagonal_rule([-1.0, 1.0]), h=diagonal_rule([1.0, 1.0]), N=zero_rule(2, 2), n=2, m=2, name="flat"
    )
    pack = curvature_pack(CanonicalConnection(), flat, [0.1, 0.2, 0.3, 0.4])
    assert pack.curvature.max_abs() == 0.0
    assert pack.scalar.sR == 0.0


def test_sphere_ricci(sphere: DMetric) -> None:
    """Test ``R_ij = g_ij`` on the unit sphere, ``R = 2`` and a vanishing horizontal Einstein block."""
    pack = curvature_pack(CanonicalConnection(), sphere, SPHERE_POINT)
    expected = np.diag([1.0, math.sin(0.8) ** 2])
    assert np.allclose(jetcalc.to_float(pack.ricci.R_ij), expected, atol=1e-13)
    assert pack.scalar.R == pytest.approx(2.0)
    assert pack.scalar.S == pytest.approx(0.0, abs=1e-14)
    assert pack.scalar.sR == pytest.approx(2.0)
    assert np.allclose(jetcalc.to_float(pack.einstein)[:2, :2], 0.0, atol=1e-13)
    assert jetcalc.to_float(pack.einstein)[2, 2] == pytest.approx(-1.0)


def test_stepwise_pipeline_matches_pack(sphere: DMetric) -> None:
    """Test curvature, Ricci contraction and the scalar step by step against the packed result."""
    curvature = dcurvature(CanonicalConnection().field(sphere), sphere.nconnection(), SPHERE_POINT)
    scalar = scalar_and_einstein(sphere, ricci_dtensor(curvature), SPHERE_POINT)
    pack = curvature_pack(CanonicalConnection(), sphere, SPHERE_POINT)
    assert jetcalc.primal(scalar.R) == pytest.approx(2.0)
    assert jetcalc.primal(scalar.sR) == pytest.approx(jetcalc.primal(pack.scalar.sR))
    assert np.allclose(jetcalc.to_float(scalar.E), jetcalc.to_float(pack.einstein), atol=1e-13)


def test_coordinate_oracle_agrees_on_holonomic_metric(sphere: DMetric) -> None:
    """Test that the d-curvature and the coordinate Ricci tensor coincide when the frame is holonomic."""
    pack = curvature_pack(CanonicalConnection(), sphere, SPHERE_POINT)
    oracle = jetcalc.to_float(coordinate_ricci(sphere, SPHERE_POINT))
    assert np.allclose(jetcalc.to_float(pack.ricci.full()), oracle, atol=1e-12)
    einstein = jetcalc.to_float(coordinate_einstein(sphere, SPHERE_POINT))
    assert np.allclose(einstein, jetcalc.to_float(pack.einstein), atol=1e-12)


def test_families_match_generic_frame_curvature(curved: DMetric) -> None:
    """Test the purely horizontal and purely vertical families against the all-index formula."""
    jet = coefficient_jet(CanonicalConnection().field(curved), curved.nconnection(), CURVED_POINT)
    families = curvature_from(jet)
    generic = jetcalc.to_float(frame_curvature_of(jet))
    assert np.allclose(jetcalc.to_float(families.R_i_hjk), generic[:2, :2, :2, :2], atol=1e-11)
    assert np.allclose(jetcalc.to_float(families.R_a_bcd), generic[2:, 2:, 2:, 2:], atol=1e-11)


def test_curvature_is_antisymmetric_in_its_last_pair(curved: DMetric) -> None:
    """Test ``R^i_hjk = −R^i_hkj`` and ``R^a_bcd = −R^a_bdc``."""
    pack = curvature_pack(CanonicalConnection(), curved, CURVED_POINT)
    r_h = jetcalc.to_float(pack.curvature.R_i_hjk)
    r_v = jetcalc.to_float(pack.curvature.R_a_bcd)
    assert np.allclose(r_h, -np.transpose(r_h, (0, 1, 3, 2)), atol=1e-13)
    assert np.allclose(r_v, -np.transpose(r_v, (0, 1, 3, 2)), atol=1e-13)


def test_ricci_contractions(curved: DMetric) -> None:
    """Test that the Ricci blocks are the documented traces and the scalar uses both inverses."""
    pack = curvature_pack(CanonicalConnection(), curved, CURVED_POINT)
    ricci = ricci_dtensor(pack.curvature)
    assert np.allclose(ricci.R_ij, np.einsum("kijk->ij", pack.curvature.R_i_hjk))
    assert np.allclose(ricci.R_ia, -np.einsum("kika->ia", pack.curvature.R_i_jka))
    assert ricci.full().shape == (4, 4)
    assert pack.scalar.sR == pytest.approx(pack.scalar.R + pack.scalar.S)
