"""d-torsion, d-curvature, Ricci and Einstein d-tensors and nonmetricity.

Curvature arrays follow ``R[α, β, γ, δ] = R(e_δ, e_γ) e_β`` on the adapted frame, so every printed family
keeps its index order (``R_i_hjk[i, h, j, k]`` is ``R^i_hjk``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from finsler_forge import jetcalc
from finsler_forge.connections.base import DConnectionCoeffs
from finsler_forge.connections.levi_civita import levi_civita
from finsler_forge.nholon import DMetric
from finsler_forge.nholon import adapt
from finsler_forge.nholon import anholonomy_from
from finsler_forge.nholon import metric_jet
from finsler_forge.nholon import omega_from
from finsler_forge.nholon import settle

if TYPE_CHECKING:
    from collections.abc import Callable
    from collections.abc import Sequence

    from finsler_forge.connections.base import DConnection
    from finsler_forge.jetcalc import Number
    from finsler_forge.nholon import MatrixRule
    from finsler_forge.nholon import NConnection
    from finsler_forge.nholon import SplitJet

logger: logging.Logger = logging.getLogger(__name__)

type CoefficientField = Callable[[Sequence[Number]], DConnectionCoeffs]


def _max_abs(*arrays: np.ndarray) -> float:
    worst: float = 0.0
    for array in arrays:
        values: np.ndarray = jetcalc.to_float(array)
        if values.size:
            worst = max(worst, float(np.max(np.abs(values))))
    return worst


@dataclass(frozen=True)
class DTorsion:
    """The five torsion families."""

    T_i_jk: np.ndarray
    T_i_ja: np.ndarray
    T_a_ji: np.ndarray
    T_a_bi: np.ndarray
    T_a_bc: np.ndarray

    def max_abs(self) -> float:
        """Largest absolute component over every family."""
        return _max_abs(self.T_i_jk, self.T_i_ja, self.T_a_ji, self.T_a_bi, self.T_a_bc)


@dataclass(frozen=True)
class DCurvature:
    """The six curvature families."""

    R_i_hjk: np.ndarray
    R_a_bjk: np.ndarray
    R_i_jka: np.ndarray
    R_c_bka: np.ndarray
    R_i_jbc: np.ndarray
    R_a_bcd: np.ndarray

    def max_abs(self) -> float:
        """Largest absolute component over every family."""
        return _max_abs(self.R_i_hjk, self.R_a_bjk, self.R_i_jka, self.R_c_bka, self.R_i_jbc, self.R_a_bcd)


@dataclass(frozen=True)
class RicciBlocks:
    """Ricci d-tensor blocks, not symmetric in general."""

    R_ij: np.ndarray
    R_ia: np.ndarray
    R_ai: np.ndarray
    R_ab: np.ndarray

    def full(self) -> np.ndarray:
        """Assemble ``R_αβ`` on the adapted frame.

        Returns:
            The ``dim x dim`` array.
        """
        return settle(np.block([[self.R_ij, self.R_ia], [self.R_ai, self.R_ab]]))


@dataclass(frozen=True)
class ScalarEinstein:
    """Scalar curvature and Einstein d-tensor."""

    sR: float | Number
    """``g^{ij}R_ij + h^{ab}R_ab``."""

    R: float | Number
    """Horizontal part."""

    S: float | Number
    """Vertical part."""

    E: np.ndarray
    """``E_αβ = R_αβ − ½ g_αβ ˢR`` on the adapted frame."""


@dataclass(frozen=True)
class Nonmetricity:
    """``Q[γ, α, β] = D_γ g_αβ`` on the adapted frame."""

    Q: np.ndarray

    def max_norm(self) -> float:
        """Largest absolute component."""
        return _max_abs(self.Q)


@dataclass(frozen=True)
class CurvaturePack:
    """Everything the curvature pipeline produces at one point."""

    coefficients: DConnectionCoeffs
    torsion: DTorsion
    curvature: DCurvature
    ricci: RicciBlocks
    scalar: ScalarEinstein

    @property
    def einstein(self) -> np.ndarray:
        """Einstein d-tensor on the adapted frame."""
        return self.scalar.E


# Torsion


def torsion_from(coeffs: DConnectionCoeffs, N: np.ndarray, dN: np.ndarray) -> DTorsion:
    """Torsion families from coefficients and the N-connection jet.

    Returns:
        The torsion families.
    """
    n: int = coeffs.n
    omega: np.ndarray = omega_from(np.asarray(N, dtype=object), np.asarray(dN, dtype=object))
    fiber: np.ndarray = np.transpose(np.asarray(dN, dtype=object)[:, :, n:], (1, 2, 0))
    return DTorsion(
        T_i_jk=settle(coeffs.L_h - np.transpose(coeffs.L_h, (0, 2, 1))),
        T_i_ja=settle(np.array(coeffs.C_h, dtype=object, copy=True)),
        T_a_ji=settle(omega),
        T_a_bi=settle(fiber - coeffs.L_v),
        T_a_bc=settle(coeffs.C_v - np.transpose(coeffs.C_v, (0, 2, 1))),
    )


def dtorsion(coeffs: DConnectionCoeffs, N: NConnection, point: Sequence[Number]) -> DTorsion:
    """d-torsion: ``T^i_jk = L^i_jk − L^i_kj``, ``T^i_ja = C^i_ja``, ``T^a_ji = Ω^a_ji``,
    ``T^a_bi = ∂N_i^a/∂y^b − L^a_bi``, ``T^a_bc = C^a_bc − C^a_cb``.

    Returns:
        The torsion families.
    """  # noqa: D205
    value, deriv = jetcalc.differentiate(N, point)
    return torsion_from(coeffs, value, deriv)


# Curvature


@dataclass(frozen=True)
class CoefficientJet:
    """Connection coefficients and N-connection with first derivatives at one point."""

    coeffs: DConnectionCoeffs
    derivative: DConnectionCoeffs
    """N-adapted derivatives, direction on the trailing axis."""

    N: np.ndarray
    dN: np.ndarray


def coefficient_jet(conn: CoefficientField, N: NConnection, point: Sequence[Number]) -> CoefficientJet:
    """Differentiate connection coefficients and the N-connection in one pass.

    Returns:
        The jet.
    """
    layout: dict[str, object] = {}

    def packed(u: Sequence[Number]) -> np.ndarray:
        coeffs: DConnectionCoeffs = conn(u)
        layout.update(n=coeffs.n, m=coeffs.m, kind=coeffs.kind)
        return np.concatenate([coeffs.packed(), np.asarray(N(u), dtype=object).ravel()])

    value, deriv = jetcalc.differentiate(packed, point)
    n: int = layout["n"]  # type: ignore[assignment]
    m: int = layout["m"]  # type: ignore[assignment]
    kind: str = layout["kind"]  # type: ignore[assignment]
    split: int = value.size - n * m
    coefficient_N: np.ndarray = value[split:].reshape(n, m)
    return CoefficientJet(
        coeffs=DConnectionCoeffs.unpack(value[:split], n, m, kind),
        derivative=DConnectionCoeffs.unpack(adapt(deriv[:split], coefficient_N), n, m, kind),
        N=coefficient_N,
        dN=deriv[split:].reshape(n, m, len(point)),
    )


def mixed_torsion(jet: CoefficientJet) -> np.ndarray:
    """``P^b_ka = ∂_a N_k^b − L^b_ak`` as ``[b, k, a]``.

    Returns:
        The mixed torsion.
    """
    n: int = jet.coeffs.n
    fiber: np.ndarray = np.transpose(jet.dN[:, :, n:], (1, 0, 2))
    return fiber - np.transpose(jet.coeffs.L_v, (0, 2, 1))


def curvature_from(jet: CoefficientJet, *, repeated_torsion_index: bool = False) -> DCurvature:
    """The six d-curvature families from a coefficient jet.

    ``D_k C^i_ja = e_k C^i_ja + L^i_mk C^m_ja − L^m_jk C^i_ma − L^b_ak C^i_jb`` (and likewise for ``C^c_ba``).

    Args:
        jet: Coefficients with N-adapted derivatives.
        repeated_torsion_index: Contract ``C^c_bd T^c_ka`` with ``c`` repeated in the ``R^c_bka`` family.

    Returns:
        The curvature families.
    """
    c: DConnectionCoeffs = jet.coeffs
    d: DConnectionCoeffs = jet.derivative
    n: int = c.n
    Lh, Lv, Ch, Cv = c.L_h, c.L_v, c.C_h, c.C_v
    omega: np.ndarray = omega_from(jet.N, jet.dN)
    P: np.ndarray = mixed_torsion(jet)

    eLh: np.ndarray = d.L_h[..., :n]
    eLv: np.ndarray = d.L_v[..., :n]
    r_i_hjk: np.ndarray = (
        eLh
        - np.transpose(eLh, (0, 1, 3, 2))
        + np.einsum("mhj,imk->ihjk", Lh, Lh)
        - np.einsum("mhk,imj->ihjk", Lh, Lh)
        - np.einsum("iha,akj->ihjk", Ch, omega)
    )
    r_a_bjk: np.ndarray = (
        eLv
        - np.transpose(eLv, (0, 1, 3, 2))
        + np.einsum("cbj,ack->abjk", Lv, Lv)
        - np.einsum("cbk,acj->abjk", Lv, Lv)
        - np.einsum("abc,ckj->abjk", Cv, omega)
    )

    dk_ch: np.ndarray = (
        d.C_h[..., :n]
        + np.einsum("imk,mja->ijak", Lh, Ch)
        - np.einsum("mjk,ima->ijak", Lh, Ch)
        - np.einsum("bak,ijb->ijak", Lv, Ch)
    )
    r_i_jka: np.ndarray = (
        d.L_h[..., n:] - np.transpose(dk_ch, (0, 1, 3, 2)) + np.einsum("ijb,bka->ijka", Ch, P)
    )

    dk_cv: np.ndarray = (
        d.C_v[..., :n]
        + np.einsum("cdk,dba->cbak", Lv, Cv)
        - np.einsum("dbk,cda->cbak", Lv, Cv)
        - np.einsum("dak,cbd->cbak", Lv, Cv)
    )
    if repeated_torsion_index:
        logger.warning("R^c_bka uses the repeated-index torsion contraction")
        torsion_term: np.ndarray = np.einsum("cbd,cka->cbka", Cv, P)
    else:
        torsion_term = np.einsum("cbd,dka->cbka", Cv, P)
    r_c_bka: np.ndarray = d.L_v[..., n:] - np.transpose(dk_cv, (0, 1, 3, 2)) + torsion_term

    eCh: np.ndarray = d.C_h[..., n:]
    eCv: np.ndarray = d.C_v[..., n:]
    r_i_jbc: np.ndarray = (
        eCh
        - np.transpose(eCh, (0, 1, 3, 2))
        + np.einsum("hjb,ihc->ijbc", Ch, Ch)
        - np.einsum("hjc,ihb->ijbc", Ch, Ch)
    )
    r_a_bcd: np.ndarray = (
        eCv
        - np.transpose(eCv, (0, 1, 3, 2))
        + np.einsum("ebc,aed->abcd", Cv, Cv)
        - np.einsum("ebd,aec->abcd", Cv, Cv)
    )
    return DCurvature(
        R_i_hjk=settle(r_i_hjk),
        R_a_bjk=settle(r_a_bjk),
        R_i_jka=settle(r_i_jka),
        R_c_bka=settle(r_c_bka),
        R_i_jbc=settle(r_i_jbc),
        R_a_bcd=settle(r_a_bcd),
    )


def dcurvature(
    conn: CoefficientField,
    N: NConnection,
    point: Sequence[Number],
    *,
    repeated_torsion_index: bool = False,
) -> DCurvature:
    """d-curvature of a connection given as a coefficient field.

    Args:
        conn: Coefficients as a function of the point, e.g. ``get_connection(kind).field(metric)``.
        N: The N-connection of the same split.
        point: Where to evaluate.
        repeated_torsion_index: See ``curvature_from``.

    Returns:
        The curvature families.
    """
    return curvature_from(coefficient_jet(conn, N, point), repeated_torsion_index=repeated_torsion_index)


def frame_curvature(gamma: np.ndarray, d_gamma: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Curvature of any frame connection.

    ``R[α,β,γ,δ] = e_δ Γ^α_βγ − e_γ Γ^α_βδ + Γ^μ_βγ Γ^α_μδ − Γ^μ_βδ Γ^α_μγ − w^μ_δγ Γ^α_βμ``.

    Args:
        gamma: ``Γ[α, β, γ]`` with ``∇_{e_γ} e_β = Γ^α_βγ e_α``.
        d_gamma: Frame derivatives of ``gamma``, direction on the trailing axis.
        w: Anholonomy ``[e_α, e_β] = w^γ_αβ e_γ``.

    Returns:
        ``R[α, β, γ, δ]``.
    """
    return settle(
        d_gamma
        - np.transpose(d_gamma, (0, 1, 3, 2))
        + np.einsum("mbg,amd->abgd", gamma, gamma)
        - np.einsum("mbd,amg->abgd", gamma, gamma)
        - np.einsum("mdg,abm->abgd", w, gamma)
    )


def frame_curvature_of(jet: CoefficientJet) -> np.ndarray:
    """Generic curvature of the full d-connection in a coefficient jet.

    Returns:
        ``R[α, β, γ, δ]``.
    """
    w: np.ndarray = anholonomy_from(jet.N, jet.dN).w
    return frame_curvature(jet.coeffs.full(), jet.derivative.full(), w)


# Ricci, scalar, Einstein


def ricci_dtensor(curv: DCurvature) -> RicciBlocks:
    """Ricci blocks ``R_ij = R^k_ijk``, ``R_ia = −R^k_ika``, ``R_ai = R^b_aib``, ``R_ab = R^c_abc``.

    Returns:
        The Ricci blocks.
    """
    return RicciBlocks(
        R_ij=settle(np.einsum("kijk->ij", curv.R_i_hjk)),
        R_ia=settle(-np.einsum("kika->ia", curv.R_i_jka)),
        R_ai=settle(np.einsum("baib->ai", curv.R_c_bka)),
        R_ab=settle(np.einsum("cabc->ab", curv.R_a_bcd)),
    )


def scalar_and_einstein(metric: DMetric, ricci: RicciBlocks, point: Sequence[Number]) -> ScalarEinstein:
    """Scalar curvature ``ˢR = R + S`` and the Einstein d-tensor.

    Returns:
        The scalar parts and ``E_αβ``.
    """
    g, h, _ = metric.split(point)
    return einstein_from(g, h, ricci)


def einstein_from(g: np.ndarray, h: np.ndarray, ricci: RicciBlocks) -> ScalarEinstein:
    """Scalar curvature and Einstein d-tensor from evaluated blocks.

    Returns:
        The scalar parts and ``E_αβ``.
    """
    ginv: np.ndarray = jetcalc.invert_symmetric(g)
    hinv: np.ndarray = jetcalc.invert_symmetric(h)
    horizontal: Number = np.sum(ginv * ricci.R_ij)
    vertical: Number = np.sum(hinv * ricci.R_ab)
    total: Number = horizontal + vertical
    n, m = g.shape[0], h.shape[0]
    block: np.ndarray = np.zeros((n + m, n + m), dtype=object)
    block[:n, :n] = g
    block[n:, n:] = h
    return ScalarEinstein(sR=total, R=horizontal, S=vertical, E=settle(ricci.full() - block * (0.5 * total)))


def nonmetricity(conn: DConnectionCoeffs, metric: DMetric, point: Sequence[Number]) -> Nonmetricity:
    """``Q_γαβ = D_γ g_αβ`` for the block-diagonal adapted-frame metric.

    Returns:
        The nonmetricity components.
    """
    return nonmetricity_from(conn, metric_jet(metric, point))


def nonmetricity_from(conn: DConnectionCoeffs, jet: SplitJet) -> Nonmetricity:
    """Nonmetricity from coefficients and a metric jet.

    Returns:
        The nonmetricity components.
    """
    n, m = jet.n, jet.m
    dim: int = n + m
    block: np.ndarray = np.zeros((dim, dim), dtype=object)
    block[:n, :n] = jet.g
    block[n:, n:] = jet.h
    d_block: np.ndarray = np.zeros((dim, dim, dim), dtype=object)
    d_block[:n, :n] = jet.e(jet.dg)
    d_block[n:, n:] = jet.e(jet.dh)
    gamma: np.ndarray = conn.full()
    q: np.ndarray = (
        np.transpose(d_block, (2, 0, 1))
        - np.einsum("mag,mb->gab", gamma, block)
        - np.einsum("mbg,am->gab", gamma, block)
    )
    return Nonmetricity(Q=settle(q))


def curvature_pack(
    connection: DConnection,
    metric: DMetric,
    point: Sequence[Number],
    *,
    repeated_torsion_index: bool = False,
) -> CurvaturePack:
    """Run the whole pipeline for one connection and one point.

    Returns:
        Torsion, curvature, Ricci, scalar curvature and Einstein d-tensor.
    """
    jet: CoefficientJet = coefficient_jet(connection.field(metric), metric.nconnection(), point)
    curvature: DCurvature = curvature_from(jet, repeated_torsion_index=repeated_torsion_index)
    ricci: RicciBlocks = ricci_dtensor(curvature)
    g, h, _ = metric.split(point)
    return CurvaturePack(
        coefficients=jet.coeffs,
        torsion=torsion_from(jet.coeffs, jet.N, jet.dN),
        curvature=curvature,
        ricci=ricci,
        scalar=einstein_from(settle(np.asarray(g, dtype=object)), settle(np.asarray(h, dtype=object)), ricci),
    )


# Coordinate oracle


def coordinate_ricci(full_metric: DMetric | MatrixRule, point: Sequence[Number]) -> np.ndarray:
    """Coordinate Ricci tensor ``Ric(∂_γ, ∂_β)`` of a full metric.

    Returns:
        The symmetric ``dim x dim`` array.
    """
    value, deriv = jetcalc.differentiate(lambda u: levi_civita(full_metric, u), point)
    dim: int = len(point)
    riemann: np.ndarray = frame_curvature(value, deriv, np.zeros((dim, dim, dim)))
    return settle(np.einsum("dbgd->gb", riemann))


def coordinate_einstein(full_metric: DMetric | MatrixRule, point: Sequence[Number]) -> np.ndarray:
    """Coordinate Einstein tensor ``Ric − ½ g R`` of a full metric.

    Returns:
        The ``dim x dim`` array.
    """
    rule: MatrixRule = full_metric.full() if isinstance(full_metric, DMetric) else full_metric
    metric: np.ndarray = settle(np.asarray(rule(list(point)), dtype=object))
    ricci: np.ndarray = coordinate_ricci(rule, point)
    scalar: Number = np.sum(jetcalc.invert_symmetric(metric) * ricci)
    return settle(ricci - metric * (0.5 * scalar))
