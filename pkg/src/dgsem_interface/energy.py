"""Energy quantities of the discrete solution and of the interface traces.

Everything is evaluated in symmetrized variables ``U^s = S^-1 U`` using each
element's own symmetrizer. For a face with unit normal ``n`` pointing from
left to right and upwind flux ``F*``, the interface integrand of the discrete
energy rate is

    Q_N = U_R^s . S_R^-1 F* - U_L^s . S_L^-1 F*
          - 1/2 (U_R^s . A_R^s U_R^s - U_L^s . A_L^s U_L^s),

while the continuous-theory term ``Q`` is written with the outgoing traces
and the RH-solved incoming states. Their difference is the upwind
dissipation: ``Q_N = Q - R+/2 - R-/2``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .coupling import CouplingOperator, InterfaceTrace, build_coupling, build_trace
from .mesh import BOUNDARY
from .models import ModelKind, normal_eigenstructure, normal_matrix, symmetrizer
from .solver import DGSEM, FaceStates

MU_MARGIN = 1.0e-6

CSV_FIELDS = (
    "t",
    "E_L2",
    "E_discounted",
    "Q_int",
    "QN_int",
    "R_plus_min",
    "R_minus_min",
    "max_RH_violation",
)


@dataclass
class EnergyRecord:
    t: float
    E_L2: float
    E_discounted: float = math.nan
    Q_int: float = 0.0
    QN_int: float = 0.0
    R_plus_min: float = 0.0
    R_minus_min: float = 0.0
    max_RH_violation: float = 0.0
    # diagnostics that are not written to energy.csv
    max_inferred_excess: float = 0.0  # max over nodes of (Q_N - Q) / local scale
    max_decomposition_error: float = 0.0
    max_smooth_term: float = 0.0
    balance_residual: float = math.nan
    step: int = 0

    def csv_row(self) -> tuple:
        d = asdict(self)
        return tuple(d[k] for k in CSV_FIELDS)


# --------------------------------------------------------------- trace terms


def _sym_parts(tr: InterfaceTrace):
    op = tr.op
    s_l = symmetrizer(op.kind, op.m_left)[1]
    s_r = symmetrizer(op.kind, op.m_right)[1]
    return s_l, s_r


def continuous_Q(tr: InterfaceTrace) -> np.ndarray:
    """Continuous interface term evaluated on the discrete traces, per node."""
    el, er = tr.op.eig_left, tr.op.eig_right
    w_lp = tr.W_L[:, el.plus]
    w_rm = tr.W_R[:, er.minus]
    lam_lp, lam_rp = el.lam[el.plus], er.lam[er.plus]
    lam_lm, lam_rm = np.abs(el.lam[el.minus]), np.abs(er.lam[er.minus])
    q_plus = (lam_lp * w_lp**2).sum(-1) - (lam_rp * tr.W_star_plus**2).sum(-1)
    q_minus = (lam_rm * w_rm**2).sum(-1) - (lam_lm * tr.W_star_minus**2).sum(-1)
    return -0.5 * q_plus - 0.5 * q_minus


def discrete_QN(tr: InterfaceTrace) -> np.ndarray:
    """Jump form ``[[U^s]] . F^s* - 1/2 [[U^s . F^s]]`` per node."""
    op = tr.op
    s_l, s_r = _sym_parts(tr)
    a_l = normal_matrix(op.kind, op.m_left, op.normal)
    a_r = normal_matrix(op.kind, op.m_right, op.normal)
    us_l, us_r = tr.U_L @ s_l.T, tr.U_R @ s_r.T
    fs_l, fs_r = tr.F_star @ s_l.T, tr.F_star @ s_r.T
    own_l = (us_l * ((tr.U_L @ a_l.T) @ s_l.T)).sum(-1)
    own_r = (us_r * ((tr.U_R @ a_r.T) @ s_r.T)).sum(-1)
    return (us_r * fs_r).sum(-1) - (us_l * fs_l).sum(-1) - 0.5 * (own_r - own_l)


def dissipation_residuals(tr: InterfaceTrace) -> tuple[np.ndarray, np.ndarray]:
    """``(R+, R-)`` per node: squared distance of the traces from the RH states."""
    el, er = tr.op.eig_left, tr.op.eig_right
    r_plus = (er.lam[er.plus] * (tr.W_star_plus - tr.W_R[:, er.plus]) ** 2).sum(-1)
    r_minus = (np.abs(el.lam[el.minus]) * (tr.W_star_minus - tr.W_L[:, el.minus]) ** 2).sum(-1)
    return r_plus, r_minus


def local_scale(tr: InterfaceTrace) -> np.ndarray:
    """Magnitude of the quadratic forms at a node, for relative tolerances."""
    lam = max(np.abs(tr.op.eig_left.lam).max(), np.abs(tr.op.eig_right.lam).max())
    return lam * ((tr.W_L**2).sum(-1) + (tr.W_R**2).sum(-1)) + 1e-300


def scalar_QN_closed_form(a_l, a_r, u_l, u_r):
    """``Q(U_L) - (a_R U_R - a_L U_L)^2 / (2 a_R)`` for scalar advection."""
    q = -0.5 * a_l * (1.0 - a_l / a_r) * u_l**2
    return q - (a_r * u_r - a_l * u_l) ** 2 / (2.0 * a_r)


# ------------------------------------------------------------- field norms


def discrete_l2_energy(disc: DGSEM, u: np.ndarray) -> float:
    """``sum_k sum_nodes w J |S^-1 U|^2``."""
    return disc.inner(u, u)


def _downwind_mask(disc: DGSEM) -> np.ndarray:
    # builders put the leftmost region's material first
    return disc.material_ids != disc.material_ids[0]


def scalar_discounted_energy(disc: DGSEM, u: np.ndarray, alpha_c: float) -> float:
    """L2 energy with the downwind (right) material weighted by ``alpha_c``."""
    if disc.kind is not ModelKind.scalar_advection:
        raise ValueError("the alpha_c discounted norm is defined for scalar advection only")
    per = disc.inner(u, u, per_element=True)
    return float(np.where(_downwind_mask(disc), alpha_c * per, per).sum())


def scalar_epsilon_energy(disc: DGSEM, u: np.ndarray) -> float:
    """Energy of the recast equation ``(1/a) u_t + u_x = 0``: weights ``1/a``."""
    if disc.kind is not ModelKind.scalar_advection:
        raise ValueError("the epsilon-weighted norm is defined for scalar advection only")
    per = disc.inner(u, u, per_element=True)
    speeds = np.array([disc.mesh.materials[i].c for i in disc.material_ids])
    return float((per / speeds).sum())


@dataclass(frozen=True)
class MuDiscount:
    mu_plus: float
    mu_minus: float
    feasible: bool


def mu_discount_check(op: CouplingOperator, delta: float = MU_MARGIN) -> MuDiscount:
    """Weights making the interface term of the discounted norm non-positive.

    Requires ``lam_L+ - mu+ M+^2 lam_R+ > 0`` and ``mu- |lam_R-| - M-^2 |lam_L-| > 0``
    componentwise, which is only meaningful for a diagonal coupling matrix.
    """
    if not op.diag_flag:
        raise ValueError(
            "mu discounting needs a diagonal coupling matrix; this interface couples "
            "reflected and transmitted characteristics (impedance jump)"
        )
    el, er = op.eig_left, op.eig_right
    mp = np.diag(op.M_plus_bar)
    mm = np.diag(op.M_minus_bar)
    with np.errstate(divide="ignore", invalid="ignore"):
        plus = el.lam[el.plus] / (mp**2 * er.lam[er.plus])
        minus = mm**2 * np.abs(el.lam[el.minus]) / np.abs(er.lam[er.minus])
    feasible = bool(np.isfinite(plus).all() and np.isfinite(minus).all())
    mu_p = float(plus.min()) * (1 - delta) if plus.size else 1.0
    mu_m = float(minus.max()) * (1 + delta) if minus.size else 1.0
    if not feasible:
        return MuDiscount(math.nan, math.nan, False)
    return MuDiscount(mu_p, mu_m, True)


def mu_discounted_energy(disc: DGSEM, u: np.ndarray, mu_plus: float, mu_minus: float,
                         normal=None) -> float:
    """Energy with right-side characteristics weighted by ``mu+`` / ``mu-``.

    Left elements contribute ``|U^s|^2``; right elements contribute
    ``mu+ |W+|^2 + |W0|^2 + mu- |W-|^2`` with ``W = P^-1 U`` along ``normal``.
    """
    if normal is None:
        normal = (1.0,) + (0.0,) * (disc.dim - 1)
    per = disc.inner(u, u, per_element=True)
    right = _downwind_mask(disc)
    for k in np.nonzero(right)[0]:
        mat = disc.mesh.materials[disc.material_ids[k]]
        eig = normal_eigenstructure(disc.kind, mat, normal)
        w = np.einsum("ab,b...->a...", eig.P_inv, u[k]) ** 2
        weights = np.ones(eig.lam.size)
        weights[eig.plus] = mu_plus
        weights[eig.minus] = mu_minus
        quad = (np.einsum("a,a...->...", weights, w) * disc.quad_weights).sum()
        per[k] = disc.jacobian[k] * quad
    return float(per.sum())


# -------------------------------------------------------------- face terms


@dataclass
class InterfaceSample:
    """Per-node interface diagnostics, flattened over all interface faces."""

    Q: np.ndarray
    QN: np.ndarray
    R_plus: np.ndarray
    R_minus: np.ndarray
    rh_violation: np.ndarray
    weights: np.ndarray  # surface quadrature weight times |Ja|
    scale: np.ndarray

    @classmethod
    def empty(cls):
        z = np.zeros(0)
        return cls(z, z, z, z, z, z, z)


def _nodes(arr: np.ndarray) -> np.ndarray:
    """(nf, m, nfn) -> (nf * nfn, m)."""
    return np.moveaxis(arr, 1, -1).reshape(-1, arr.shape[1])


def interface_samples(disc: DGSEM, states: list[FaceStates]) -> InterfaceSample:
    parts = []
    for g, fs in zip(disc.groups, states):
        idx = np.nonzero(g.is_interface)[0]
        if idx.size == 0:
            continue
        pairs = {(int(a), int(b)) for a, b in zip(g.mat_left[idx], g.mat_right[idx])}
        for a, b in sorted(pairs):
            sel = idx[(g.mat_left[idx] == a) & (g.mat_right[idx] == b)]
            mats = disc.mesh.materials
            op = build_coupling(disc.kind, mats[a], mats[b], g.normal)
            u_l, u_r = _nodes(fs.u_left[sel]), _nodes(fs.u_right[sel])
            tr = build_trace(op, u_l, u_r)
            q, qn = continuous_Q(tr), discrete_QN(tr)
            rp, rm = dissipation_residuals(tr)
            a_l = normal_matrix(disc.kind, mats[a], g.normal)
            a_r = normal_matrix(disc.kind, mats[b], g.normal)
            rh = np.linalg.norm(u_l @ a_l.T - u_r @ a_r.T, axis=-1)
            w = (g.scale[sel][:, None] * disc.face_weights[None, :]).ravel()
            parts.append(InterfaceSample(q, qn, rp, rm, rh, w, local_scale(tr)))
    if not parts:
        return InterfaceSample.empty()
    return InterfaceSample(*(np.concatenate(arrs) for arrs in zip(*(
        (p.Q, p.QN, p.R_plus, p.R_minus, p.rh_violation, p.weights, p.scale) for p in parts))))


@dataclass
class FaceEnergy:
    """Surface contributions to ``sum_k <J U_t, U>`` (symmetrized inner product).

    ``boundary`` is the physical-boundary term with the sign it has in the
    energy rate, so a dissipative boundary gives a non-positive value.
    """

    interface: float
    smooth: float
    boundary: float
    smooth_max: float  # largest nodal smooth-face integrand

    @property
    def total(self) -> float:
        return self.interface + self.smooth + self.boundary


def _side_terms(disc: DGSEM, u: np.ndarray, f: np.ndarray, mat_ids: np.ndarray, axis: int):
    """``U . G F - 1/2 U . G A U`` per face node, ``G = S^-T S^-1``."""
    s_inv = disc.s_inv_by_material[mat_ids]
    a = np.array([disc.coeff[i][axis] for i in mat_ids])
    us = np.einsum("fab,fbn->fan", s_inv, u)
    fs = np.einsum("fab,fbn->fan", s_inv, f)
    aus = np.einsum("fab,fbn->fan", s_inv, np.einsum("fab,fbn->fan", a, u))
    return (us * fs).sum(1) - 0.5 * (us * aus).sum(1)


def face_energy_terms(disc: DGSEM, states: list[FaceStates]) -> FaceEnergy:
    interface = smooth = boundary = 0.0
    smooth_max = -math.inf
    for g, fs in zip(disc.groups, states):
        w = g.scale[:, None] * disc.face_weights[None, :]
        has_l = g.left != BOUNDARY
        has_r = g.right != BOUNDARY
        right = np.zeros(w.shape)
        left = np.zeros(w.shape)
        right[has_r] = _side_terms(disc, fs.u_right[has_r], fs.flux[has_r], g.mat_right[has_r], g.axis)
        left[has_l] = _side_terms(disc, fs.u_left[has_l], fs.flux[has_l], g.mat_left[has_l], g.axis)
        integrand = right - left
        inner = has_l & has_r
        ifc = g.is_interface
        sm = inner & ~ifc
        interface += float((w[ifc] * integrand[ifc]).sum())
        smooth += float((w[sm] * integrand[sm]).sum())
        boundary += float((w[~inner] * integrand[~inner]).sum())
        if sm.any():
            smooth_max = max(smooth_max, float(integrand[sm].max()))
    return FaceEnergy(interface, smooth, boundary, smooth_max if smooth_max > -math.inf else 0.0)


@dataclass
class EnergyBalance:
    volume_rate: float  # sum_k <J S^-1 U_t, S^-1 U>_N
    faces: FaceEnergy
    residual: float  # |volume_rate - faces.total|
    scale: float

    @property
    def relative(self) -> float:
        return self.residual / self.scale


def energy_balance(disc: DGSEM, u: np.ndarray, t: float) -> EnergyBalance:
    states = disc.face_states(u, t)
    rate = disc.inner(disc.rhs(u, t, states), u, per_element=True)
    fe = face_energy_terms(disc, states)
    scale = max(1.0, float(np.abs(rate).sum()), abs(fe.interface) + abs(fe.smooth) + abs(fe.boundary))
    return EnergyBalance(float(rate.sum()), fe, abs(float(rate.sum()) - fe.total), scale)


# ----------------------------------------------------------------- monitor


@dataclass
class EnergyMonitor:
    """Callable for :func:`advance` producing one :class:`EnergyRecord` per call.

    ``discount`` maps the state to the weighted energy stored in
    ``E_discounted``; ``check_balance`` also evaluates the semi-discrete
    energy identity (one extra operator evaluation).
    """

    disc: DGSEM
    discount: Callable[[np.ndarray], float] | None = None
    check_balance: bool = False
    records: list = field(default_factory=list)

    def __call__(self, step: int, t: float, u: np.ndarray) -> EnergyRecord:
        states = self.disc.face_states(u, t)
        smp = interface_samples(self.disc, states)
        rec = EnergyRecord(t=t, E_L2=discrete_l2_energy(self.disc, u), step=step)
        if self.discount is not None:
            rec.E_discounted = float(self.discount(u))
        if smp.Q.size:
            rec.Q_int = float((smp.weights * smp.Q).sum())
            rec.QN_int = float((smp.weights * smp.QN).sum())
            rec.R_plus_min = float(smp.R_plus.min())
            rec.R_minus_min = float(smp.R_minus.min())
            rec.max_RH_violation = float(smp.rh_violation.max())
            rec.max_inferred_excess = float(((smp.QN - smp.Q) / smp.scale).max())
            gap = smp.QN - (smp.Q - 0.5 * smp.R_plus - 0.5 * smp.R_minus)
            rec.max_decomposition_error = float((np.abs(gap) / smp.scale).max())
        fe = face_energy_terms(self.disc, states)
        rec.max_smooth_term = fe.smooth_max
        if self.check_balance:
            rec.balance_residual = energy_balance(self.disc, u, t).relative
        self.records.append(rec)
        return rec
