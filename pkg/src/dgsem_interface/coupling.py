"""Rankine-Hugoniot characteristic coupling and the upwind numerical flux.

At a face with normal ``n`` pointing from the left material to the right one,
the outgoing characteristics ``w_L^+`` and ``w_R^-`` are taken from the
traces, and the incoming ones ``w*^+`` (entering the right side) and
``w*^-`` (entering the left side) are chosen so that

    P_L Lam_L [w_L^+; w*^-] = P_R Lam_R [w*^+; w_R^-].

Moving the unknowns to the left gives ``M_LR [w*^+; w*^-] = M_RL [w_L^+; w_R^-]``
with ``M_LR = M_L^- - M_R^+`` and ``M_RL = M_R^- - M_L^+``, where
``M^+ = P Lam^+`` and ``M^- = P Lam^-`` restricted to nonzero eigenvalues.
Zero-speed characteristics carry no flux; they are dropped from the solve
and averaged in the trace.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .models import EigenStructure, Material, ModelKind, normal_eigenstructure, normal_matrix

DIAG_TOL = 1.0e-11
RANK_TOL = 1.0e-12


class IllPosedInterfaceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CouplingOperator:
    kind: ModelKind
    m_left: Material
    m_right: Material
    normal: tuple
    eig_left: EigenStructure
    eig_right: EigenStructure
    M_LR: np.ndarray
    M_RL: np.ndarray
    M: np.ndarray
    diag_flag: bool
    condition: float

    @property
    def n_plus(self) -> int:
        return self.eig_left.n_plus

    @property
    def n_minus(self) -> int:
        return self.eig_left.n_minus

    @property
    def M_plus_bar(self) -> np.ndarray:
        return self.M[: self.n_plus, : self.n_plus]

    @property
    def M_minus_bar(self) -> np.ndarray:
        return self.M[self.n_plus :, self.n_plus :]

    def report(self) -> str:
        with np.printoptions(precision=6, suppress=True):
            return (
                f"interface {self.m_left} | {self.m_right}, n = {self.normal}\n"
                f"  diag_flag = {self.diag_flag}, cond(M_LR) = {self.condition:.6e}\n"
                f"  M =\n{self.M}"
            )


@dataclass(frozen=True, eq=False)
class InterfaceTrace:
    """Face-node traces; every array has a leading node axis."""

    op: CouplingOperator
    U_L: np.ndarray
    U_R: np.ndarray
    W_L: np.ndarray
    W_R: np.ndarray
    W_star_plus: np.ndarray
    W_star_minus: np.ndarray
    F_star: np.ndarray

    @property
    def normal(self) -> tuple:
        return self.op.normal

    def left_reconstruction(self) -> np.ndarray:
        return _recon(self.op.eig_left, self.W_L[:, self.op.eig_left.plus], self.W_star_minus,
                      self._w_zero())

    def right_reconstruction(self) -> np.ndarray:
        return _recon(self.op.eig_right, self.W_star_plus, self.W_R[:, self.op.eig_right.minus],
                      self._w_zero())

    def _w_zero(self) -> np.ndarray:
        z = self.op.eig_left.zero
        return 0.5 * (self.W_L[:, z] + self.W_R[:, z])


def _recon(eig: EigenStructure, w_plus, w_minus, w_zero) -> np.ndarray:
    return np.concatenate([w_plus, w_zero, w_minus], axis=-1)


@lru_cache(maxsize=None)
def _build_coupling_cached(kind: ModelKind, m_left: Material, m_right: Material, normal: tuple):
    eig_l = normal_eigenstructure(kind, m_left, normal)
    eig_r = normal_eigenstructure(kind, m_right, normal)
    if eig_l.n_plus != eig_r.n_plus or eig_l.n_minus != eig_r.n_minus:
        raise IllPosedInterfaceError(
            f"eigenvalue signs change across the interface between {m_left} and "
            f"{m_right} for normal {normal}"
        )
    pl, ml = eig_l.plus, eig_l.minus
    pr, mr = eig_r.plus, eig_r.minus
    m_lr = np.hstack([-eig_r.P[:, pr] * eig_r.lam[pr], eig_l.P[:, ml] * eig_l.lam[ml]])
    m_rl = np.hstack([-eig_l.P[:, pl] * eig_l.lam[pl], eig_r.P[:, mr] * eig_r.lam[mr]])

    sv = np.linalg.svd(m_lr, compute_uv=False)
    if sv.size == 0 or sv[-1] <= RANK_TOL * sv[0]:
        raise IllPosedInterfaceError(
            f"coupling matrix M_LR is singular between {m_left} and {m_right} "
            f"for normal {normal}"
        )
    cond = float(sv[0] / sv[-1])
    if m_lr.shape[0] == m_lr.shape[1]:
        m = np.linalg.solve(m_lr, m_rl)
    else:
        # more rows than unknowns when zero eigenvalues are eliminated; the
        # system is consistent so least squares is an exact solve
        m = np.linalg.lstsq(m_lr, m_rl, rcond=None)[0]
    off = m - np.diag(np.diag(m))
    diag_flag = bool(np.abs(off).max(initial=0.0) <= DIAG_TOL * max(np.abs(m).max(), 1e-300))
    for arr in (m_lr, m_rl, m):
        arr.setflags(write=False)
    return CouplingOperator(kind, m_left, m_right, normal, eig_l, eig_r, m_lr, m_rl, m,
                            diag_flag, cond)


def build_coupling(kind, m_left: Material, m_right: Material, normal) -> CouplingOperator:
    normal = tuple(float(v) for v in np.atleast_1d(normal))
    return _build_coupling_cached(ModelKind(kind), m_left, m_right, normal)


def solve_starred_states(op: CouplingOperator, w_left_plus, w_right_minus):
    """Incoming characteristics ``(W*^+, W*^-)`` from the outgoing ones.

    Inputs may carry a leading node axis.
    """
    w_left_plus = np.asarray(w_left_plus, dtype=float)
    w_right_minus = np.asarray(w_right_minus, dtype=float)
    known = np.concatenate([w_left_plus, w_right_minus], axis=-1)
    star = known @ op.M.T
    return star[..., : op.n_plus], star[..., op.n_plus :]


def build_trace(op: CouplingOperator, u_left, u_right) -> InterfaceTrace:
    u_left = np.atleast_2d(np.asarray(u_left, dtype=float))
    u_right = np.atleast_2d(np.asarray(u_right, dtype=float))
    el, er = op.eig_left, op.eig_right
    w_l = u_left @ el.P_inv.T
    w_r = u_right @ er.P_inv.T
    ws_p, ws_m = solve_starred_states(op, w_l[:, el.plus], w_r[:, er.minus])
    w_zero = 0.5 * (w_l[:, el.zero] + w_r[:, er.zero])
    left = _recon(el, w_l[:, el.plus], ws_m, w_zero)
    f_star = (left * el.lam) @ el.P.T
    return InterfaceTrace(op, u_left, u_right, w_l, w_r, ws_p, ws_m, f_star)


def flux_pair(tr: InterfaceTrace) -> tuple[np.ndarray, np.ndarray]:
    """The flux from the left and from the right reconstruction."""
    el, er = tr.op.eig_left, tr.op.eig_right
    f_left = (tr.left_reconstruction() * el.lam) @ el.P.T
    f_right = (tr.right_reconstruction() * er.lam) @ er.P.T
    return f_left, f_right


def rh_residual(tr: InterfaceTrace) -> np.ndarray:
    """``|A_L u_L,recon - A_R u_R,recon|`` per node (Euclidean)."""
    f_left, f_right = flux_pair(tr)
    return np.linalg.norm(f_left - f_right, axis=-1)


def upwind_flux(kind, m_left: Material, m_right: Material, u_left, u_right, normal,
                verify: bool = False) -> np.ndarray:
    """Upwind flux ``F*`` along ``normal``; accepts a leading node axis.

    With ``verify`` the right-side reconstruction is evaluated as well and a
    mismatch beyond round-off raises ``AssertionError``.
    """
    op = build_coupling(kind, m_left, m_right, normal)
    single = np.ndim(u_left) == 1
    tr = build_trace(op, u_left, u_right)
    if verify:
        f_left, f_right = flux_pair(tr)
        scale = max(np.abs(f_left).max(initial=0.0), 1.0)
        if np.abs(f_left - f_right).max(initial=0.0) > 1e-12 * scale:
            raise AssertionError("left and right flux reconstructions disagree")
    return tr.F_star[0] if single else tr.F_star


def flux_matrices(kind, m_left: Material, m_right: Material, normal):
    """Matrices ``(C_L, C_R)`` with ``F* = C_L U_L + C_R U_R``."""
    op = build_coupling(kind, m_left, m_right, normal)
    eye = np.eye(op.kind.n_components)
    zero = np.zeros_like(eye)
    c_l = build_trace(op, eye, zero).F_star.T
    c_r = build_trace(op, zero, eye).F_star.T
    return c_l, c_r


def normal_flux(kind, m: Material, u, normal) -> np.ndarray:
    return np.asarray(u, dtype=float) @ normal_matrix(kind, m, normal).T
