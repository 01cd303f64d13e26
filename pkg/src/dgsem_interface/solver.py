"""Split-form DGSEM semi-discretization and low-storage Runge-Kutta stepping.

Per element, with ``f~^i = Ja^i . A U`` the contravariant flux and collocated
LGL quadrature, the scheme reads

    <J U_t, phi>_N - 1/2 <f~, grad_xi phi>_N + 1/2 <A . Ja grad_xi U, phi>_N
        = - int_{dE,N} phi^T (F*_n - 1/2 F_n) dS.

In nodal form along each reference direction this is

    J U_t = 1/2 M^-1 D^T M f~ - 1/2 A~ D U - M^-1 (face terms),

which is what :meth:`DGSEM.rhs` evaluates. Fields are stored as
``(K, m, N+1)`` in 1D and ``(K, m, N+1, N+1)`` in 2D (element, component,
xi, eta).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .basis import LglBasis
from .coupling import flux_matrices
from .mesh import BOUNDARY, Mesh
from .models import ModelKind, coefficient_matrices, max_wave_speed, symmetrizer

logger = logging.getLogger(__name__)

BOUNDARY_MODES = ("exact_dirichlet", "homogeneous_inflow")

# Carpenter & Kennedy five-stage fourth-order 2N-storage scheme
RK_A = (
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
)
RK_B = (
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
)
RK_C = (
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
)


class SolverAbort(RuntimeError):
    pass


@dataclass
class SolverConfig:
    degree: int
    kind: ModelKind = ModelKind.acoustic_2d
    cfl: float = 0.5
    t_end: float = 1.0
    boundary: str = "exact_dirichlet"
    cadence: int = 10
    threads: int = 1

    def __post_init__(self):
        self.kind = ModelKind(self.kind)
        if self.degree < 1:
            raise ValueError("polynomial degree must be >= 1")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"CFL must lie in (0, 1], got {self.cfl}")
        if self.t_end < 0.0:
            raise ValueError("t_end must be non-negative")
        if self.boundary not in BOUNDARY_MODES:
            raise ValueError(f"unknown boundary mode {self.boundary!r}")
        if self.cadence < 1:
            raise ValueError("monitor cadence must be >= 1")


@dataclass
class StateField:
    values: np.ndarray
    t: float = 0.0

    def copy(self) -> "StateField":
        return StateField(self.values.copy(), self.t)


# Boundary data: f(t, coords, material_ids) -> (nodes..., m) array, where
# coords is a tuple of node-coordinate arrays and material_ids has one entry
# per node (so the interface branch of a piecewise solution is unambiguous).
BoundaryData = Callable[[float, tuple, np.ndarray], np.ndarray]


@dataclass(eq=False)
class FaceGroup:
    """All faces normal to one coordinate axis."""

    axis: int
    normal: tuple
    left: np.ndarray
    right: np.ndarray
    mat_left: np.ndarray
    mat_right: np.ndarray
    c_left: np.ndarray  # (nf, m, m)
    c_right: np.ndarray
    scale: np.ndarray  # surface metric |Ja^axis| per face
    is_interface: np.ndarray
    ghost_left: np.ndarray  # face indices with a ghost on the left
    ghost_right: np.ndarray
    ghost_left_coords: tuple = ()
    ghost_right_coords: tuple = ()
    plus_face: np.ndarray = field(default=None)  # per element: face on its +side
    minus_face: np.ndarray = field(default=None)


@dataclass
class FaceStates:
    axis: int
    u_left: np.ndarray  # (nf, m, nfn)
    u_right: np.ndarray
    flux: np.ndarray


class DGSEM:
    """Spatial operator on a fixed mesh, basis and model."""

    def __init__(
        self,
        mesh: Mesh,
        basis: LglBasis,
        kind,
        boundary: str = "exact_dirichlet",
        boundary_data: BoundaryData | None = None,
        threads: int = 1,
    ):
        self.mesh = mesh
        self.basis = basis
        self.kind = ModelKind(kind)
        if self.kind.dim != mesh.dim:
            raise ValueError(f"{self.kind.value} needs a {self.kind.dim}D mesh")
        if boundary not in BOUNDARY_MODES:
            raise ValueError(f"unknown boundary mode {boundary!r}")
        if boundary == "exact_dirichlet" and boundary_data is None:
            raise ValueError("exact_dirichlet boundaries need boundary data")
        self.boundary = boundary
        self.boundary_data = boundary_data
        self.threads = max(1, int(threads))

        self.dim = mesh.dim
        self.m = self.kind.n_components
        self.n = basis.n_nodes
        self._setup_elements()
        self._setup_faces()
        self._dhat = (basis.diff_matrix.T * basis.weights[None, :]) / basis.weights[:, None]

    # ------------------------------------------------------------------ setup

    def _setup_elements(self):
        mesh, kind = self.mesh, self.kind
        k = mesh.n_elements
        self.material_ids = mesh.material_ids
        self.jacobian = np.array([e.jacobian for e in mesh.elements])
        self.coeff = [coefficient_matrices(kind, m) for m in mesh.materials]
        sym = [symmetrizer(kind, m) for m in mesh.materials]
        self.s_inv_by_material = np.array([s[1] for s in sym])
        self.s_inv = self.s_inv_by_material[self.material_ids]
        # contravariant flux matrices A~^i = sum_d Ja^i_d A_d, per element
        self.contra = np.zeros((self.dim, k, self.m, self.m))
        self.normal_mats = np.zeros((self.dim, k, self.m, self.m))
        for e, geo in enumerate(mesh.elements):
            mats = self.coeff[geo.material_id]
            for i in range(self.dim):
                self.contra[i, e] = sum(geo.contravariant[i, d] * mats[d] for d in range(self.dim))
                self.normal_mats[i, e] = mats[i]
        self.surface_scale = np.array(
            [[np.linalg.norm(geo.contravariant[i]) for i in range(self.dim)] for geo in mesh.elements]
        )
        self.max_speed = np.array([max_wave_speed(kind, mesh.materials[i]) for i in self.material_ids])

        xi = self.basis.nodes
        if self.dim == 1:
            lo = np.array([geo.corners[0] for geo in mesh.elements])
            hi = np.array([geo.corners[1] for geo in mesh.elements])
            self.coords = (lo[:, None] + (xi[None, :] + 1) * (hi - lo)[:, None] / 2,)
        else:
            lo = np.array([geo.corners[0] for geo in mesh.elements])
            hi = np.array([geo.corners[2] for geo in mesh.elements])
            x = lo[:, 0, None, None] + (xi[None, :, None] + 1) * (hi - lo)[:, 0, None, None] / 2
            y = lo[:, 1, None, None] + (xi[None, None, :] + 1) * (hi - lo)[:, 1, None, None] / 2
            shape = (k, self.n, self.n)
            self.coords = (np.broadcast_to(x, shape).copy(), np.broadcast_to(y, shape).copy())
        self.quad_weights = self.basis.weights
        if self.dim == 2:
            self.quad_weights = np.outer(self.basis.weights, self.basis.weights)
        self.face_weights = self.basis.weights if self.dim == 2 else np.ones(1)

    def _setup_faces(self):
        mesh, kind = self.mesh, self.kind
        mids = self.material_ids
        k = mesh.n_elements
        self.groups: list[FaceGroup] = []
        for axis in range(self.dim):
            faces = [f for f in mesh.faces if f.axis == axis]
            left = np.array([f.left for f in faces])
            right = np.array([f.right for f in faces])
            mat_l = np.where(left == BOUNDARY, mids[np.maximum(right, 0)], mids[np.maximum(left, 0)])
            mat_r = np.where(right == BOUNDARY, mids[np.maximum(left, 0)], mids[np.maximum(right, 0)])
            normal = tuple(float(axis == d) for d in range(self.dim))
            cache = {}
            c_l = np.zeros((len(faces), self.m, self.m))
            c_r = np.zeros_like(c_l)
            for i, (a, b) in enumerate(zip(mat_l, mat_r)):
                if (a, b) not in cache:
                    cache[a, b] = flux_matrices(kind, mesh.materials[a], mesh.materials[b], normal)
                c_l[i], c_r[i] = cache[a, b]
            owner = np.where(left == BOUNDARY, right, left)
            scale = self.surface_scale[owner, axis]
            plus = np.full(k, -1)
            minus = np.full(k, -1)
            plus[left[left != BOUNDARY]] = np.nonzero(left != BOUNDARY)[0]
            minus[right[right != BOUNDARY]] = np.nonzero(right != BOUNDARY)[0]
            ghost_l = np.nonzero(left == BOUNDARY)[0]
            ghost_r = np.nonzero(right == BOUNDARY)[0]
            grp = FaceGroup(
                axis=axis,
                normal=normal,
                left=left,
                right=right,
                mat_left=mat_l,
                mat_right=mat_r,
                c_left=c_l,
                c_right=c_r,
                scale=scale,
                is_interface=(left != BOUNDARY) & (right != BOUNDARY) & (mat_l != mat_r),
                ghost_left=ghost_l,
                ghost_right=ghost_r,
                plus_face=plus,
                minus_face=minus,
            )
            # a ghost on the left sits on the element's minus side, and vice versa
            grp.ghost_left_coords = tuple(
                self._trace(c[:, None], axis, -1)[right[ghost_l], 0] for c in self.coords
            )
            grp.ghost_right_coords = tuple(
                self._trace(c[:, None], axis, +1)[left[ghost_r], 0] for c in self.coords
            )
            self.groups.append(grp)

    # -------------------------------------------------------------- helpers

    def _trace(self, u: np.ndarray, axis: int, side: int) -> np.ndarray:
        """Face values ``(K, m, nfn)`` on the +/- side of reference axis ``axis``."""
        idx = -1 if side > 0 else 0
        t = np.take(u, idx, axis=2 + axis)
        return t[..., None] if self.dim == 1 else t

    def _insert(self, out: np.ndarray, vals: np.ndarray, axis: int, idx: int):
        sl = [slice(None)] * out.ndim
        sl[2 + axis] = idx
        out[tuple(sl)] += vals[..., 0] if self.dim == 1 else vals

    def _apply_1d(self, op: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
        return np.moveaxis(np.tensordot(op, u, axes=(1, 2 + axis)), 0, 2 + axis)

    def _ghost(self, t: float, coords: tuple, mat_ids: np.ndarray) -> np.ndarray:
        shape = coords[0].shape  # (n_ghost, nfn)
        if self.boundary == "homogeneous_inflow" or shape[0] == 0:
            return np.zeros((shape[0], self.m, shape[1]))
        mats = np.broadcast_to(mat_ids[:, None], shape)
        vals = np.asarray(self.boundary_data(t, coords, mats), dtype=float)
        return np.moveaxis(vals, -1, 1)

    def zeros(self) -> np.ndarray:
        return np.zeros((self.mesh.n_elements, self.m) + (self.n,) * self.dim)

    def project(self, fn: Callable, t: float = 0.0) -> np.ndarray:
        """Nodal interpolant of ``fn(t, coords, material_ids) -> (..., m)``."""
        mats = np.broadcast_to(
            self.material_ids.reshape((-1,) + (1,) * self.dim), self.coords[0].shape
        )
        vals = np.asarray(fn(t, self.coords, mats), dtype=float)
        return np.moveaxis(vals, -1, 1).copy()

    # ------------------------------------------------------------ operator

    def face_states(self, u: np.ndarray, t: float) -> list[FaceStates]:
        out = []
        for g in self.groups:
            plus = self._trace(u, g.axis, +1)
            minus = self._trace(u, g.axis, -1)
            nf = g.left.size
            u_l = np.empty((nf, self.m, plus.shape[-1]))
            u_r = np.empty_like(u_l)
            has_l = g.left != BOUNDARY
            has_r = g.right != BOUNDARY
            u_l[has_l] = plus[g.left[has_l]]
            u_r[has_r] = minus[g.right[has_r]]
            if g.ghost_left.size:
                u_l[g.ghost_left] = self._ghost(t, g.ghost_left_coords, g.mat_left[g.ghost_left])
            if g.ghost_right.size:
                u_r[g.ghost_right] = self._ghost(t, g.ghost_right_coords, g.mat_right[g.ghost_right])
            flux = np.einsum("fab,fbn->fan", g.c_left, u_l) + np.einsum("fab,fbn->fan", g.c_right, u_r)
            out.append(FaceStates(g.axis, u_l, u_r, flux))
        return out

    def _volume(self, u: np.ndarray, sl: slice) -> np.ndarray:
        us = u[sl]
        vol = np.zeros_like(us)
        for axis in range(self.dim):
            au = np.einsum("kab,kb...->ka...", self.contra[axis, sl], us)
            vol += 0.5 * self._apply_1d(self._dhat, au, axis)
            vol -= 0.5 * self._apply_1d(self.basis.diff_matrix, au, axis)
        return vol

    def rhs(self, u: np.ndarray, t: float, states: list[FaceStates] | None = None) -> np.ndarray:
        """Time derivative ``U_t`` of the semi-discrete system."""
        k = u.shape[0]
        if self.threads > 1 and k >= 2 * self.threads:
            bounds = np.linspace(0, k, self.threads + 1).astype(int)
            slices = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
            with ThreadPoolExecutor(self.threads) as pool:
                parts = list(pool.map(lambda s: self._volume(u, s), slices))
            ju = np.concatenate(parts, axis=0)
        else:
            ju = self._volume(u, slice(None))

        if states is None:
            states = self.face_states(u, t)
        w = self.basis.weights
        for g, fs in zip(self.groups, states):
            a = g.axis
            an = self.normal_mats[a]
            s = self.surface_scale[:, a][:, None, None]
            plus = self._trace(u, a, +1)
            minus = self._trace(u, a, -1)
            f_plus = fs.flux[g.plus_face]
            f_minus = fs.flux[g.minus_face]
            self._insert(ju, -(s / w[-1]) * (f_plus - 0.5 * np.einsum("kab,kbn->kan", an, plus)), a, -1)
            self._insert(ju, (s / w[0]) * (f_minus - 0.5 * np.einsum("kab,kbn->kan", an, minus)), a, 0)
        return ju / self.jacobian.reshape((-1,) + (1,) * (u.ndim - 1))

    # -------------------------------------------------------------- norms

    def symmetrized(self, u: np.ndarray) -> np.ndarray:
        return np.einsum("kab,kb...->ka...", self.s_inv, u)

    def inner(self, u: np.ndarray, v: np.ndarray, per_element: bool = False):
        """``sum_k <J S^-1 u, S^-1 v>_N``."""
        us, vs = self.symmetrized(u), self.symmetrized(v)
        prod = (us * vs).sum(axis=1) * self.quad_weights
        per = prod.reshape(prod.shape[0], -1).sum(axis=1) * self.jacobian
        return per if per_element else float(per.sum())

    def l2_errors(self, u: np.ndarray, exact: np.ndarray) -> np.ndarray:
        """Discrete L2 error per component (unsymmetrized)."""
        d2 = (u - exact) ** 2 * self.quad_weights[None, None]
        axes = tuple(range(2, u.ndim))
        per = d2.sum(axis=axes) * self.jacobian[:, None]
        return np.sqrt(per.sum(axis=0))


def stable_timestep(mesh: Mesh, basis: LglBasis, config: SolverConfig) -> float:
    """``dt = CFL * min_k h_k / (lambda_max,k (2N + 1))``."""
    n = basis.degree
    worst = math.inf
    for geo in mesh.elements:
        lam = max_wave_speed(config.kind, mesh.materials[geo.material_id])
        worst = min(worst, float(geo.widths.min()) / (lam * (2 * n + 1)))
    return config.cfl * worst


def _check_finite(u: np.ndarray, t: float):
    if np.isfinite(u).all():
        return
    bad = ~np.isfinite(u.reshape(u.shape[0], -1)).all(axis=1)
    raise SolverAbort(f"non-finite state at t = {t:.17g} in element {int(np.argmax(bad))}")


Monitor = Callable[[int, float, np.ndarray], object]


def advance(
    disc: DGSEM,
    field: StateField,
    config: SolverConfig,
    monitors: Sequence[Monitor] = (),
    dt: float | None = None,
) -> tuple[StateField, list[list]]:
    """Integrate from ``field.t`` to ``config.t_end`` with RK(5,4).

    Monitors are called as ``monitor(step, t, u)`` at the start, every
    ``config.cadence`` steps and at the final time; their return values are
    collected per monitor.
    """
    u = field.values.copy()
    t0 = field.t
    t_end = config.t_end
    if dt is None:
        dt = stable_timestep(disc.mesh, disc.basis, config)
    records: list[list] = [[] for _ in monitors]

    def observe(step, t):
        for rec, mon in zip(records, monitors):
            rec.append(mon(step, t, u))

    observe(0, t0)
    if t_end <= t0:
        return StateField(u, t0), records

    n_steps = max(1, math.ceil((t_end - t0) / dt - 1e-10))
    du = np.zeros_like(u)
    t = t0
    for step in range(1, n_steps + 1):
        h = dt if step < n_steps else (t_end - t)
        du[...] = 0.0
        for a, b, c in zip(RK_A, RK_B, RK_C):
            du *= a
            du += h * disc.rhs(u, t + c * h)
            u += b * du
            _check_finite(u, t + c * h)
        t = t_end if step == n_steps else t0 + step * dt
        if step % config.cadence == 0 or step == n_steps:
            observe(step, t)
    logger.debug("advanced %d steps to t = %g", n_steps, t)
    return StateField(u, t), records
