"""Named experiment drivers: build a discretization from a RunConfig and run it."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .basis import build_basis
from .config import RunConfig
from .coupling import build_coupling, upwind_flux
from .energy import (
    EnergyMonitor,
    EnergyRecord,
    scalar_discounted_energy,
)
from .exact import (
    PlaneWaveParams,
    PlaneWaveScatter,
    ScalarInterfaceSolution,
    exact_l2_energy,
    gaussian_pulse,
)
from .mesh import build_cartesian_mesh, build_interval_mesh
from .models import Material, ModelKind, rh_compatible_state
from .solver import DGSEM, SolverConfig, StateField, advance

logger = logging.getLogger(__name__)

VERIFY_TOL = {
    "inferred": 1e-11,
    "decomposition": 1e-11,
    "residual": -1e-12,
    "balance": 1e-10,
    "smooth": 1e-12,
}


class VerificationError(RuntimeError):
    pass


@dataclass
class Problem:
    name: str
    disc: DGSEM
    solver: SolverConfig
    initial: Callable
    exact: object | None
    domain: list
    discount: Callable | None = None


@dataclass
class RunResult:
    degree: int
    records: list[EnergyRecord]
    final: StateField
    errors: np.ndarray | None = None
    exact_energy: list[float] | None = None
    verify_failures: list[str] = field(default_factory=list)


def materials_of(cfg: RunConfig) -> tuple[Material, Material]:
    return Material(cfg.rho_left, cfg.c_left), Material(cfg.rho_right, cfg.c_right)


def wave_params(cfg: RunConfig) -> PlaneWaveParams:
    return PlaneWaveParams(
        amplitude=cfg.amplitude,
        k=(cfg.kx, cfg.ky),
        omega=cfg.omega,
        t0=cfg.t0,
        cycles=cfg.cycles,
        normalize=cfg.normalize_k,
        transmission=cfg.transmission,
    )


def _interval(cfg, kind, materials, exact, degree, boundary):
    ifc = () if cfg.interface_x is None else (cfg.interface_x,)
    regions = list(materials) if ifc else [materials[0]]
    mesh = build_interval_mesh(cfg.x_min, cfg.x_max, cfg.nx, ifc, regions)
    return DGSEM(mesh, build_basis(degree), kind, boundary=boundary, boundary_data=exact,
                 threads=cfg.threads)


def _square(cfg, materials, exact, degree, boundary):
    mesh = build_cartesian_mesh((cfg.x_min, cfg.x_max), (cfg.y_min, cfg.y_max), cfg.nx, cfg.ny,
                                cfg.interface_x, materials)
    return DGSEM(mesh, build_basis(degree), ModelKind.acoustic_2d, boundary=boundary,
                 boundary_data=exact, threads=cfg.threads)


def _solver_config(cfg: RunConfig, degree: int, kind: ModelKind, boundary: str) -> SolverConfig:
    return SolverConfig(degree=degree, kind=kind, cfl=cfg.cfl, t_end=cfg.t_end,
                        boundary=boundary, cadence=cfg.cadence, threads=cfg.threads)


def build_problem(cfg: RunConfig, degree: int) -> Problem:
    m_left, m_right = materials_of(cfg)
    ifc = 0.0 if cfg.interface_x is None else cfg.interface_x
    x_dom = [(cfg.x_min, cfg.x_max)]
    xy_dom = [(cfg.x_min, cfg.x_max), (cfg.y_min, cfg.y_max)]
    name = cfg.experiment

    if name == "scalar_1d":
        kind = ModelKind.scalar_advection
        exact = ScalarInterfaceSolution(cfg.c_left, cfg.c_right,
                                        gaussian_pulse(cfg.pulse_center, cfg.pulse_width), ifc)
        disc = _interval(cfg, kind, (m_left, m_right), exact, degree, cfg.boundary)
        alpha = cfg.alpha_c if cfg.alpha_c is not None else cfg.c_right / cfg.c_left
        return Problem(name, disc, _solver_config(cfg, degree, kind, cfg.boundary), exact, exact,
                       x_dom, lambda u: scalar_discounted_energy(disc, u, alpha))

    if name == "acoustic_1d_scatter":
        kind = ModelKind.acoustic_1d
        params = PlaneWaveParams(amplitude=cfg.amplitude, k=(1.0,), omega=cfg.omega, t0=cfg.t0,
                                 cycles=cfg.cycles, transmission=cfg.transmission)
        exact = PlaneWaveScatter(params, m_left, m_right, ifc, dim=1)
        disc = _interval(cfg, kind, (m_left, m_right), exact, degree, cfg.boundary)
        return Problem(name, disc, _solver_config(cfg, degree, kind, cfg.boundary), exact, exact,
                       x_dom)

    if name in ("plane_wave_2d", "convergence"):
        kind = ModelKind.acoustic_2d
        if name == "convergence":
            m_right = m_left
        exact = PlaneWaveScatter(wave_params(cfg), m_left, m_right, ifc, dim=2)
        disc = _square(cfg, (m_left, m_right), exact, degree, cfg.boundary)
        return Problem(name, disc, _solver_config(cfg, degree, kind, cfg.boundary), exact, exact,
                       xy_dom)

    if name == "free_stream":
        kind = ModelKind.acoustic_2d
        u_left = np.array([1.0, 0.3, -0.2])
        u_right = rh_compatible_state(kind, u_left, m_left, m_right, (1.0, 0.0))

        def constant(t, coords, mats):
            right = np.asarray(mats)[..., None] != 0
            return np.where(right, u_right, u_left) * np.ones(np.shape(coords[0]))[..., None]

        disc = _square(cfg, (m_left, m_right), constant, degree, "exact_dirichlet")
        return Problem(name, disc, _solver_config(cfg, degree, kind, "exact_dirichlet"),
                       constant, constant, xy_dom)

    if name == "random_2d":
        kind = ModelKind.acoustic_2d
        disc = _square(cfg, (m_left, m_right), None, degree, "homogeneous_inflow")
        rng = np.random.default_rng(cfg.seed)
        data = rng.standard_normal(disc.zeros().shape)

        def initial(t, coords, mats):
            return np.moveaxis(data, 1, -1)

        return Problem(name, disc, _solver_config(cfg, degree, kind, "homogeneous_inflow"),
                       initial, None, xy_dom)

    raise ValueError(f"unknown experiment {name!r}")


def has_exact_energy(cfg: RunConfig) -> bool:
    return cfg.experiment in ("scalar_1d", "acoustic_1d_scatter", "plane_wave_2d", "convergence")


def exact_energy_series(cfg: RunConfig, times) -> list[float]:
    """Exact L2 energy at ``times`` for experiments with a closed-form solution."""
    if not has_exact_energy(cfg):
        raise ValueError(f"experiment {cfg.experiment!r} has no closed-form energy")
    prob = build_problem(cfg, max(cfg.degrees))
    return [exact_l2_energy(prob.exact, t, prob.domain, norm=cfg.energy_norm) for t in times]


def _verify_record(rec: EnergyRecord) -> list[str]:
    out = []
    tol = VERIFY_TOL
    if rec.max_inferred_excess > tol["inferred"]:
        out.append(f"t={rec.t:.6g}: Q_N exceeds Q by {rec.max_inferred_excess:.3e} (relative)")
    if rec.max_decomposition_error > tol["decomposition"]:
        out.append(f"t={rec.t:.6g}: Q_N != Q - R/2 by {rec.max_decomposition_error:.3e}")
    if min(rec.R_plus_min, rec.R_minus_min) < tol["residual"]:
        out.append(f"t={rec.t:.6g}: negative dissipation residual")
    if rec.balance_residual > tol["balance"]:
        out.append(f"t={rec.t:.6g}: energy balance off by {rec.balance_residual:.3e}")
    if rec.max_smooth_term > tol["smooth"]:
        out.append(f"t={rec.t:.6g}: smooth interior face produces energy {rec.max_smooth_term:.3e}")
    return out


def _verify_fluxes(disc: DGSEM, u, t) -> list[str]:
    """Evaluate interface fluxes from both reconstructions."""
    out = []
    for g, fs in zip(disc.groups, disc.face_states(u, t)):
        for f in np.nonzero(g.is_interface)[0]:
            ml, mr = disc.mesh.materials[g.mat_left[f]], disc.mesh.materials[g.mat_right[f]]
            try:
                upwind_flux(disc.kind, ml, mr, fs.u_left[f].T, fs.u_right[f].T, g.normal,
                            verify=True)
            except AssertionError as exc:
                out.append(f"t={t:.6g}, face {f}: {exc}")
    return out


def coupling_report(disc: DGSEM) -> str:
    lines = []
    seen = set()
    for g in disc.groups:
        for f in np.nonzero(g.is_interface)[0]:
            key = (g.axis, int(g.mat_left[f]), int(g.mat_right[f]))
            if key in seen:
                continue
            seen.add(key)
            mats = disc.mesh.materials
            op = build_coupling(disc.kind, mats[key[1]], mats[key[2]], g.normal)
            count = int(((g.mat_left == key[1]) & (g.mat_right == key[2]) & g.is_interface).sum())
            lines.append(f"[{count} faces, axis {g.axis}] " + op.report())
    return "\n".join(lines) if lines else "no material interfaces"


def fit_scatter_amplitudes(disc: DGSEM, u: np.ndarray, exact: PlaneWaveScatter, t: float):
    """Reflected and transmitted amplitudes of a computed scatter field.

    Weighted least squares against unit-amplitude reflected (left region,
    incident part subtracted) and transmitted (right region) shapes.
    """
    coords = disc.coords
    vals = np.moveaxis(u, 1, -1)
    w = (disc.quad_weights[None] * disc.jacobian.reshape((-1,) + (1,) * disc.dim))[..., None]
    left = (disc.material_ids == 0).reshape((-1,) + (1,) * (disc.dim + 1))
    amp = exact.params.amplitude
    refl = exact._wave(t, coords, exact.k_reflected, exact.m_left, amp)
    trans = exact._wave(t, coords, exact.k_transmitted, exact.m_right, amp)
    resid = vals - exact.incident(t, coords)

    def lsq(target, shape, mask):
        ww = w * mask
        return float((ww * target * shape).sum() / (ww * shape * shape).sum())

    return lsq(resid, refl, left), lsq(vals, trans, ~left)


def run_problem(prob: Problem, verify: bool = False, with_exact_energy: bool = False,
                energy_norm: str = "symmetrized") -> RunResult:
    disc = prob.disc
    monitor = EnergyMonitor(disc, discount=prob.discount, check_balance=verify)
    failures: list[str] = []

    def verifier(step, t, u):
        failures.extend(_verify_fluxes(disc, u, t))

    monitors = [monitor] + ([verifier] if verify else [])
    u0 = StateField(disc.project(prob.initial, 0.0), 0.0)
    final, _ = advance(disc, u0, prob.solver, monitors)
    if verify:
        for rec in monitor.records:
            failures.extend(_verify_record(rec))

    errors = None
    if prob.exact is not None:
        errors = disc.l2_errors(final.values, disc.project(prob.exact, final.t))
    exact_e = None
    if with_exact_energy and isinstance(prob.exact, (PlaneWaveScatter, ScalarInterfaceSolution)):
        exact_e = [exact_l2_energy(prob.exact, r.t, prob.domain, norm=energy_norm)
                   for r in monitor.records]
    return RunResult(prob.solver.degree, monitor.records, final, errors, exact_e, failures)


def run_experiment_degree(cfg: RunConfig, degree: int) -> RunResult:
    prob = build_problem(cfg, degree)
    logger.info("%s N=%d: %s", cfg.experiment, degree, prob.disc.mesh.summary().splitlines()[0])
    return run_problem(prob, verify=cfg.verify,
                       with_exact_energy=cfg.exact_energy and has_exact_energy(cfg),
                       energy_norm=cfg.energy_norm)


__all__ = [
    "Problem",
    "RunResult",
    "VerificationError",
    "build_problem",
    "coupling_report",
    "exact_energy_series",
    "fit_scatter_amplitudes",
    "has_exact_energy",
    "run_experiment_degree",
    "run_problem",
]
