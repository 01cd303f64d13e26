import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dgsem_interface.basis import build_basis
from dgsem_interface.energy import energy_balance
from dgsem_interface.exact import ScalarInterfaceSolution, gaussian_pulse
from dgsem_interface.mesh import build_cartesian_mesh, build_interval_mesh
from dgsem_interface.models import Material, ModelKind
from dgsem_interface.solver import (
    DGSEM,
    SolverAbort,
    SolverConfig,
    StateField,
    advance,
    stable_timestep,
)

TABLE1 = (Material(1.0, 1.0), Material(0.4, 0.7))


def sine(t, coords, mats):
    return np.sin(coords[0] - t)[..., None]


def scalar_disc(n=8, k=4, a=1.0, data=sine, lo=0.0, hi=2 * np.pi):
    mesh = build_interval_mesh(lo, hi, k, (), [Material.scalar(a)])
    return DGSEM(mesh, build_basis(n), "scalar_advection", boundary_data=data)


def table1_disc(n=3, boundary="homogeneous_inflow", data=None, nx=20):
    mesh = build_cartesian_mesh((-5, 5), (-5, 5), nx, nx, 0.0, TABLE1)
    return DGSEM(mesh, build_basis(n), "acoustic_2d", boundary=boundary, boundary_data=data)


def test_rhs_matches_analytic_derivative():
    d = scalar_disc()
    u = d.project(sine)
    assert np.abs(d.rhs(u, 0.0)[:, 0] + np.cos(d.coords[0])).max() < 1e-6


def test_zero_field_zero_tendency():
    d = table1_disc()
    assert not d.rhs(d.zeros(), 0.0).any()


def test_constant_state_is_steady_single_material():
    u0 = np.array([0.3, -1.2, 2.0])
    mesh = build_cartesian_mesh((0, 1), (0, 1), 3, 3, None, (TABLE1[1], TABLE1[1]))

    def const(t, coords, mats):
        return np.broadcast_to(u0, np.shape(coords[0]) + (3,))

    d = DGSEM(mesh, build_basis(5), "acoustic_2d", boundary_data=const)
    assert np.abs(d.rhs(d.project(const), 0.0)).max() < 1e-12


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31))
def test_linearity(alpha, beta, seed):
    d = table1_disc(n=2, nx=4)
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2,) + d.zeros().shape)
    lhs = d.rhs(alpha * u + beta * v, 0.0)
    rhs = alpha * d.rhs(u, 0.0) + beta * d.rhs(v, 0.0)
    assert np.abs(lhs - rhs).max() < 1e-11 * (1 + np.abs(lhs).max())


def test_stable_timestep_formula():
    mesh = build_interval_mesh(0, 2, 2, (), [Material.scalar(2.0)])
    cfg = SolverConfig(1, kind="scalar_advection", cfl=0.5, t_end=1.0)
    assert stable_timestep(mesh, build_basis(1), cfg) == pytest.approx(1 / 12)


def test_stable_timestep_decreases_with_degree_and_uses_fastest_material():
    mesh = build_cartesian_mesh((-5, 5), (-5, 5), 20, 20, 0.0, TABLE1)
    dts = [stable_timestep(mesh, build_basis(n), SolverConfig(n, t_end=1)) for n in range(1, 9)]
    assert all(a > b for a, b in zip(dts, dts[1:]))
    assert dts[5] == pytest.approx(0.5 * 0.5 / (1.0 * 13))


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(0)
    with pytest.raises(ValueError):
        SolverConfig(2, cfl=1.5)
    with pytest.raises(ValueError):
        SolverConfig(2, boundary="periodic")


def test_zero_final_time_returns_initial_state():
    d = scalar_disc()
    u = d.project(sine)
    out, recs = advance(d, StateField(u), SolverConfig(8, kind="scalar_advection", t_end=0.0),
                        [lambda s, t, v: t])
    np.testing.assert_array_equal(out.values, u)
    assert recs == [[0.0]]


def test_gaussian_translation():
    exact = ScalarInterfaceSolution(1.0, 1.0, gaussian_pulse(-0.3, 0.3))
    mesh = build_interval_mesh(-1, 1, 8, (), [Material.scalar(1.0)])
    d = DGSEM(mesh, build_basis(8), "scalar_advection", boundary_data=exact)
    out, _ = advance(d, StateField(d.project(exact)),
                     SolverConfig(8, kind="scalar_advection", t_end=0.5))
    assert out.t == 0.5
    assert np.abs(out.values - d.project(exact, 0.5)).max() < 1e-6


def test_monitor_cadence_and_final_landing():
    d = scalar_disc(n=4)
    cfg = SolverConfig(4, kind="scalar_advection", t_end=1.0, cadence=3)
    dt = stable_timestep(d.mesh, d.basis, cfg)
    out, (times,) = advance(d, StateField(d.project(sine)), cfg, [lambda s, t, v: (s, t)])
    n_steps = math.ceil(1.0 / dt)
    assert times[0] == (0, 0.0)
    assert times[-1] == (n_steps, 1.0)
    assert [s for s, _ in times[1:-1]] == list(range(3, n_steps, 3))


def test_temporal_order():
    # fix space, refine dt: error against a fine-dt reference
    d = scalar_disc(n=10, k=4)
    u0 = d.project(sine)
    cfg = SolverConfig(10, kind="scalar_advection", t_end=0.4)
    ref, _ = advance(d, StateField(u0), cfg, dt=0.4 / 640)
    errs = []
    for nsteps in (20, 40):
        out, _ = advance(d, StateField(u0), cfg, dt=0.4 / nsteps)
        errs.append(np.abs(out.values - ref.values).max())
    assert math.log2(errs[0] / errs[1]) >= 3.8


def test_nan_aborts_with_time_and_element():
    d = scalar_disc(n=3)
    u = d.project(sine)
    u[2, 0, 1] = np.nan
    with pytest.raises(SolverAbort, match="element 2"):
        advance(d, StateField(u), SolverConfig(3, kind="scalar_advection", t_end=0.1))


@pytest.mark.parametrize("n", [1, 2, 5])
def test_semidiscrete_energy_identity_random_data(n):
    d = table1_disc(n=n, nx=6)
    u = np.random.default_rng(n).standard_normal(d.zeros().shape)
    bal = energy_balance(d, u, 0.0)
    assert bal.relative < 1e-12


def test_energy_identity_scalar_with_interface():
    mesh = build_interval_mesh(-1, 1, 6, [0.0], [Material.scalar(2.0), Material.scalar(0.5)])
    d = DGSEM(mesh, build_basis(4), "scalar_advection", boundary="homogeneous_inflow")
    u = np.random.default_rng(1).standard_normal(d.zeros().shape)
    assert energy_balance(d, u, 0.0).relative < 1e-13


def test_threaded_rhs_is_identical():
    d1 = table1_disc(n=4, nx=8)
    d4 = table1_disc(n=4, nx=8)
    d4.threads = 4
    u = np.random.default_rng(5).standard_normal(d1.zeros().shape)
    np.testing.assert_array_equal(d1.rhs(u, 0.0), d4.rhs(u, 0.0))


def test_dimension_mismatch_rejected():
    mesh = build_interval_mesh(0, 1, 2)
    with pytest.raises(ValueError):
        DGSEM(mesh, build_basis(2), ModelKind.acoustic_2d, boundary="homogeneous_inflow")
    with pytest.raises(ValueError):
        DGSEM(mesh, build_basis(2), ModelKind.scalar_advection)
