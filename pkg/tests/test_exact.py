import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dgsem_interface.exact import (
    PlaneWaveParams,
    PlaneWaveScatter,
    QuadratureNotConverged,
    TotalInternalReflectionError,
    acoustic_1d_scatter,
    exact_l2_energy,
    gaussian_pulse,
    plane_wave_scatter_2d,
    scalar_exact,
    table1_params,
)
from dgsem_interface.models import Material, coefficient_matrices

PARAMS, ML, MR = table1_params()
DOMAIN = [(-5, 5), (-5, 5)]


def test_sigma_formula():
    p = PlaneWaveParams()
    t = 2 * math.pi / p.omega
    assert p.sigma**2 == pytest.approx(-((4 * t) ** 2) / (4 * math.log(1e-4)))
    # the pulse drops to 1e-4 at half its duration
    assert p.psi(p.omega * 2 * t) == pytest.approx(1e-4)


def test_printed_direction_is_reported_and_normalized():
    p = PlaneWaveParams()
    assert p.k_norm_sq == pytest.approx(1.75)
    assert np.linalg.norm(p.direction) == pytest.approx(1.0)
    raw = PlaneWaveParams(normalize=False)
    np.testing.assert_allclose(raw.direction, [0.5, math.sqrt(1.5)])


def test_equal_materials_no_reflection():
    sol = plane_wave_scatter_2d(PARAMS, ML, ML)
    assert sol.reflection == pytest.approx(0.0, abs=1e-15)
    assert sol.transmission == pytest.approx(1.0)
    x, y = np.meshgrid(np.linspace(-5, 5, 9), np.linspace(-5, 5, 9))
    np.testing.assert_allclose(sol.field(3.5, (x, y), x > 0), sol.incident(3.5, (x, y)),
                               atol=1e-15)


@pytest.mark.parametrize("t", [0.0, 2.5, 4.0, 6.5])
def test_table1_flux_continuity(t):
    sol = plane_wave_scatter_2d(PARAMS, ML, MR)
    assert sol.flux_continuity_residual(t, np.linspace(-5, 5, 201)) < 1e-10


def test_printed_transmission_rule_breaks_flux_continuity():
    sol = plane_wave_scatter_2d(PlaneWaveParams(transmission="printed"), ML, MR)
    ys = np.linspace(-5, 5, 201)
    worst = max(sol.flux_continuity_residual(t, ys) for t in np.linspace(0, 8, 17))
    assert worst > 0.1


def test_snell_tangential_wavenumber():
    sol = plane_wave_scatter_2d(PARAMS, ML, MR)
    assert sol.k_transmitted[1] == pytest.approx(sol.k_incident[1])
    assert np.linalg.norm(sol.k_transmitted) == pytest.approx(PARAMS.omega / MR.c)
    assert sol.k_reflected[0] == -sol.k_incident[0]


def pde_residual(sol, t, x, y, right, h=1e-4):
    def f(tt, xx, yy):
        return sol.field(tt, (np.atleast_1d(xx), np.atleast_1d(yy)), np.atleast_1d(right))[0]

    # fourth-order central differences
    def d(g, s):
        return (-g(2 * s) + 8 * g(s) - 8 * g(-s) + g(-2 * s)) / (12 * h)

    ut = d(lambda s: f(t + s, x, y), h)
    ux = d(lambda s: f(t, x + s, y), h)
    uy = d(lambda s: f(t, x, y + s), h)
    mat = MR if right else ML
    a1, a2 = coefficient_matrices("acoustic_2d", mat)
    return np.abs(ut + a1 @ ux + a2 @ uy).max(), np.abs(ut).max() + np.abs(ux).max()


@given(st.floats(0, 8), st.floats(-5, 5), st.floats(-5, 5))
def test_each_branch_solves_the_pde(t, x, y):
    sol = plane_wave_scatter_2d(PARAMS, ML, MR)
    for right in (False, True):
        res, scale = pde_residual(sol, t, x, y, right)
        assert res <= 1e-6 * max(scale, 1.0)


def test_total_internal_reflection_rejected():
    with pytest.raises(TotalInternalReflectionError):
        plane_wave_scatter_2d(PlaneWaveParams(k=(0.2, 0.98)), Material(1, 1), Material(1, 3))


def test_wave_must_approach_interface():
    with pytest.raises(ValueError):
        plane_wave_scatter_2d(PlaneWaveParams(k=(-0.5, 0.5)), ML, MR)


def test_early_time_is_incident_only():
    sol = plane_wave_scatter_2d(PARAMS, ML, MR)
    x, y = np.meshgrid(np.linspace(-5, 0, 41), np.linspace(-5, 5, 81))
    assert np.abs(sol.reflected(-5.0, (x, y))).max() < 1e-8
    assert np.abs(sol.transmitted(-5.0, (-x, y))).max() < 1e-8


def test_acoustic_1d_ratios():
    sol = acoustic_1d_scatter(ML, MR)
    z_l, z_r = ML.impedance, MR.impedance
    assert sol.reflection == pytest.approx((z_l - z_r) / (z_l + z_r))
    assert sol.transmission == pytest.approx(MR.rho / ML.rho * (1 + sol.reflection))
    assert max(sol.flux_continuity_residual(t) for t in np.linspace(0, 3, 31)) < 1e-12
    same = acoustic_1d_scatter(ML, ML)
    assert same.reflection == 0 and same.transmission == pytest.approx(1)


def test_acoustic_1d_before_interaction():
    sol = acoustic_1d_scatter(ML, MR, t0=1.0)
    x = np.linspace(-2, 0, 50)
    np.testing.assert_allclose(sol.at(-1.0, x), sol.incident(-1.0, (x,)), atol=1e-10)


def test_scalar_translation_and_initial_state():
    pulse = gaussian_pulse(-0.5, 0.1)
    x = np.linspace(-1, 1, 101)
    np.testing.assert_allclose(scalar_exact(x, 0.3, 1.5, 1.5, pulse), pulse(x - 0.45))
    np.testing.assert_allclose(scalar_exact(x[x < 0], 0.0, 2.0, 1.0, pulse), pulse(x[x < 0]))


def test_scalar_transmitted_pulse_amplitude_and_width():
    pulse = gaussian_pulse(-0.5, 0.1)
    x = np.linspace(1e-9, 1, 20001)
    u = scalar_exact(x, 0.5, 2.0, 1.0, pulse)
    assert u.max() == pytest.approx(2.0, rel=1e-6)
    above = x[u > 2.0 * math.exp(-1)]
    assert above.max() - above.min() == pytest.approx(0.1, abs=1e-3)  # half of 2 * 0.1
    # flux a u is continuous across the interface
    for t in (0.2, 0.25, 0.3):
        assert 2.0 * scalar_exact(-1e-12, t, 2.0, 1.0, pulse) == pytest.approx(
            1.0 * scalar_exact(1e-12, t, 2.0, 1.0, pulse), rel=1e-8)


def test_zero_amplitude_energy():
    sol = plane_wave_scatter_2d(PlaneWaveParams(amplitude=0.0), ML, MR)
    assert exact_l2_energy(sol, 3.0, DOMAIN) == 0.0


def test_energy_quadrature_against_closed_form():
    # single material, pulse well inside: int psi^2 (1 + 1) over a line
    p = PlaneWaveParams(k=(1.0, 0.0), t0=0.0)
    sol = PlaneWaveScatter(p, ML, ML)
    e = exact_l2_energy(sol, 0.0, [(-5, 5), (-1, 1)], norm="plain")
    width = p.sigma  # psi(omega x) = exp(-x^2 / sigma^2)
    assert e == pytest.approx(2.0 * 2.0 * width * math.sqrt(math.pi / 2), rel=1e-8)


def test_energy_quadrature_refinement_limit():
    sol = plane_wave_scatter_2d(PARAMS, ML, MR)
    with pytest.raises(QuadratureNotConverged):
        exact_l2_energy(sol, 4.0, DOMAIN, max_levels=1, base_cells=1, order=2)


def test_table1_exact_energy_peaks_between_4_and_5():
    sol = plane_wave_scatter_2d(PARAMS, ML, MR)
    ts = np.linspace(0, 8, 33)
    e = [exact_l2_energy(sol, t, DOMAIN) for t in ts]
    assert 4.0 <= ts[int(np.argmax(e))] <= 5.0
