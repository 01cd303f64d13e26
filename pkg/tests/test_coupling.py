import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dgsem_interface.coupling import (
    IllPosedInterfaceError,
    build_coupling,
    build_trace,
    flux_matrices,
    rh_residual,
    solve_starred_states,
    upwind_flux,
)
from dgsem_interface.models import Material, normal_eigenstructure, normal_matrix

pos = st.floats(0.05, 20.0)
vec3 = st.lists(st.floats(-10, 10), min_size=3, max_size=3)
TABLE1 = (Material(1.0, 1.0), Material(0.4, 0.7))


def test_scalar_starred_state_is_rh_value():
    op = build_coupling("scalar_advection", Material.scalar(1.0), Material.scalar(2.0), (1.0,))
    wp, wm = solve_starred_states(op, [[1.0]], np.zeros((1, 0)))
    assert wp[0, 0] == pytest.approx(0.5)
    assert wm.shape == (1, 0)
    assert op.diag_flag


def test_equal_materials_give_identity_coupling():
    op = build_coupling("acoustic_2d", Material(2.0, 3.0), Material(2.0, 3.0), (1.0, 0.0))
    np.testing.assert_allclose(op.M, np.eye(2), atol=1e-14)
    assert op.diag_flag


def test_impedance_jump_couples_characteristics():
    op = build_coupling("acoustic_2d", *TABLE1, (1.0, 0.0))
    assert not op.diag_flag
    assert "diag_flag = False" in op.report()


def test_impedance_matched_pair_is_diagonal():
    # rho c equal on both sides: no reflection
    op = build_coupling("acoustic_1d", Material(1.0, 1.0), Material(2.0, 0.5), (1.0,))
    assert op.diag_flag


@pytest.mark.parametrize("kind,n", [("acoustic_1d", (1.0,)), ("acoustic_2d", (0.6, 0.8))])
@given(rho_l=pos, c_l=pos, rho_r=pos, c_r=pos, ul=vec3, ur=vec3)
def test_left_and_right_reconstructions_satisfy_rh(kind, n, rho_l, c_l, rho_r, c_r, ul, ur):
    m = 2 if kind == "acoustic_1d" else 3
    op = build_coupling(kind, Material(rho_l, c_l), Material(rho_r, c_r), n)
    tr = build_trace(op, ul[:m], ur[:m])
    scale = max(1.0, np.abs(tr.F_star).max(), max(rho_l * c_l**2, rho_r * c_r**2) * 10)
    assert rh_residual(tr).max() < 1e-11 * scale


@given(rho=pos, c=pos, ul=vec3, ur=vec3)
def test_single_material_flux_is_classical_upwind(rho, c, ul, ur):
    m = Material(rho, c)
    n = (0.6, -0.8)
    eig = normal_eigenstructure("acoustic_2d", m, n)
    a_plus = eig.P @ np.diag(np.maximum(eig.lam, 0)) @ eig.P_inv
    a_minus = eig.P @ np.diag(np.minimum(eig.lam, 0)) @ eig.P_inv
    expected = a_plus @ ul + a_minus @ ur
    got = upwind_flux("acoustic_2d", m, m, ul, ur, n, verify=True)
    np.testing.assert_allclose(got, expected, atol=1e-11 * max(1, rho * c * c, 1 / rho) * 30)


@given(ul=vec3)
def test_flux_consistency_for_rh_states(ul):
    from dgsem_interface.models import rh_compatible_state

    ur = rh_compatible_state("acoustic_2d", ul, *TABLE1, (1.0, 0.0))
    f = upwind_flux("acoustic_2d", *TABLE1, ul, ur, (1.0, 0.0))
    np.testing.assert_allclose(f, normal_matrix("acoustic_2d", TABLE1[0], (1.0, 0.0)) @ ul,
                               atol=1e-12 * max(1, np.abs(ul).max()))


def test_flux_matrices_reproduce_flux():
    rng = np.random.default_rng(3)
    cl, cr = flux_matrices("acoustic_2d", *TABLE1, (1.0, 0.0))
    for _ in range(5):
        ul, ur = rng.standard_normal(3), rng.standard_normal(3)
        np.testing.assert_allclose(cl @ ul + cr @ ur,
                                   upwind_flux("acoustic_2d", *TABLE1, ul, ur, (1.0, 0.0)),
                                   atol=1e-14)


def test_batched_nodes():
    rng = np.random.default_rng(0)
    ul, ur = rng.standard_normal((7, 3)), rng.standard_normal((7, 3))
    f = upwind_flux("acoustic_2d", *TABLE1, ul, ur, (1.0, 0.0))
    assert f.shape == (7, 3)
    np.testing.assert_allclose(f[4], upwind_flux("acoustic_2d", *TABLE1, ul[4], ur[4], (1.0, 0.0)))


def test_sign_change_across_interface_rejected(monkeypatch):
    import dgsem_interface.coupling as cp

    right = Material.scalar(2.0)
    orig = cp.normal_eigenstructure

    def flipped(kind, m, normal, symmetrized=False):
        # pretend the right material advects against the normal
        return orig(kind, m, (-1.0,) if m is right else normal)

    monkeypatch.setattr(cp, "normal_eigenstructure", flipped)
    cp._build_coupling_cached.cache_clear()
    with pytest.raises(IllPosedInterfaceError, match="signs change"):
        build_coupling("scalar_advection", Material.scalar(1.0), right, (1.0,))
    cp._build_coupling_cached.cache_clear()
