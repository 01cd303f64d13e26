import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dgsem_interface.models import (
    Material,
    ModelKind,
    coefficient_matrices,
    normal_eigenstructure,
    normal_matrix,
    rh_compatible_state,
    symmetric_eigenvectors,
    symmetrizer,
)

pos = st.floats(0.05, 20.0)
angle = st.floats(0.0, 2 * np.pi)
KINDS = list(ModelKind)


def unit(kind, theta):
    return (np.cos(theta), np.sin(theta)) if kind.dim == 2 else (1.0 if np.cos(theta) >= 0 else -1.0,)


@pytest.mark.parametrize("kind", KINDS)
@given(rho=pos, c=pos, theta=angle)
def test_eigendecomposition_reconstructs_normal_matrix(kind, rho, c, theta):
    m = Material(rho, c)
    n = unit(kind, theta)
    eig = normal_eigenstructure(kind, m, n)
    a = normal_matrix(kind, m, n)
    np.testing.assert_allclose(eig.reconstruct(), a, atol=1e-12 * max(1, rho * c * c, 1 / rho))
    np.testing.assert_allclose(eig.P @ eig.P_inv, np.eye(kind.n_components), atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
@given(rho=pos, c=pos, theta=angle)
def test_symmetrizer_makes_matrices_symmetric(kind, rho, c, theta):
    m = Material(rho, c)
    s, s_inv = symmetrizer(kind, m)
    for a in coefficient_matrices(kind, m):
        sym = s_inv @ a @ s
        np.testing.assert_allclose(sym, sym.T, atol=1e-12 * np.abs(sym).max())
    ps = symmetric_eigenvectors(kind, unit(kind, theta))
    np.testing.assert_allclose(ps.T @ ps, np.eye(kind.n_components), atol=1e-14)


def test_eigenvalue_ordering_acoustics_2d():
    eig = normal_eigenstructure("acoustic_2d", Material(0.4, 0.7), (0.6, 0.8))
    np.testing.assert_allclose(eig.lam, [0.7, 0.0, -0.7])
    assert (eig.n_plus, eig.n_zero, eig.n_minus) == (1, 1, 1)


def test_scalar_negative_normal_flips_direction():
    eig = normal_eigenstructure("scalar_advection", Material.scalar(2.0), (-1.0,))
    assert eig.n_plus == 0 and eig.n_minus == 1 and eig.lam[0] == -2.0


def test_material_validation():
    with pytest.raises(ValueError):
        Material(rho=-1.0)
    with pytest.raises(ValueError):
        Material(c=0.0)
    assert Material(0.4, 0.7).impedance == pytest.approx(0.28)


def test_normal_must_be_unit():
    with pytest.raises(ValueError):
        normal_eigenstructure("acoustic_2d", Material(), (1.0, 1.0))
    with pytest.raises(ValueError):
        normal_eigenstructure("acoustic_2d", Material(), (1.0,))


@given(rho_l=pos, c_l=pos, rho_r=pos, c_r=pos, u=st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_rh_compatible_state_matches_normal_flux(rho_l, c_l, rho_r, c_r, u):
    ml, mr = Material(rho_l, c_l), Material(rho_r, c_r)
    ur = rh_compatible_state("acoustic_2d", u, ml, mr, (1.0, 0.0))
    fl = normal_matrix("acoustic_2d", ml, (1.0, 0.0)) @ u
    fr = normal_matrix("acoustic_2d", mr, (1.0, 0.0)) @ ur
    np.testing.assert_allclose(fl, fr, atol=1e-10 * max(1.0, np.abs(fl).max()))
    assert ur[2] == pytest.approx(u[2])
