"""Coefficient matrices, symmetrizers and eigenstructure per material.

Three models are supported:

* ``scalar_advection``: ``u_t + a u_x = 0`` with ``a = Material.c``,
* ``acoustic_1d``: state ``(p, u)``,
* ``acoustic_2d``: state ``(p, u, v)``, the 2D reduction of linear acoustics.

For acoustics the matrices are

    A_j[0, j+1] = rho c^2,   A_j[j+1, 0] = 1/rho,

and ``S = diag(c, 1/rho, ...)`` makes ``S^-1 A_j S`` symmetric. All
eigendecompositions are closed form. The symmetrized eigenvectors are
orthonormal and depend on the normal only, so characteristic variables
``w = P^-1 u = P_s^T S^-1 u`` are defined the same way on both sides of a
material interface.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

SQRT_HALF = np.sqrt(0.5)


class ModelKind(str, enum.Enum):
    scalar_advection = "scalar_advection"
    acoustic_1d = "acoustic_1d"
    acoustic_2d = "acoustic_2d"

    @property
    def n_components(self) -> int:
        return {"scalar_advection": 1, "acoustic_1d": 2, "acoustic_2d": 3}[self.value]

    @property
    def dim(self) -> int:
        return 2 if self is ModelKind.acoustic_2d else 1


@dataclass(frozen=True)
class Material:
    """Piecewise-constant physical parameters.

    For scalar advection only ``c`` is used, as the wave speed ``a``.
    """

    rho: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not (self.rho > 0 and np.isfinite(self.rho)):
            raise ValueError(f"density must be positive, got {self.rho}")
        if not (self.c > 0 and np.isfinite(self.c)):
            raise ValueError(f"wave speed must be positive, got {self.c}")

    @classmethod
    def scalar(cls, a: float) -> "Material":
        return cls(rho=1.0, c=a)

    @property
    def impedance(self) -> float:
        return self.rho * self.c


@dataclass(frozen=True, eq=False)
class EigenStructure:
    P: np.ndarray
    P_inv: np.ndarray
    lam: np.ndarray
    n_plus: int
    n_zero: int

    @property
    def n_minus(self) -> int:
        return self.lam.size - self.n_plus - self.n_zero

    @property
    def plus(self) -> slice:
        return slice(0, self.n_plus)

    @property
    def zero(self) -> slice:
        return slice(self.n_plus, self.n_plus + self.n_zero)

    @property
    def minus(self) -> slice:
        return slice(self.n_plus + self.n_zero, self.lam.size)

    def reconstruct(self) -> np.ndarray:
        return self.P @ np.diag(self.lam) @ self.P_inv


def _kind(kind) -> ModelKind:
    return ModelKind(kind)


def coefficient_matrices(kind, m: Material) -> list[np.ndarray]:
    kind = _kind(kind)
    if kind is ModelKind.scalar_advection:
        return [np.array([[m.c]])]
    n = kind.n_components
    mats = []
    for j in range(kind.dim):
        a = np.zeros((n, n))
        a[0, j + 1] = m.rho * m.c**2
        a[j + 1, 0] = 1.0 / m.rho
        mats.append(a)
    return mats


def normal_matrix(kind, m: Material, normal) -> np.ndarray:
    """``A_n = sum_j n_j A_j``."""
    normal = np.atleast_1d(np.asarray(normal, dtype=float))
    mats = coefficient_matrices(kind, m)
    return sum(nj * a for nj, a in zip(normal, mats))


def symmetrizer(kind, m: Material) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(S, S_inv)``."""
    kind = _kind(kind)
    if kind is ModelKind.scalar_advection:
        return np.eye(1), np.eye(1)
    d = np.array([m.c] + [1.0 / m.rho] * kind.dim)
    return np.diag(d), np.diag(1.0 / d)


def _check_normal(kind: ModelKind, normal) -> np.ndarray:
    normal = np.atleast_1d(np.asarray(normal, dtype=float))
    if normal.size != kind.dim:
        raise ValueError(f"{kind.value} needs a {kind.dim}-component normal")
    if abs(np.linalg.norm(normal) - 1.0) > 1e-12:
        raise ValueError(f"normal must have unit length, got |n| = {np.linalg.norm(normal)}")
    return normal


def symmetric_eigenvectors(kind, normal) -> np.ndarray:
    """Orthonormal eigenvectors of the symmetrized normal matrix.

    Columns are ordered by decreasing eigenvalue: ``+c``, (``0``), ``-c``.
    """
    kind = _kind(kind)
    normal = _check_normal(kind, normal)
    if kind is ModelKind.scalar_advection:
        return np.eye(1)
    if kind is ModelKind.acoustic_1d:
        n = normal[0]
        return SQRT_HALF * np.array([[1.0, -1.0], [n, n]])
    nx, ny = normal
    return np.array(
        [
            [SQRT_HALF, 0.0, -SQRT_HALF],
            [SQRT_HALF * nx, -ny, SQRT_HALF * nx],
            [SQRT_HALF * ny, nx, SQRT_HALF * ny],
        ]
    )


def normal_eigenstructure(kind, m: Material, normal, symmetrized: bool = False) -> EigenStructure:
    """Closed-form eigendecomposition of ``A_n`` (or of ``S^-1 A_n S``).

    The physical eigenvectors are ``P = S P_s`` so that ``P^-1 = P_s^T S^-1``.
    """
    kind = _kind(kind)
    normal = _check_normal(kind, normal)
    ps = symmetric_eigenvectors(kind, normal)
    if kind is ModelKind.scalar_advection:
        speed = m.c * normal[0]
        lam = np.array([speed])
        n_plus = int(speed > 0)
        # a negative speed makes the single characteristic left-going
        return EigenStructure(P=ps, P_inv=ps.T.copy(), lam=lam, n_plus=n_plus, n_zero=0)
    if kind is ModelKind.acoustic_1d:
        lam = np.array([m.c, -m.c])
        n_zero = 0
    else:
        lam = np.array([m.c, 0.0, -m.c])
        n_zero = 1
    if symmetrized:
        return EigenStructure(P=ps, P_inv=ps.T.copy(), lam=lam, n_plus=1, n_zero=n_zero)
    s, s_inv = symmetrizer(kind, m)
    return EigenStructure(P=s @ ps, P_inv=ps.T @ s_inv, lam=lam, n_plus=1, n_zero=n_zero)


def max_wave_speed(kind, m: Material) -> float:
    return float(m.c)


def rh_compatible_state(kind, u_left, m_left: Material, m_right: Material, normal) -> np.ndarray:
    """A right state ``u_R`` with ``A_R,n u_R = A_L,n u_L``.

    Components in the null space of ``A_n`` (tangential velocity) are copied.
    """
    kind = _kind(kind)
    u_left = np.asarray(u_left, dtype=float)
    a_l = normal_matrix(kind, m_left, normal)
    a_r = normal_matrix(kind, m_right, normal)
    u_r = np.linalg.pinv(a_r) @ (a_l @ u_left)
    # add back the part of u_left that A_R cannot see
    null = np.eye(kind.n_components) - np.linalg.pinv(a_r) @ a_r
    return u_r + null @ u_left
