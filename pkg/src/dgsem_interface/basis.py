"""Legendre-Gauss-Lobatto collocation operators on the reference interval [-1, 1].

The nodal basis is built once per degree and shared by every element. The
differentiation matrix ``D`` and the diagonal mass matrix ``M = diag(w)``
satisfy the summation-by-parts property

    M D + D^T M = B,    B = diag(-1, 0, ..., 0, 1),

which is what makes the discrete energy estimate mimic integration by parts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

NEWTON_TOL = 1.0e-15
NEWTON_MAXITER = 100


@dataclass(frozen=True, eq=False)
class LglBasis:
    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    diff_matrix: np.ndarray
    barycentric_weights: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.degree + 1

    @property
    def mass(self) -> np.ndarray:
        return np.diag(self.weights)

    @property
    def boundary_matrix(self) -> np.ndarray:
        b = np.zeros((self.n_nodes, self.n_nodes))
        b[0, 0] = -1.0
        b[-1, -1] = 1.0
        return b

    def sbp_defect(self) -> float:
        """Largest entry of ``M D + D^T M - B``; zero up to round-off."""
        m = self.mass
        r = m @ self.diff_matrix + self.diff_matrix.T @ m - self.boundary_matrix
        return float(np.abs(r).max())


def _legendre_and_previous(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(P_n(x), P_{n-1}(x))`` by the three-term recurrence."""
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    return p, p_prev


def lgl_nodes_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    """LGL nodes (roots of ``(1 - x^2) P_n'(x)``) and quadrature weights.

    Newton iteration from Chebyshev-Gauss-Lobatto guesses, then the nodes are
    symmetrised about the origin.
    """
    if n < 1:
        raise ValueError(f"LGL basis needs degree >= 1, got {n}")
    x = -np.cos(np.pi * np.arange(n + 1) / n)
    for _ in range(NEWTON_MAXITER):
        p, p_prev = _legendre_and_previous(n, x)
        dx = (x * p - p_prev) / ((n + 1) * p)
        x = x - dx
        if np.abs(dx).max() < NEWTON_TOL:
            break
    else:
        raise RuntimeError(f"LGL Newton iteration did not converge for N={n}")

    x = 0.5 * (x - x[::-1])
    x[0], x[-1] = -1.0, 1.0
    if n % 2 == 0:
        x[n // 2] = 0.0
    p, _ = _legendre_and_previous(n, x)
    w = 2.0 / (n * (n + 1) * p**2)
    w = 0.5 * (w + w[::-1])
    return x, w


def barycentric_weights(x: np.ndarray) -> np.ndarray:
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / diff.prod(axis=1)


def differentiation_matrix(x: np.ndarray, bw: np.ndarray) -> np.ndarray:
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    d = (bw[None, :] / bw[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    # negative-sum trick: rows annihilate constants
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


@lru_cache(maxsize=None)
def build_basis(n: int) -> LglBasis:
    x, w = lgl_nodes_weights(n)
    bw = barycentric_weights(x)
    d = differentiation_matrix(x, bw)
    for arr in (x, w, bw, d):
        arr.setflags(write=False)
    return LglBasis(degree=n, nodes=x, weights=w, diff_matrix=d, barycentric_weights=bw)


def differentiate(basis: LglBasis, values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape[0] != basis.n_nodes:
        raise ValueError(
            f"expected {basis.n_nodes} nodal values, got {values.shape[0]}"
        )
    return basis.diff_matrix @ values


def interpolation_matrix(basis: LglBasis, xi) -> np.ndarray:
    """Rows evaluate the nodal interpolant at each point of ``xi``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xi < -1.0) or np.any(xi > 1.0):
        raise ValueError("interpolation points must lie in [-1, 1]")
    x, bw = basis.nodes, basis.barycentric_weights
    diff = xi[:, None] - x[None, :]
    # points within round-off of a node take the nodal value (avoids overflow)
    exact = np.abs(diff) <= 4.0 * np.finfo(float).eps
    diff[exact] = 1.0
    t = bw[None, :] / diff
    out = t / t.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    out[hit] = exact[hit].astype(float)
    return out


def interpolate(basis: LglBasis, values, xi: float) -> float:
    """Barycentric evaluation of the interpolant through ``values`` at ``xi``."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] != basis.n_nodes:
        raise ValueError(
            f"expected {basis.n_nodes} nodal values, got {values.shape[0]}"
        )
    return float(interpolation_matrix(basis, xi)[0] @ values)
