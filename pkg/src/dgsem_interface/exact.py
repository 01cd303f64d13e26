"""Closed-form solutions for interface problems and their L2 energies.

All solution objects share one calling convention so they can serve as
initial data, boundary data and error references:

    sol(t, coords, material_ids) -> (..., m)

where ``coords`` is a tuple of coordinate arrays and ``material_ids`` picks
the branch (nonzero means the region right of the interface). This keeps the
value at interface nodes unambiguous. ``sol.at(t, *coords)`` chooses the
branch geometrically instead.

Plane waves have the form ``p = a psi(k . x - omega (t - t0))`` with velocity
``p k_hat / (rho c)`` and ``|k| = omega / c``. Amplitude ratios follow from
continuity of the normal flux ``A_x u`` at ``x = x_interface``: with
``Z = rho c`` and ``cos`` the x-direction cosines,

    r = (Z_L cos_i - Z_R cos_T) / (Z_L cos_i + Z_R cos_T),
    tau = (rho_R / rho_L) (1 + r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .models import Material, ModelKind, normal_matrix, symmetrizer

GAUSS_ORDER = 8
ENERGY_RTOL = 1.0e-8
ENERGY_MAX_LEVELS = 12

TRANSMISSION_RULES = ("rh", "printed")


class TotalInternalReflectionError(ValueError):
    pass


class QuadratureNotConverged(RuntimeError):
    pass


# --------------------------------------------------------------- wave shape


@dataclass(frozen=True)
class PlaneWaveParams:
    """Incident Gaussian wave packet.

    ``k`` is the direction as given; with ``normalize`` it is scaled to unit
    length before building wavevectors, otherwise it is used verbatim (and
    the resulting field is not an exact solution unless ``|k| = 1``).
    """

    amplitude: float = 1.0
    k: tuple[float, ...] = (0.5, math.sqrt(1.5))
    omega: float = 4.0 * math.pi
    t0: float = 3.0
    cycles: float = 4.0
    normalize: bool = True
    transmission: str = "rh"

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("frequency must be positive")
        if self.cycles <= 0:
            raise ValueError("the number of cycles must be positive")
        if self.transmission not in TRANSMISSION_RULES:
            raise ValueError(f"transmission rule must be one of {TRANSMISSION_RULES}")
        if np.linalg.norm(self.k) == 0:
            raise ValueError("wave direction must be nonzero")

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omega

    @property
    def sigma(self) -> float:
        return math.sqrt(-((self.cycles * self.period) ** 2) / (4.0 * math.log(1.0e-4)))

    @property
    def k_norm_sq(self) -> float:
        return float(np.dot(self.k, self.k))

    @property
    def direction(self) -> np.ndarray:
        k = np.asarray(self.k, dtype=float)
        return k / np.linalg.norm(k) if self.normalize else k

    def psi(self, s):
        return np.exp(-((np.asarray(s) / (self.omega * self.sigma)) ** 2))


def gaussian_pulse(center: float, width: float):
    """``x -> exp(-((x - center) / width)^2)``."""

    def pulse(x):
        return np.exp(-(((np.asarray(x) - center) / width) ** 2))

    return pulse


def reflection_transmission(m_left: Material, m_right: Material, cos_i: float, cos_t: float,
                            rule: str = "rh") -> tuple[float, float]:
    """Reflected and transmitted pressure amplitudes per unit incident amplitude.

    ``rule='printed'`` uses ``rho_R c_L`` in place of the flux-consistent
    transmitted numerator; it is kept to compare against and fails flux
    continuity whenever ``c_L != c_R`` or ``rho_L != 1``.
    """
    zl, zr = m_left.impedance, m_right.impedance
    denom = zl * cos_i + zr * cos_t
    r = (zl * cos_i - zr * cos_t) / denom
    if rule == "rh":
        tau = (m_right.rho / m_left.rho) * (1.0 + r)
    elif rule == "printed":
        tau = (zl * cos_i + m_right.rho * m_left.c * cos_i) / denom
    else:
        raise ValueError(f"unknown transmission rule {rule!r}")
    return float(r), float(tau)


# --------------------------------------------------------------- base class


@dataclass
class _Exact:
    kind: ModelKind
    m_left: Material
    m_right: Material
    interface_x: float

    def field(self, t: float, coords: tuple, right: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t: float, coords: tuple, material_ids) -> np.ndarray:
        right = np.asarray(material_ids) != 0
        return self.field(t, tuple(np.asarray(c, dtype=float) for c in coords), right)

    def at(self, t: float, *coords) -> np.ndarray:
        coords = tuple(np.asarray(c, dtype=float) for c in coords)
        return self.field(t, coords, coords[0] > self.interface_x)

    def flux_continuity_residual(self, t: float, tangential=None) -> float:
        """``max |A_L u(x_i^-) - A_R u(x_i^+)|`` along the interface."""
        n = (1.0,) + (0.0,) * (self.kind.dim - 1)
        x = np.full(1 if tangential is None else len(tangential), self.interface_x)
        coords = (x,) if self.kind.dim == 1 else (x, np.asarray(tangential, dtype=float))
        u_l = self.field(t, coords, np.zeros(x.shape, bool))
        u_r = self.field(t, coords, np.ones(x.shape, bool))
        a_l = normal_matrix(self.kind, self.m_left, n)
        a_r = normal_matrix(self.kind, self.m_right, n)
        return float(np.abs(u_l @ a_l.T - u_r @ a_r.T).max())


# -------------------------------------------------------------------- scalar


@dataclass
class ScalarInterfaceSolution(_Exact):
    """``u_t + a u_x = 0`` with ``a`` jumping at ``interface_x``.

    Left of the interface the pulse translates with ``a_L``; right of it the
    solution carries the RH-scaled trace ``(a_L / a_R) u(x_i^-, t - s/a_R)``.
    """

    pulse: object = None

    def __init__(self, a_left: float, a_right: float, pulse, interface_x: float = 0.0):
        super().__init__(ModelKind.scalar_advection, Material.scalar(a_left),
                         Material.scalar(a_right), interface_x)
        self.pulse = pulse

    def field(self, t, coords, right):
        x = coords[0] - self.interface_x
        a_l, a_r = self.m_left.c, self.m_right.c
        left_val = self.pulse(x + self.interface_x - a_l * t)
        right_val = (a_l / a_r) * self.pulse(a_l * x / a_r + self.interface_x - a_l * t)
        return np.where(right, right_val, left_val)[..., None]


def scalar_exact(x, t, a_left, a_right, pulse, interface_x=0.0):
    sol = ScalarInterfaceSolution(a_left, a_right, pulse, interface_x)
    return sol.at(t, x)[..., 0]


# ----------------------------------------------------------------- acoustics


@dataclass
class PlaneWaveScatter(_Exact):
    """Incident plus reflected wave on the left, transmitted on the right.

    Works in 1D (normal incidence, state ``(p, u)``) and 2D (``(p, u, v)``).
    """

    params: PlaneWaveParams = None
    k_incident: np.ndarray = field(default=None)
    k_reflected: np.ndarray = field(default=None)
    k_transmitted: np.ndarray = field(default=None)
    reflection: float = 0.0
    transmission: float = 0.0

    def __init__(self, params: PlaneWaveParams, m_left: Material, m_right: Material,
                 interface_x: float = 0.0, dim: int = 2):
        kind = ModelKind.acoustic_2d if dim == 2 else ModelKind.acoustic_1d
        super().__init__(kind, m_left, m_right, interface_x)
        self.params = params
        d = params.direction
        if dim == 1:
            d = np.array([1.0])
        elif d.size != 2:
            raise ValueError("2D scattering needs a 2-component direction")
        if d[0] <= 0:
            raise ValueError("the incident wave must travel towards the interface (k_x > 0)")
        w, cl, cr = params.omega, m_left.c, m_right.c
        self.k_incident = (w / cl) * d
        self.k_reflected = (w / cl) * d * np.r_[-1.0, np.ones(d.size - 1)]
        ky = d[1] if dim == 2 else 0.0
        arg = 1.0 - (cr / cl) ** 2 * ky**2
        if arg < 0:
            raise TotalInternalReflectionError(
                f"(c_R/c_L)^2 k_y^2 = {1 - arg:.6g} > 1: total internal reflection is not supported"
            )
        kt = [math.sqrt(arg)] + ([(cr / cl) * ky] if dim == 2 else [])
        self.k_transmitted = (w / cr) * np.array(kt)
        cos_i = self.k_incident[0] / np.linalg.norm(self.k_incident)
        cos_t = self.k_transmitted[0] / np.linalg.norm(self.k_transmitted)
        self.reflection, self.transmission = reflection_transmission(
            m_left, m_right, cos_i, cos_t, params.transmission
        )

    def _wave(self, t, coords, k, mat: Material, amp) -> np.ndarray:
        p = self.params
        # all phases agree with the incident one along the interface
        x = [coords[0] - self.interface_x] + list(coords[1:])
        phase = sum(kj * xj for kj, xj in zip(k, x)) + self.k_incident[0] * self.interface_x
        psi = amp * p.psi(phase - p.omega * (t - p.t0))
        # k c / omega is the unit direction unless the printed k is kept verbatim
        khat = k * mat.c / p.omega
        comps = [psi] + [psi * kj / mat.impedance for kj in khat]
        return np.stack(comps, axis=-1)

    def incident(self, t, coords):
        return self._wave(t, coords, self.k_incident, self.m_left, self.params.amplitude)

    def reflected(self, t, coords):
        a = self.params.amplitude * self.reflection
        return self._wave(t, coords, self.k_reflected, self.m_left, a)

    def transmitted(self, t, coords):
        a = self.params.amplitude * self.transmission
        return self._wave(t, coords, self.k_transmitted, self.m_right, a)

    def field(self, t, coords, right):
        left = self.incident(t, coords) + self.reflected(t, coords)
        return np.where(np.asarray(right)[..., None], self.transmitted(t, coords), left)


def acoustic_1d_scatter(m_left: Material, m_right: Material, omega: float = 4.0 * math.pi,
                        t0: float = 1.0, cycles: float = 4.0, amplitude: float = 1.0,
                        interface_x: float = 0.0, transmission: str = "rh") -> PlaneWaveScatter:
    """Right-going Gaussian pulse in 1D acoustics, centred at ``-c_L t0`` at ``t = 0``."""
    params = PlaneWaveParams(amplitude=amplitude, k=(1.0,), omega=omega, t0=t0, cycles=cycles,
                             transmission=transmission)
    return PlaneWaveScatter(params, m_left, m_right, interface_x, dim=1)


def plane_wave_scatter_2d(params: PlaneWaveParams, m_left: Material, m_right: Material,
                          interface_x: float = 0.0) -> PlaneWaveScatter:
    return PlaneWaveScatter(params, m_left, m_right, interface_x, dim=2)


def table1_params(**overrides) -> tuple[PlaneWaveParams, Material, Material]:
    """Incident wave and materials of the standard plane-wave scattering test."""
    params = PlaneWaveParams(**overrides)
    return params, Material(rho=1.0, c=1.0), Material(rho=0.4, c=0.7)


# -------------------------------------------------------------------- energy


def _split_cells(lo, hi, cut, n):
    if cut is not None and lo < cut < hi:
        return np.concatenate([np.linspace(lo, cut, n + 1)[:-1], np.linspace(cut, hi, n + 1)])
    return np.linspace(lo, hi, n + 1)


def _composite_gauss(edges, nodes, weights):
    a, b = edges[:-1, None], edges[1:, None]
    x = 0.5 * (a + b) + 0.5 * (b - a) * nodes[None, :]
    w = 0.5 * (b - a) * weights[None, :]
    return x.ravel(), w.ravel()


def _energy_at_level(sol: _Exact, t, domain, n, norm, order) -> float:
    gx, gw = np.polynomial.legendre.leggauss(order)
    axes = []
    for d, (lo, hi) in enumerate(domain):
        edges = _split_cells(lo, hi, sol.interface_x if d == 0 else None, n)
        axes.append(_composite_gauss(edges, gx, gw))
    if len(axes) == 1:
        coords = (axes[0][0],)
        wts = axes[0][1]
    else:
        x, y = np.meshgrid(axes[0][0], axes[1][0], indexing="ij")
        coords = (x, y)
        wts = np.outer(axes[0][1], axes[1][1])
    u = sol.at(t, *coords)
    if norm == "symmetrized":
        right = coords[0] > sol.interface_x
        sl = np.diag(symmetrizer(sol.kind, sol.m_left)[1])
        sr = np.diag(symmetrizer(sol.kind, sol.m_right)[1])
        u = u * np.where(right[..., None], sr, sl)
    elif norm != "plain":
        raise ValueError("norm must be 'symmetrized' or 'plain'")
    return float(((u**2).sum(-1) * wts).sum())


def exact_l2_energy(sol: _Exact, t: float, domain, norm: str = "symmetrized",
                    rtol: float = ENERGY_RTOL, max_levels: int = ENERGY_MAX_LEVELS,
                    base_cells: int = 4, order: int = GAUSS_ORDER) -> float:
    """``int |S^-1 u|^2`` (or ``int |u|^2``) by refined composite Gauss quadrature.

    Cells are split at the interface so each one sees a smooth integrand; the
    cell count doubles until two successive values agree to ``rtol``.
    """
    domain = [tuple(map(float, r)) for r in domain]
    prev = _energy_at_level(sol, t, domain, base_cells, norm, order)
    n = base_cells
    for _ in range(max_levels):
        n *= 2
        cur = _energy_at_level(sol, t, domain, n, norm, order)
        if abs(cur - prev) <= rtol * abs(cur) or cur == prev:
            return cur
        prev = cur
    raise QuadratureNotConverged(
        f"exact energy quadrature did not converge in {max_levels} refinements at t = {t}"
    )
