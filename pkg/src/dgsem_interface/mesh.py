"""Interval and Cartesian quadrilateral meshes with material assignment.

Elements are affine images of the reference element, so the Jacobian and the
contravariant vectors ``Ja^i`` are constant per element. Coefficient jumps are
only allowed on element faces; builders reject or repair layouts that would
place a jump inside an element.

Faces always carry the normal of the positive coordinate direction, so the
"left" element of a face is the one at smaller x (or y). On material
interfaces at constant x this is the L -> R convention of the coupling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .models import Material

BOUNDARY = -1
_SNAP_TOL = 1.0e-12


@dataclass(frozen=True, eq=False)
class ElementGeometry:
    corners: np.ndarray  # (2,) in 1D, (4, 2) counter-clockwise in 2D
    jacobian: float
    contravariant: np.ndarray  # row i is Ja^i
    material_id: int

    @property
    def widths(self) -> np.ndarray:
        if self.corners.ndim == 1:
            return np.array([self.corners[1] - self.corners[0]])
        return self.corners[2] - self.corners[0]

    def metric_identity_residual(self, diff_matrix: np.ndarray) -> float:
        """``max_d |sum_i d(Ja^i_d)/d xi_i|`` with nodal ``Ja^i`` on the LGL grid."""
        n = diff_matrix.shape[0]
        dim = self.contravariant.shape[0]
        worst = 0.0
        for d in range(dim):
            res = np.zeros((n,) * dim)
            for i in range(dim):
                field = np.full((n,) * dim, self.contravariant[i, d])
                res += np.moveaxis(np.tensordot(diff_matrix, field, axes=(1, i)), 0, i)
            worst = max(worst, float(np.abs(res).max()))
        return worst


@dataclass(frozen=True)
class Face:
    left: int  # element index, or BOUNDARY
    right: int
    axis: int  # 0: normal +x, 1: normal +y
    coordinate: float
    boundary: str | None = None

    @property
    def is_boundary(self) -> bool:
        return self.left == BOUNDARY or self.right == BOUNDARY


@dataclass(frozen=True, eq=False)
class Mesh:
    dim: int
    shape: tuple[int, ...]
    bounds: tuple[tuple[float, float], ...]
    elements: tuple[ElementGeometry, ...]
    faces: tuple[Face, ...]
    materials: tuple[Material, ...]

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def material_ids(self) -> np.ndarray:
        return np.array([e.material_id for e in self.elements])

    def is_interface(self, face: Face) -> bool:
        if face.is_boundary:
            return False
        return self.elements[face.left].material_id != self.elements[face.right].material_id

    @property
    def interface_faces(self) -> tuple[Face, ...]:
        return tuple(f for f in self.faces if self.is_interface(f))

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.bounds]))

    def summary(self) -> str:
        lines = [
            f"{self.dim}D mesh, {self.n_elements} elements "
            f"({' x '.join(map(str, self.shape))}), {len(self.faces)} faces, "
            f"{len(self.interface_faces)} interface faces",
            "materials:",
        ]
        ids = self.material_ids
        for i, m in enumerate(self.materials):
            lines.append(f"  [{i}] rho = {m.rho:g}, c = {m.c:g}  ({int((ids == i).sum())} elements)")
        return "\n".join(lines)


def _interval_breaks(x_min, x_max, n_elements, interfaces) -> np.ndarray:
    length = x_max - x_min
    uniform = np.linspace(x_min, x_max, n_elements + 1)
    hit = all(np.abs(uniform - p).min() <= _SNAP_TOL * length for p in interfaces)
    if hit:
        for p in interfaces:
            uniform[np.argmin(np.abs(uniform - p))] = p
        return uniform
    edges = [x_min, *interfaces, x_max]
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        k = max(1, math.ceil(n_elements * (hi - lo) / length - _SNAP_TOL))
        pieces.append(np.linspace(lo, hi, k + 1)[:-1])
    return np.append(np.concatenate(pieces), x_max)


def build_interval_mesh(
    x_min: float,
    x_max: float,
    n_elements: int,
    interface_positions: Sequence[float] = (),
    material_of_region: Sequence[Material] | Mapping[int, Material] | None = None,
) -> Mesh:
    """1D mesh whose element boundaries contain every interface position.

    ``material_of_region`` gives one material per region between consecutive
    interfaces (a sequence, or a mapping from region index).
    """
    if n_elements < 2:
        raise ValueError("an interval mesh needs at least 2 elements")
    if not x_max > x_min:
        raise ValueError("empty interval")
    ifc = [float(p) for p in interface_positions]
    for p in ifc:
        if not (x_min < p < x_max):
            raise ValueError(f"interface at {p} must lie strictly inside ({x_min}, {x_max})")
    if any(b <= a for a, b in zip(ifc[:-1], ifc[1:])):
        raise ValueError("interface positions must be strictly increasing (regions overlap)")
    n_regions = len(ifc) + 1
    if material_of_region is None:
        material_of_region = [Material()] * n_regions
    if isinstance(material_of_region, Mapping):
        mats = [material_of_region[i] for i in range(n_regions)]
    else:
        mats = list(material_of_region)
    if len(mats) != n_regions:
        raise ValueError(f"need {n_regions} region materials, got {len(mats)}")

    # deduplicate materials so that equal neighbours are not interfaces
    table: list[Material] = []
    region_id = []
    for m in mats:
        if m not in table:
            table.append(m)
        region_id.append(table.index(m))

    breaks = _interval_breaks(x_min, x_max, n_elements, ifc)
    elements = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        region = int(np.searchsorted(ifc, 0.5 * (lo + hi)))
        h = hi - lo
        elements.append(
            ElementGeometry(
                corners=np.array([lo, hi]),
                jacobian=h / 2,
                contravariant=np.array([[1.0]]),
                material_id=region_id[region],
            )
        )
    k = len(elements)
    faces = [Face(BOUNDARY, 0, 0, float(breaks[0]), "xmin")]
    faces += [Face(i - 1, i, 0, float(breaks[i])) for i in range(1, k)]
    faces.append(Face(k - 1, BOUNDARY, 0, float(breaks[-1]), "xmax"))
    return Mesh(1, (k,), ((x_min, x_max),), tuple(elements), tuple(faces), tuple(table))


def build_cartesian_mesh(
    x_range: tuple[float, float],
    y_range: tuple[float, float],
    nx: int,
    ny: int,
    interface_x: float | None,
    materials: tuple[Material, Material],
) -> Mesh:
    """Tensor-product mesh; elements left of ``interface_x`` get ``materials[0]``.

    Element ``(i, j)`` has index ``i * ny + j``.
    """
    (x0, x1), (y0, y1) = x_range, y_range
    if nx < 1 or ny < 1:
        raise ValueError("need at least one element per direction")
    hx, hy = (x1 - x0) / nx, (y1 - y0) / ny
    xs = x0 + hx * np.arange(nx + 1)
    ys = y0 + hy * np.arange(ny + 1)
    xs[-1], ys[-1] = x1, y1
    if interface_x is not None:
        k = (interface_x - x0) / hx
        if abs(k - round(k)) > 1e-9:
            raise ValueError(
                f"interface_x = {interface_x} is not a grid line of the {nx}-cell "
                f"subdivision of [{x0}, {x1}] (spacing {hx})"
            )
        xs[int(round(k))] = interface_x
    m_left, m_right = materials
    table = [m_left] if m_left == m_right else [m_left, m_right]

    elements = []
    for i in range(nx):
        for j in range(ny):
            xa, xb, ya, yb = xs[i], xs[i + 1], ys[j], ys[j + 1]
            right_side = interface_x is not None and 0.5 * (xa + xb) > interface_x
            mid = len(table) - 1 if right_side else 0
            elements.append(
                ElementGeometry(
                    corners=np.array([[xa, ya], [xb, ya], [xb, yb], [xa, yb]]),
                    jacobian=(xb - xa) * (yb - ya) / 4,
                    contravariant=np.array([[(yb - ya) / 2, 0.0], [0.0, (xb - xa) / 2]]),
                    material_id=mid,
                )
            )

    def idx(i, j):
        return i * ny + j

    faces = []
    for i in range(nx + 1):
        for j in range(ny):
            left = idx(i - 1, j) if i > 0 else BOUNDARY
            right = idx(i, j) if i < nx else BOUNDARY
            tag = "xmin" if i == 0 else "xmax" if i == nx else None
            faces.append(Face(left, right, 0, float(xs[i]), tag))
    for j in range(ny + 1):
        for i in range(nx):
            left = idx(i, j - 1) if j > 0 else BOUNDARY
            right = idx(i, j) if j < ny else BOUNDARY
            tag = "ymin" if j == 0 else "ymax" if j == ny else None
            faces.append(Face(left, right, 1, float(ys[j]), tag))
    return Mesh(2, (nx, ny), (tuple(x_range), tuple(y_range)), tuple(elements), tuple(faces),
                tuple(table))
