"""Periodicity cell, epsilon-tiled micro grid and cell averaging.

All grids are uniform, cell-centred and indexed with numpy's C order.  Phase
labels are ``1`` (tissue) and ``2`` (blood).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

TISSUE = 1
BLOOD = 2

_ALIGN_TOL = 1e-9


class GeometryError(ValueError):
    """Raised for inadmissible cell geometries or tilings."""


class AlignmentError(GeometryError):
    pass


class InteriorityError(GeometryError):
    pass


class ConnectivityError(GeometryError):
    pass


class TilingError(GeometryError):
    pass


@dataclass(frozen=True)
class InclusionSpec:
    """Axis-aligned box ``center +- halfwidth`` inside the unit cell."""

    center: tuple[float, ...]
    halfwidth: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in self.center)
        w = tuple(float(v) for v in self.halfwidth)
        if len(c) != len(w):
            raise GeometryError("inclusion center and halfwidth differ in length")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "halfwidth", w)

    @property
    def dim(self) -> int:
        return len(self.center)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center)
        w = np.asarray(self.halfwidth)
        return c - w, c + w


@dataclass
class UnitCellGeometry:
    """Discretised periodicity cell Y = Y1 u Y2 u Sigma.

    ``faces`` lists interface faces as rows ``(tissue_cell, blood_cell, axis,
    orientation)`` with flat cell indices; ``orientation`` is +1 when the blood
    cell sits on the +axis side of the tissue cell.
    """

    n: int
    dim: int
    chi: np.ndarray
    faces: np.ndarray
    vol_Y1: float
    vol_Y2: float
    area_Sigma: float
    inclusions: tuple[InclusionSpec, ...] = field(default=())

    @property
    def dy(self) -> float:
        return (1.0 / self.n) ** self.dim

    @property
    def dsigma(self) -> float:
        return (1.0 / self.n) ** (self.dim - 1)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def tissue_cells(self) -> np.ndarray:
        return np.flatnonzero(self.chi.ravel() == TISSUE)

    @property
    def blood_cells(self) -> np.ndarray:
        return np.flatnonzero(self.chi.ravel() == BLOOD)

    def centers(self) -> np.ndarray:
        """Cell centres, shape ``(n**dim, dim)``."""
        return grid_centers(self.n, self.dim)

    def interface_faces_of(self, phase: int) -> np.ndarray:
        """Flat index of the ``phase`` cell adjacent to each interface face."""
        return self.faces[:, 0] if phase == TISSUE else self.faces[:, 1]


@dataclass
class MicroGrid:
    """Unit box covered by ``K**dim`` copies of the periodicity cell, eps = 1/K."""

    cell: UnitCellGeometry
    K: int
    mask: np.ndarray

    @property
    def eps(self) -> float:
        return 1.0 / self.K

    @property
    def dim(self) -> int:
        return self.cell.dim

    @property
    def N(self) -> int:
        return self.K * self.cell.n

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.dim

    @property
    def dx(self) -> float:
        return self.h ** self.dim

    def centers(self) -> np.ndarray:
        return grid_centers(self.N, self.dim)

    def boundary_face_counts(self) -> np.ndarray:
        """Number of faces each cell shares with the outer boundary of the box."""
        counts = np.zeros(self.shape, dtype=int)
        for ax in range(self.dim):
            lo = [slice(None)] * self.dim
            hi = [slice(None)] * self.dim
            lo[ax] = 0
            hi[ax] = -1
            counts[tuple(lo)] += 1
            counts[tuple(hi)] += 1
        return counts.ravel()


def grid_centers(n: int, dim: int) -> np.ndarray:
    x = (np.arange(n) + 0.5) / n
    mesh = np.meshgrid(*([x] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def neighbour_pairs(shape: Sequence[int], axis: int, periodic: bool) -> tuple[np.ndarray, np.ndarray]:
    """Flat indices ``(p, q)`` of all pairs with ``q = p + e_axis``."""
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    q = np.roll(idx, -1, axis=axis)
    if periodic:
        return idx.ravel(), q.ravel()
    keep = [slice(None)] * len(shape)
    keep[axis] = slice(0, shape[axis] - 1)
    keep = tuple(keep)
    return idx[keep].ravel(), q[keep].ravel()


def _check_box(spec: InclusionSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = spec.bounds()
    if np.any(np.asarray(spec.halfwidth) <= 0):
        raise GeometryError(f"inclusion halfwidth must be positive, got {spec.halfwidth}")
    if np.any(lo <= _ALIGN_TOL) or np.any(hi >= 1.0 - _ALIGN_TOL):
        raise InteriorityError(
            f"inclusion [{lo}, {hi}] must lie strictly inside the unit cell"
        )
    ilo, ihi = lo * n, hi * n
    if np.any(np.abs(ilo - np.round(ilo)) > _ALIGN_TOL) or np.any(
        np.abs(ihi - np.round(ihi)) > _ALIGN_TOL
    ):
        raise AlignmentError(
            f"inclusion faces {lo}, {hi} are not multiples of 1/{n}"
        )
    return np.round(ilo).astype(int), np.round(ihi).astype(int)


def build_unit_cell(
    spec: InclusionSpec | Sequence[InclusionSpec] | None, n: int, d: int = 2
) -> UnitCellGeometry:
    """Rasterise one or more aligned boxes on an ``n**d`` periodic cell grid.

    ``spec=None`` (or an empty sequence) gives a cell without inclusion.
    """
    if d not in (2, 3):
        raise GeometryError(f"dimension must be 2 or 3, got {d}")
    if n < 2:
        raise GeometryError(f"resolution must be at least 2, got {n}")
    if spec is None:
        specs: tuple[InclusionSpec, ...] = ()
    elif isinstance(spec, InclusionSpec):
        specs = (spec,)
    else:
        specs = tuple(spec)

    chi = np.full((n,) * d, TISSUE, dtype=np.int8)
    for s in specs:
        if s.dim != d:
            raise GeometryError(f"inclusion has dimension {s.dim}, cell has {d}")
        ilo, ihi = _check_box(s, n)
        sl = tuple(slice(a, b) for a, b in zip(ilo, ihi))
        if np.any(chi[sl] == BLOOD):
            raise GeometryError("inclusions must be disjoint")
        chi[sl] = BLOOD

    _check_connected(chi)

    flat = chi.ravel()
    rows = []
    for ax in range(d):
        p, q = neighbour_pairs(chi.shape, ax, periodic=True)
        cp, cq = flat[p], flat[q]
        plus = (cp == TISSUE) & (cq == BLOOD)
        minus = (cp == BLOOD) & (cq == TISSUE)
        rows.append(np.column_stack([p[plus], q[plus], np.full(plus.sum(), ax), np.ones(plus.sum(), int)]))
        rows.append(np.column_stack([q[minus], p[minus], np.full(minus.sum(), ax), -np.ones(minus.sum(), int)]))
    faces = np.concatenate(rows).astype(np.int64) if rows else np.zeros((0, 4), np.int64)

    n_blood = int(np.count_nonzero(flat == BLOOD))
    dy = (1.0 / n) ** d
    vol_Y2 = n_blood * dy
    vol_Y1 = (flat.size - n_blood) * dy
    area = len(faces) * (1.0 / n) ** (d - 1)
    return UnitCellGeometry(
        n=n, dim=d, chi=chi, faces=faces, vol_Y1=vol_Y1, vol_Y2=vol_Y2,
        area_Sigma=area, inclusions=specs,
    )


def _check_connected(chi: np.ndarray) -> None:
    # tissue phase must be face-connected on the torus
    flat = chi.ravel()
    tissue = np.flatnonzero(flat == TISSUE)
    if tissue.size == 0:
        raise ConnectivityError("tissue phase Y1 is empty")
    local = -np.ones(flat.size, dtype=np.int64)
    local[tissue] = np.arange(tissue.size)
    rows, cols = [], []
    for ax in range(chi.ndim):
        p, q = neighbour_pairs(chi.shape, ax, periodic=True)
        keep = (local[p] >= 0) & (local[q] >= 0)
        rows.append(local[p[keep]])
        cols.append(local[q[keep]])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    adj = sp.coo_matrix((np.ones(r.size), (r, c)), shape=(tissue.size,) * 2)
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp != 1:
        raise ConnectivityError(f"tissue phase Y1 splits into {ncomp} components")


def tile_micro_domain(cell: UnitCellGeometry, eps: float) -> MicroGrid:
    """Tile the unit box with ``1/eps`` cell copies per axis."""
    if eps <= 0:
        raise TilingError(f"eps must be positive, got {eps}")
    K = int(round(1.0 / eps))
    if K < 1 or abs(1.0 / eps - K) > 1e-9 * K:
        raise TilingError(f"1/eps = {1.0 / eps} is not an integer")
    mask = np.tile(cell.chi, (K,) * cell.dim)
    return MicroGrid(cell=cell, K=K, mask=mask)


def cell_average(field: np.ndarray, grid: MicroGrid, phase: int) -> np.ndarray:
    """Average ``chi_phase * field`` over every eps-cell.

    Divides by the full eps-cell volume, so the phase indicator averages to
    ``|Y_phase|``.  Accepts a single field (``grid.shape`` or flat) or a stack
    with a leading time axis.  Returns shape ``(..., K, ..., K)``.
    """
    field = np.asarray(field, dtype=float)
    ncell = int(np.prod(grid.shape))
    if field.shape[-grid.dim:] == grid.shape:
        lead = field.shape[: field.ndim - grid.dim]
    elif field.shape[-1] == ncell:
        lead = field.shape[:-1]
    else:
        raise ValueError(f"field shape {field.shape} does not match micro grid {grid.shape}")
    f = field.reshape(lead + grid.shape) * (grid.mask == phase)
    K, n, d = grid.K, grid.cell.n, grid.dim
    split = lead + tuple(v for _ in range(d) for v in (K, n))
    axes = tuple(len(lead) + 2 * i + 1 for i in range(d))
    return f.reshape(split).mean(axis=axes)


def block_average(coarse: np.ndarray, M: int, dim: int) -> np.ndarray:
    """Restrict a ``(..., K, .., K)`` field to ``(..., M, .., M)`` by exact block means."""
    K = coarse.shape[-1]
    if K % M:
        raise ValueError(f"target grid {M} does not divide {K}")
    r = K // M
    lead = coarse.shape[: coarse.ndim - dim]
    split = lead + tuple(v for _ in range(dim) for v in (M, r))
    axes = tuple(len(lead) + 2 * i + 1 for i in range(dim))
    return coarse.reshape(split).mean(axis=axes)
