"""Finite volumes for the eps-resolved tissue/blood system.

One unknown per grid cell; the phase mask decides whether it is a tissue or a
blood temperature.  Blood diffusivity is scaled by ``eps**2`` and the
interface exchange by ``eps``, so both phases keep their cell-scale dynamics
as eps shrinks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .cell_static import PhysicalParams
from .geometry import BLOOD, TISSUE, MicroGrid, neighbour_pairs
from .numerics import DEFAULT_TOL, TimeGrid, cg_solve
from .profiles import DataProfiles

RECONSTRUCTIONS = ("cell", "halfcell")


@dataclass
class MicroFaces:
    """Face lists of a micro grid, split by type; ``(p, q)`` flat cell indices."""

    tt: tuple[np.ndarray, np.ndarray]
    bb: tuple[np.ndarray, np.ndarray]
    tb: tuple[np.ndarray, np.ndarray]
    boundary_count: np.ndarray  # outer-boundary faces per cell


def micro_faces(grid: MicroGrid) -> MicroFaces:
    mask = grid.mask.ravel()
    tt, bb, tb = ([], []), ([], []), ([], [])
    for ax in range(grid.dim):
        p, q = neighbour_pairs(grid.shape, ax, periodic=False)
        mp, mq = mask[p], mask[q]
        for sel, dst in (((mp == TISSUE) & (mq == TISSUE), tt), ((mp == BLOOD) & (mq == BLOOD), bb),
                         (mp != mq, tb)):
            dst[0].append(p[sel])
            dst[1].append(q[sel])
    cat = lambda pair: (np.concatenate(pair[0]), np.concatenate(pair[1]))  # noqa: E731
    bc = grid.boundary_face_counts()
    if np.any(bc[mask == BLOOD] > 0):
        raise ValueError("a blood cell touches the outer boundary")
    return MicroFaces(cat(tt), cat(bb), cat(tb), bc)


def interface_conductance(grid: MicroGrid, params: PhysicalParams, reconstruction: str = "cell") -> float:
    """Exchange conductance per unit interface area between adjacent cell values."""
    if reconstruction not in RECONSTRUCTIONS:
        raise ValueError(f"interface_reconstruction must be one of {RECONSTRUCTIONS}, got {reconstruction!r}")
    eps, h = grid.eps, grid.h
    if params.gamma == 0.0:
        return 0.0
    if reconstruction == "cell":
        return eps * params.gamma
    return 1.0 / (h / (2 * params.alpha) + 1.0 / (eps * params.gamma) + h / (2 * eps**2 * params.alpha_b))


def _laplacian_entries(p, q, w):
    rows = [p, q, p, q]
    cols = [p, q, q, p]
    vals = [np.full(p.size, w), np.full(p.size, w), np.full(p.size, -w), np.full(p.size, -w)]
    return rows, cols, vals


def assemble_micro(grid: MicroGrid, params: PhysicalParams, reconstruction: str = "cell",
                   faces: MicroFaces | None = None) -> sp.csr_matrix:
    """Stiffness per unit volume (symmetric) with Dirichlet rows folded in by ghost cells."""
    faces = faces or micro_faces(grid)
    h, d, eps = grid.h, grid.dim, grid.eps
    N = int(np.prod(grid.shape))
    scale = h ** (d - 2) / h**d
    rows, cols, vals = [], [], []
    for (p, q), w in ((faces.tt, params.alpha * scale), (faces.bb, eps**2 * params.alpha_b * scale)):
        r, c, v = _laplacian_entries(p, q, w)
        rows += r
        cols += c
        vals += v
    cif = interface_conductance(grid, params, reconstruction)
    if cif > 0:
        r, c, v = _laplacian_entries(*faces.tb, cif * h ** (d - 1) / h**d)
        rows += r
        cols += c
        vals += v
    rows.append(np.arange(N))
    cols.append(np.arange(N))
    vals.append(2 * params.alpha * scale * faces.boundary_count)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))


@dataclass
class MicroTrajectory:
    timegrid: TimeGrid
    grid: MicroGrid
    U: np.ndarray  # (steps + 1, N**dim); tissue or blood temperature by phase

    def tissue(self) -> np.ndarray:
        return np.where(self.grid.mask.ravel() == TISSUE, self.U, 0.0)

    def blood(self) -> np.ndarray:
        return np.where(self.grid.mask.ravel() == BLOOD, self.U, 0.0)


def solve_micro(grid: MicroGrid, params: PhysicalParams, data: DataProfiles, timegrid: TimeGrid,
                reconstruction: str = "cell", tol: float = DEFAULT_TOL) -> MicroTrajectory:
    """Implicit Euler for the coupled system, starting from ``h`` / ``h_b``."""
    A = assemble_micro(grid, params, reconstruction)
    x = grid.centers()
    tissue = grid.mask.ravel() == TISSUE
    u0 = np.where(tissue, data.h(x), data.h_b(x))
    src = np.where(tissue, data.f(x), data.f_b(x))
    dt = timegrid.dt
    system = (sp.identity(A.shape[0], format="csr") / dt + A).tocsr()
    U = np.empty((timegrid.steps + 1, u0.size))
    U[0] = u0
    for k in range(timegrid.steps):
        U[k + 1] = cg_solve(system, U[k] / dt + src, tol=tol, x0=U[k])
    return MicroTrajectory(timegrid, grid, U)


@dataclass
class EnergyReport:
    sup_H: float  # sup_k ||w_k||_H^2
    int_V: float  # int_0^T ||w||_V^2 dt (trapezoid)
    H: np.ndarray
    V: np.ndarray

    @property
    def total(self) -> float:
        return self.sup_H + self.int_V


def energy_norms(U: np.ndarray, grid: MicroGrid, timegrid: TimeGrid | None = None,
                 dirichlet_faces: bool = True) -> EnergyReport:
    """Squared H and V norms of every state in ``U`` (shape ``(nt, N**dim)`` or one state).

    ``dirichlet_faces`` adds the jump to the zero boundary value on outer faces.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    faces = micro_faces(grid)
    h, d, eps = grid.h, grid.dim, grid.eps
    H = (U**2).sum(axis=1) * h**d

    def jumps2(pair):
        p, q = pair
        return ((U[:, q] - U[:, p]) ** 2).sum(axis=1)

    V = h ** (d - 2) * jumps2(faces.tt)
    if dirichlet_faces:
        V = V + 2 * h ** (d - 2) * (U**2 * faces.boundary_count).sum(axis=1)
    V = V + eps**2 * h ** (d - 2) * jumps2(faces.bb) + eps * h ** (d - 1) * jumps2(faces.tb)
    if timegrid is not None and len(V) > 1:
        int_V = timegrid.dt * (V.sum() - 0.5 * (V[0] + V[-1]))
    else:
        int_V = 0.0
    return EnergyReport(sup_H=float(H.max()), int_V=float(int_V), H=H, V=V)
