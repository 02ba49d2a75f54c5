"""Parabolic blood-phase cell problems with Newton cooling on the interface.

Three problems share one operator on the blood cells of the periodicity cell:

* ``theta``: zero exterior temperature, starts at 1;
* ``omega``: unit exterior temperature, starts at 0;
* ``sigma``: zero exterior temperature, unit volumetric source, starts at 0.

The Robin condition is discretised through a face conductance that puts the
exchange coefficient in series with the half-cell conduction, so the system
matrix stays an M-matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import BLOOD, UnitCellGeometry, neighbour_pairs
from .numerics import KernelSamples, TimeGrid, cg_solve

# tighter than the global default so that theta + omega = 1 survives many steps
TRANSIENT_TOL = 1e-13


class EmptyBloodPhase(ValueError):
    pass


def robin_conductance(cell: UnitCellGeometry, alpha_b: float, gamma: float) -> float:
    """Series combination of ``gamma`` and the half-cell conductance ``2 alpha_b n``."""
    if gamma == 0.0:
        return 0.0
    half = 2.0 * alpha_b * cell.n
    return gamma * half / (gamma + half)


@dataclass
class BloodOperator:
    cell: UnitCellGeometry
    alpha_b: float
    gamma: float
    stiffness: sp.csr_matrix  # diffusion + Robin, per unit cell volume
    face_cell: np.ndarray  # local blood index next to each interface face
    conductance: float

    @property
    def size(self) -> int:
        return self.stiffness.shape[0]

    def boundary_load(self, g: float) -> np.ndarray:
        """Robin load for exterior value ``g``, per unit cell volume."""
        load = np.zeros(self.size)
        np.add.at(load, self.face_cell, self.conductance * self.cell.dsigma / self.cell.dy * g)
        return load

    def face_values(self, values: np.ndarray, g: float) -> np.ndarray:
        """Interface trace consistent with the face flux, ``(..., n_faces)``."""
        if self.gamma == 0.0:
            return values[..., self.face_cell]
        half = 2.0 * self.alpha_b * self.cell.n
        return (half * values[..., self.face_cell] + self.gamma * g) / (half + self.gamma)


def blood_operator(cell: UnitCellGeometry, alpha_b: float, gamma: float) -> BloodOperator:
    blood = cell.blood_cells
    if blood.size == 0:
        raise EmptyBloodPhase("the cell has no blood phase")
    flat = cell.chi.ravel()
    local = -np.ones(flat.size, dtype=np.int64)
    local[blood] = np.arange(blood.size)
    h = 1.0 / cell.n
    w = alpha_b * h ** (cell.dim - 2) / cell.dy
    rows, cols, vals = [], [], []
    for ax in range(cell.dim):
        p, q = neighbour_pairs(cell.shape, ax, periodic=True)
        keep = (flat[p] == BLOOD) & (flat[q] == BLOOD)
        lp, lq = local[p[keep]], local[q[keep]]
        rows += [lp, lq, lp, lq]
        cols += [lp, lq, lq, lp]
        m = lp.size
        vals += [np.full(m, w), np.full(m, w), np.full(m, -w), np.full(m, -w)]
    G = robin_conductance(cell, alpha_b, gamma)
    face_cell = local[cell.faces[:, 1]]
    rows.append(face_cell)
    cols.append(face_cell)
    vals.append(np.full(face_cell.size, G * cell.dsigma / cell.dy))
    K = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(blood.size, blood.size),
    )
    return BloodOperator(cell, alpha_b, gamma, K, face_cell, G)


def _march(op: BloodOperator, timegrid: TimeGrid, u0: float, g: float, source: float, tol: float) -> np.ndarray:
    dt = timegrid.dt
    n = op.size
    system = (sp.identity(n, format="csr") / dt + op.stiffness).tocsr()
    load = op.boundary_load(g) + source
    out = np.empty((timegrid.steps + 1, n))
    out[0] = u0
    for k in range(timegrid.steps):
        rhs = out[k] / dt + load
        out[k + 1] = cg_solve(system, rhs, tol=tol, x0=out[k])
    return out


def solve_theta(cell, alpha_b, gamma, timegrid, tol=TRANSIENT_TOL):
    return _march(blood_operator(cell, alpha_b, gamma), timegrid, 1.0, 0.0, 0.0, tol)


def solve_omega_cell(cell, alpha_b, gamma, timegrid, tol=TRANSIENT_TOL):
    return _march(blood_operator(cell, alpha_b, gamma), timegrid, 0.0, 1.0, 0.0, tol)


def solve_sigma_cell(cell, alpha_b, gamma, timegrid, tol=TRANSIENT_TOL):
    return _march(blood_operator(cell, alpha_b, gamma), timegrid, 0.0, 0.0, 1.0, tol)


def solve_stationary(cell: UnitCellGeometry, alpha_b: float, gamma: float, g: float, source: float,
                     tol: float = 1e-12) -> np.ndarray:
    """Steady Robin problem; requires ``gamma > 0``."""
    if gamma <= 0:
        raise ValueError("the stationary Robin problem needs gamma > 0")
    op = blood_operator(cell, alpha_b, gamma)
    return cg_solve(op.stiffness, op.boundary_load(g) + source, tol=tol)


def interface_totals(op: BloodOperator, values: np.ndarray, g: float, initial: float | None = None) -> np.ndarray:
    """``int_Sigma gamma u dsigma`` for every time level.

    At ``k = 0`` the trace equals the initial datum ``initial`` when given;
    afterwards it is the flux-consistent face reconstruction.
    """
    faces = op.face_values(values, g)
    tot = op.gamma * op.cell.dsigma * faces.sum(axis=-1)
    if initial is not None:
        tot = np.array(tot, dtype=float)
        tot[0] = op.gamma * op.cell.area_Sigma * initial
    return tot


def rate_samples(values: np.ndarray, dt: float) -> np.ndarray:
    """Time-derivative samples along axis 0.

    Forward difference at the first level, central differences inside and a
    backward difference at the last level.  Their trapezoidal sum telescopes
    exactly to ``values[-1] - values[0]``.
    """
    values = np.asarray(values, dtype=float)
    if len(values) < 2:
        return np.zeros_like(values)
    return np.gradient(values, dt, axis=0, edge_order=1)


def kernel_H(omega: np.ndarray, gamma: float, vol_Y1: float, timegrid: TimeGrid, *,
             cell: UnitCellGeometry, alpha_b: float) -> tuple[KernelSamples, np.ndarray]:
    """Memory kernel ``H_k`` from the omega sequence, plus interface totals ``q_k``.

    ``q_k = int_Sigma gamma omega_k dsigma`` uses the flux-consistent face trace
    for ``k >= 1`` and the zero initial datum at ``k = 0``.
    """
    if omega.shape[0] != timegrid.steps + 1:
        raise ValueError(f"omega has {omega.shape[0]} levels, time grid expects {timegrid.steps + 1}")
    op = blood_operator(cell, alpha_b, gamma)
    q = interface_totals(op, omega, 1.0, initial=0.0)
    H = rate_samples(q, timegrid.dt) / vol_Y1
    return KernelSamples(timegrid.dt, H), q


@dataclass
class CellTransientBundle:
    timegrid: TimeGrid
    theta: np.ndarray
    omega: np.ndarray
    sigma: np.ndarray
    kernel: KernelSamples
    q: np.ndarray  # int_Sigma gamma omega_k
    theta_totals: np.ndarray  # int_Sigma gamma theta_k
    sigma_totals: np.ndarray  # int_Sigma gamma sigma_k
    alpha_b: float
    gamma: float

    def omega_rate(self) -> np.ndarray:
        """Per-cell samples of d omega/dt on the time grid."""
        return rate_samples(self.omega, self.timegrid.dt)


def solve_cell_transients(cell: UnitCellGeometry, alpha_b: float, gamma: float, timegrid: TimeGrid,
                          tol: float = TRANSIENT_TOL) -> CellTransientBundle:
    op = blood_operator(cell, alpha_b, gamma)
    theta = _march(op, timegrid, 1.0, 0.0, 0.0, tol)
    omega = _march(op, timegrid, 0.0, 1.0, 0.0, tol)
    sigma = _march(op, timegrid, 0.0, 0.0, 1.0, tol)
    kernel, q = kernel_H(omega, gamma, cell.vol_Y1, timegrid, cell=cell, alpha_b=alpha_b)
    return CellTransientBundle(
        timegrid=timegrid, theta=theta, omega=omega, sigma=sigma, kernel=kernel, q=q,
        theta_totals=interface_totals(op, theta, 0.0, initial=1.0),
        sigma_totals=interface_totals(op, sigma, 0.0, initial=0.0),
        alpha_b=alpha_b, gamma=gamma,
    )


def solve_blood_direct(cell: UnitCellGeometry, alpha_b: float, gamma: float, exterior: np.ndarray,
                       h_b: float, f_b: float, timegrid: TimeGrid, tol: float = TRANSIENT_TOL) -> np.ndarray:
    """Implicit Euler for one blood cell driven by a prescribed tissue temperature.

    ``exterior[k]`` is the tissue temperature at ``t_k``; the step to ``t_{k+1}``
    uses ``exterior[k+1]`` in the Newton cooling condition.  Reference
    stepping for checking the Duhamel reconstruction.
    """
    exterior = np.asarray(exterior, dtype=float)
    if exterior.shape != (timegrid.steps + 1,):
        raise ValueError("exterior history must have one value per time level")
    op = blood_operator(cell, alpha_b, gamma)
    dt = timegrid.dt
    system = (sp.identity(op.size, format="csr") / dt + op.stiffness).tocsr()
    unit = op.boundary_load(1.0)
    out = np.empty((timegrid.steps + 1, op.size))
    out[0] = h_b
    for k in range(timegrid.steps):
        rhs = out[k] / dt + unit * exterior[k + 1] + f_b
        out[k + 1] = cg_solve(system, rhs, tol=tol, x0=out[k])
    return out
