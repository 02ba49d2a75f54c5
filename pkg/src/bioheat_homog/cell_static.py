"""Periodic corrector problems on the tissue phase and effective coefficients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .geometry import TISSUE, UnitCellGeometry, neighbour_pairs
from .numerics import DEFAULT_TOL, cg_solve


@dataclass(frozen=True)
class PhysicalParams:
    """Tissue diffusivity ``alpha``, blood diffusivity ``alpha_b``, exchange ``gamma``."""

    alpha: float
    alpha_b: float
    gamma: float
    raw: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.alpha_b > 0:
            raise ValueError(f"alpha_b must be positive, got {self.alpha_b}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")


def derive_coefficients(
    rho: float,
    c: float,
    kappa: float,
    rho_b: float,
    c_b: float,
    kappa_b: float,
    omega_b: float,
    alpha_b_uses: str = "kappa_b",
    gamma_form: str = "standard",
) -> PhysicalParams:
    """Diffusivities and exchange coefficient from physiological constants.

    ``alpha_b_uses="kappa"`` divides the *tissue* conductivity by the blood
    heat capacity instead of the blood conductivity.  ``gamma_form="with_rho"``
    uses ``omega_b * rho_b * c_b * rho`` in place of ``omega_b * rho_b * c_b / c``.
    """
    raw = dict(rho=rho, c=c, kappa=kappa, rho_b=rho_b, c_b=c_b, kappa_b=kappa_b, omega_b=omega_b)
    for name, v in raw.items():
        if name == "omega_b":
            if not v >= 0:
                raise ValueError(f"omega_b must be non-negative, got {v}")
        elif not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    if alpha_b_uses not in ("kappa", "kappa_b"):
        raise ValueError(f"alpha_b_uses must be 'kappa' or 'kappa_b', got {alpha_b_uses!r}")
    if gamma_form not in ("standard", "with_rho"):
        raise ValueError(f"gamma_form must be 'standard' or 'with_rho', got {gamma_form!r}")
    k_blood = kappa_b if alpha_b_uses == "kappa_b" else kappa
    if gamma_form == "standard":
        gamma = omega_b * rho_b * c_b / c
    else:
        gamma = omega_b * rho_b * c_b * rho
    return PhysicalParams(
        alpha=kappa / (rho * c), alpha_b=k_blood / (rho_b * c_b), gamma=gamma, raw=raw
    )


@dataclass
class CorrectorField:
    """Zero-mean corrector for direction ``direction`` on the tissue cells."""

    cell: UnitCellGeometry
    direction: int
    values: np.ndarray  # one value per entry of cell.tissue_cells

    def as_grid(self, fill: float = np.nan) -> np.ndarray:
        out = np.full(self.cell.n ** self.cell.dim, fill)
        out[self.cell.tissue_cells] = self.values
        return out.reshape(self.cell.shape)


@dataclass
class EffectiveCoefficients:
    A: np.ndarray
    gamma: float
    vol_Y1: float


class _TissueFaces:
    """Incidence structure of tissue/tissue faces on the periodic cell."""

    def __init__(self, cell: UnitCellGeometry):
        flat = cell.chi.ravel()
        tissue = cell.tissue_cells
        local = -np.ones(flat.size, dtype=np.int64)
        local[tissue] = np.arange(tissue.size)
        ps, qs, axes = [], [], []
        for ax in range(cell.dim):
            p, q = neighbour_pairs(cell.shape, ax, periodic=True)
            keep = (flat[p] == TISSUE) & (flat[q] == TISSUE)
            ps.append(local[p[keep]])
            qs.append(local[q[keep]])
            axes.append(np.full(keep.sum(), ax))
        self.p = np.concatenate(ps)
        self.q = np.concatenate(qs)
        self.axis = np.concatenate(axes)
        nf = self.p.size
        rows = np.concatenate([np.arange(nf), np.arange(nf)])
        cols = np.concatenate([self.q, self.p])
        vals = np.concatenate([np.ones(nf), -np.ones(nf)])
        # (D u)_f = u_q - u_p
        self.D = sp.csr_matrix((vals, (rows, cols)), shape=(nf, tissue.size))


def _face_gradient(cell: UnitCellGeometry, tf: _TissueFaces, values: np.ndarray, i: int) -> np.ndarray:
    # (grad_y w_i + e_i) . e_axis on every tissue/tissue face
    h = 1.0 / cell.n
    return (tf.D @ values) / h + (tf.axis == i)


def solve_corrector(
    cell: UnitCellGeometry, alpha: float, i: int, tol: float = DEFAULT_TOL
) -> CorrectorField:
    """Two-point-flux finite volumes for the cell problem in direction ``i``.

    Interface faces carry no flux; the solution is fixed by zero mean over Y1.
    """
    if not 0 <= i < cell.dim:
        raise ValueError(f"direction {i} out of range for dimension {cell.dim}")
    tf = _TissueFaces(cell)
    h = 1.0 / cell.n
    w = alpha * h ** (cell.dim - 2)
    L = (tf.D.T @ tf.D) * w
    c = h * (tf.axis == i)
    rhs = -(tf.D.T @ (w * c))
    values = cg_solve(L, rhs, tol=tol, project_constants=True)
    return CorrectorField(cell=cell, direction=i, values=values)


def solve_correctors(cell: UnitCellGeometry, alpha: float, tol: float = DEFAULT_TOL) -> list[CorrectorField]:
    return [solve_corrector(cell, alpha, i, tol) for i in range(cell.dim)]


def effective_tensor(
    cell: UnitCellGeometry, alpha: float, correctors: list[CorrectorField]
) -> np.ndarray:
    """Energy products of the corrected unit gradients over the tissue phase."""
    if len(correctors) != cell.dim or any(c.cell is not cell for c in correctors):
        raise ValueError("correctors were not solved on this cell")
    tf = _TissueFaces(cell)
    grads = [_face_gradient(cell, tf, c.values, c.direction) for c in correctors]
    dy = cell.dy
    d = cell.dim
    A = np.empty((d, d))
    for a in range(d):
        for b in range(d):
            A[a, b] = alpha * dy * np.dot(grads[a], grads[b])
    return A


def effective_gamma(cell: UnitCellGeometry, gamma: float) -> float:
    if gamma < 0:
        raise ValueError(f"gamma must be non-negative, got {gamma}")
    return gamma * cell.area_Sigma / cell.vol_Y1


def effective_coefficients(
    cell: UnitCellGeometry, params: PhysicalParams, tol: float = DEFAULT_TOL
) -> EffectiveCoefficients:
    correctors = solve_correctors(cell, params.alpha, tol)
    return EffectiveCoefficients(
        A=effective_tensor(cell, params.alpha, correctors),
        gamma=effective_gamma(cell, params.gamma),
        vol_Y1=cell.vol_Y1,
    )
