"""Homogenised Barbashin-type equation on the macro grid and blood reconstruction.

Solves

    dT/dt - int_0^t H(t - s) T(s) ds - div(D grad T) + gamma_eff T = F

on the unit box with ``T = 0`` on the boundary, where ``D`` is the effective
tensor divided by ``|Y1|`` (``diffusion_scaling="derived"``) or the tensor
itself (``"paper"``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .cell_static import EffectiveCoefficients
from .cell_transient import CellTransientBundle
from .geometry import grid_centers, neighbour_pairs
from .numerics import DEFAULT_TOL, KernelSamples, TimeGrid, cg_solve, convolve_trapezoid, convolve_trapezoid_series
from .profiles import DataProfiles

IC_SCALINGS = ("natural", "paper")
DIFFUSION_SCALINGS = ("derived", "paper")

_OFFDIAG_TOL = 1e-6


def dirichlet_operator(M: int, dim: int, diffusion: np.ndarray) -> sp.csr_matrix:
    """Two-point-flux ``-div(D grad .)`` per unit volume with ``T = 0`` on the boundary.

    Only the diagonal of ``diffusion`` enters; a tensor with significant
    off-diagonal entries is rejected.
    """
    D = np.atleast_2d(np.asarray(diffusion, dtype=float))
    if D.shape != (dim, dim):
        raise ValueError(f"diffusion tensor has shape {D.shape}, expected {(dim, dim)}")
    off = D - np.diag(np.diag(D))
    if np.abs(off).max() > _OFFDIAG_TOL * np.abs(D).max():
        raise ValueError("two-point fluxes need a diagonal diffusion tensor; got off-diagonal entries "
                         f"up to {np.abs(off).max():.3e}")
    if np.any(np.diag(D) <= 0):
        raise ValueError("diffusion tensor must be positive definite")
    shape = (M,) * dim
    N = M**dim
    h = 1.0 / M
    rows, cols, vals = [], [], []
    diag = np.zeros(N)
    idx = np.arange(N).reshape(shape)
    for ax in range(dim):
        w = D[ax, ax] / h**2
        p, q = neighbour_pairs(shape, ax, periodic=False)
        rows += [p, q]
        cols += [q, p]
        vals += [np.full(p.size, -w), np.full(p.size, -w)]
        np.add.at(diag, p, w)
        np.add.at(diag, q, w)
        # ghost cell mirrored across the boundary face: half-cell distance
        lo = np.take(idx, 0, axis=ax).ravel()
        hi = np.take(idx, M - 1, axis=ax).ravel()
        np.add.at(diag, lo, 2 * w)
        np.add.at(diag, hi, 2 * w)
    rows.append(np.arange(N))
    cols.append(np.arange(N))
    vals.append(diag)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))


def assemble_source_F(f: np.ndarray, f_b: np.ndarray, h_b: np.ndarray, bundle: CellTransientBundle,
                      vol_Y1: float) -> np.ndarray:
    """Homogenised source ``F_k(x)`` for every time level, shape ``(steps + 1, npts)``.

    The blood-source convolution telescopes to ``int_Sigma gamma sigma_k`` since
    ``f_b`` does not depend on time.
    """
    f, f_b, h_b = (np.asarray(a, dtype=float) for a in (f, f_b, h_b))
    if not (f.shape == f_b.shape == h_b.shape):
        raise ValueError("data fields live on different grids")
    th = bundle.theta_totals[:, None]
    sg = bundle.sigma_totals[:, None]
    return f[None, :] + (h_b[None, :] * th + f_b[None, :] * sg) / vol_Y1


@dataclass
class MacroProblem:
    M: int
    dim: int
    coeffs: EffectiveCoefficients
    bundle: CellTransientBundle
    data: DataProfiles
    ic_scaling: str = "natural"
    diffusion_scaling: str = "derived"
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        if self.ic_scaling not in IC_SCALINGS:
            raise ValueError(f"ic_scaling must be one of {IC_SCALINGS}, got {self.ic_scaling!r}")
        if self.diffusion_scaling not in DIFFUSION_SCALINGS:
            raise ValueError(f"diffusion_scaling must be one of {DIFFUSION_SCALINGS}, got {self.diffusion_scaling!r}")

    @property
    def timegrid(self) -> TimeGrid:
        return self.bundle.timegrid

    @property
    def kernel(self) -> KernelSamples:
        return self.bundle.kernel

    @property
    def diffusion(self) -> np.ndarray:
        A = np.asarray(self.coeffs.A, dtype=float)
        return A / self.coeffs.vol_Y1 if self.diffusion_scaling == "derived" else A

    def centers(self) -> np.ndarray:
        return grid_centers(self.M, self.dim)

    def initial_state(self) -> np.ndarray:
        h = self.data.h(self.centers())
        return h * self.coeffs.vol_Y1 if self.ic_scaling == "paper" else h


@dataclass
class MacroTrajectory:
    timegrid: TimeGrid
    M: int
    dim: int
    T: np.ndarray  # (steps + 1, M**dim)
    F: np.ndarray  # (steps + 1, M**dim)
    meta: dict = field(default_factory=dict)

    def field(self, k: int) -> np.ndarray:
        return self.T[k].reshape((self.M,) * self.dim)


class MacroStepper:
    """Implicit Euler for diffusion and exchange, memory term lagged at ``t_k``."""

    def __init__(self, problem: MacroProblem, kernel: KernelSamples | None = None,
                 gamma_eff: float | None = None, diffusion: np.ndarray | None = None):
        self.problem = problem
        self.kernel = problem.kernel if kernel is None else kernel
        self.gamma_eff = problem.coeffs.gamma if gamma_eff is None else gamma_eff
        D = problem.diffusion if diffusion is None else diffusion
        tg = problem.timegrid
        if not np.isclose(self.kernel.dt, tg.dt, rtol=1e-12):
            raise ValueError(f"kernel step {self.kernel.dt} differs from time step {tg.dt}")
        N = problem.M ** problem.dim
        self.dt = tg.dt
        self.stiffness = dirichlet_operator(problem.M, problem.dim, D)
        self.system = (sp.identity(N, format="csr") * (1.0 / self.dt + self.gamma_eff) + self.stiffness).tocsr()

    def memory(self, history: np.ndarray, k: int) -> np.ndarray:
        if not np.any(self.kernel.values[: k + 1]):
            return np.zeros(history.shape[1:])
        return convolve_trapezoid(self.kernel, history, k)

    def step(self, history: np.ndarray, k: int, source: np.ndarray) -> np.ndarray:
        """``T_{k+1}`` from ``history[:k+1]`` and the source at ``t_{k+1}``."""
        Tk = history[k]
        rhs = Tk / self.dt + self.memory(history, k) + source
        return cg_solve(self.system, rhs, tol=self.problem.tol, x0=Tk)


def step_macro(Tk: np.ndarray, problem: MacroProblem, history: np.ndarray, source: np.ndarray,
               stepper: MacroStepper | None = None) -> np.ndarray:
    """One step from ``Tk = history[-1]``; ``source`` is ``F`` at the new time level."""
    history = np.asarray(history, dtype=float)
    if not np.array_equal(history[-1], Tk):
        raise ValueError("Tk must be the last entry of history")
    stepper = stepper or MacroStepper(problem)
    return stepper.step(history, len(history) - 1, source)


def solve_macro(problem: MacroProblem, extra_source: Callable[[float], np.ndarray] | None = None,
                stepper: MacroStepper | None = None) -> MacroTrajectory:
    """March the homogenised equation over the bundle's time grid.

    ``extra_source(t)`` is added to the assembled source at every new time
    level (manufactured-solution studies).
    """
    tg = problem.timegrid
    x = problem.centers()
    f, f_b, h_b = (p(x) for p in (problem.data.f, problem.data.f_b, problem.data.h_b))
    F = assemble_source_F(f, f_b, h_b, problem.bundle, problem.coeffs.vol_Y1)
    stepper = stepper or MacroStepper(problem)
    T = np.empty((tg.steps + 1, x.shape[0]))
    T[0] = problem.initial_state()
    times = tg.times
    for k in range(tg.steps):
        src = F[k + 1]
        if extra_source is not None:
            src = src + extra_source(times[k + 1])
        T[k + 1] = stepper.step(T, k, src)
    return MacroTrajectory(tg, problem.M, problem.dim, T, F)


def reconstruct_blood(T: np.ndarray, bundle: CellTransientBundle, h_b: np.ndarray, f_b: np.ndarray,
                      mean: bool = False) -> np.ndarray:
    """Blood temperature from the Duhamel representation.

    ``T`` has shape ``(steps + 1, npts)``.  Returns ``(steps + 1, npts, n_blood)``
    per blood cell, or ``(steps + 1, npts)`` with ``mean=True`` (average over Y2).
    """
    T = np.asarray(T, dtype=float)
    h_b = np.asarray(h_b, dtype=float)
    f_b = np.asarray(f_b, dtype=float)
    nt = bundle.timegrid.steps + 1
    if T.shape[0] != nt:
        raise ValueError(f"history has {T.shape[0]} levels, cell transients have {nt}")
    dt = bundle.timegrid.dt
    rate = bundle.omega_rate()
    if mean:
        kern = KernelSamples(dt, rate.mean(axis=1))
        conv = convolve_trapezoid_series(kern, T)
        return bundle.theta.mean(axis=1)[:, None] * h_b + conv + bundle.sigma.mean(axis=1)[:, None] * f_b
    npts, nb = T.shape[1], rate.shape[1]
    kern = KernelSamples(dt, np.repeat(rate[:, None, :], npts, axis=1))
    conv = convolve_trapezoid_series(kern, np.repeat(T[:, :, None], nb, axis=2))
    return bundle.theta[:, None, :] * h_b[None, :, None] + conv + bundle.sigma[:, None, :] * f_b[None, :, None]
