"""Cell, macro and micro pipelines and the eps-sweep study."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..cell_static import EffectiveCoefficients, effective_coefficients
from ..cell_transient import CellTransientBundle, solve_cell_transients
from ..geometry import BLOOD, TISSUE, UnitCellGeometry, block_average, cell_average, grid_centers, tile_micro_domain
from ..macro_solver import MacroProblem, MacroTrajectory, reconstruct_blood, solve_macro
from ..micro_solver import EnergyReport, MicroTrajectory, energy_norms, solve_micro
from ..numerics import KernelSamples
from .config import RunConfig

log = logging.getLogger(__name__)


@dataclass
class CellResult:
    cell: UnitCellGeometry
    coeffs: EffectiveCoefficients
    bundle: CellTransientBundle | None  # None without blood phase
    kernel: KernelSamples


def _zero_bundle(cell: UnitCellGeometry, cfg: RunConfig) -> CellTransientBundle:
    # no blood phase: every interface integral vanishes
    tg = cfg.timegrid()
    z = np.zeros((tg.steps + 1, 0))
    zt = np.zeros(tg.steps + 1)
    return CellTransientBundle(tg, z, z, z, KernelSamples(tg.dt, zt), zt, zt, zt,
                               alpha_b=cfg.params().alpha_b, gamma=cfg.params().gamma)


def run_cell(cfg: RunConfig) -> CellResult:
    cell = cfg.geometry()
    params = cfg.params()
    coeffs = effective_coefficients(cell, params)
    if cell.blood_cells.size:
        bundle = solve_cell_transients(cell, params.alpha_b, params.gamma, cfg.timegrid())
    else:
        bundle = _zero_bundle(cell, cfg)
    return CellResult(cell, coeffs, bundle, bundle.kernel)


def cell_diagnostics(res: CellResult, cfg: RunConfig) -> dict:
    A = res.coeffs.A
    eig = np.linalg.eigvalsh(0.5 * (A + A.T))
    norm = np.linalg.norm(A)
    H = res.kernel.values
    dt = res.kernel.dt
    integral = float(dt * (H.sum() - 0.5 * (H[0] + H[-1]))) if len(H) > 1 else 0.0
    g = res.coeffs.gamma
    b = res.bundle
    diag = {
        "symmetry_residual": float(np.abs(A - A.T).max() / norm) if norm else 0.0,
        "eig_min": float(eig.min()),
        "eig_max": float(eig.max()),
        "eig_upper_bound": float(cfg.params().alpha * res.cell.vol_Y1),
        "kernel_integral": integral,
        "kernel_integral_gap": float(abs(integral - g) / g) if g > 0 else float(abs(integral)),
    }
    if b.omega.shape[1]:
        diag["max_theta_plus_omega_minus_one"] = float(np.abs(b.theta + b.omega - 1.0).max())
        diag["one_minus_min_omega_final"] = float(1.0 - b.omega[-1].min())
    return diag


def cell_report(res: CellResult, cfg: RunConfig) -> dict:
    return {
        "A_eff": [float(v) for v in res.coeffs.A.ravel()],
        "gamma_eff": float(res.coeffs.gamma),
        "vol_Y1": float(res.coeffs.vol_Y1),
        "area_Sigma": float(res.cell.area_Sigma),
        "H": [float(v) for v in res.kernel.values],
        "dt": float(res.kernel.dt),
        "q": [float(v) for v in res.bundle.q],
        "diagnostics": cell_diagnostics(res, cfg),
    }


def run_cell_report(cfg: RunConfig) -> tuple[dict, CellResult]:
    res = run_cell(cfg)
    return cell_report(res, cfg), res


@dataclass
class MacroResult:
    trajectory: MacroTrajectory
    blood_mean: np.ndarray  # (steps + 1, npts), Y2 mean of reconstructed blood temperature
    M: int


def run_macro(cfg: RunConfig, cell_res: CellResult | None = None) -> MacroResult:
    cell_res = cell_res or run_cell(cfg)
    M = cfg.macro_M * cfg.macro_refine
    data = cfg.profiles()
    problem = MacroProblem(M, cfg.cell_dim, cell_res.coeffs, cell_res.bundle, data,
                           ic_scaling=cfg.ic_scaling, diffusion_scaling=cfg.diffusion_scaling)
    traj = solve_macro(problem)
    x = grid_centers(M, cfg.cell_dim)
    if cell_res.bundle.omega.shape[1]:
        blood = reconstruct_blood(traj.T, cell_res.bundle, data.h_b(x), data.f_b(x), mean=True)
    else:
        blood = np.zeros_like(traj.T)
    return MacroResult(traj, blood, M)


def run_micro(cfg: RunConfig, eps: float, cell: UnitCellGeometry | None = None) -> MicroTrajectory:
    cell = cell or cfg.geometry()
    grid = tile_micro_domain(cell, eps)
    return solve_micro(grid, cfg.params(), cfg.profiles(), cfg.timegrid(),
                       reconstruction=cfg.interface_reconstruction)


def _rel_distance(a: np.ndarray, b: np.ndarray) -> float:
    num = np.linalg.norm(a - b)
    den = np.linalg.norm(b)
    if den == 0.0:
        return float(num)
    return float(num / den)


@dataclass
class StudyRow:
    epsilon: float
    e_tissue: float
    e_blood: float
    energy_H: float
    energy_V: float
    t_micro_sec: float
    t_macro_sec: float


@dataclass
class StudyReport:
    rows: list[StudyRow]
    kernel: KernelSamples
    cell: dict
    energies: list[EnergyReport] = field(default_factory=list)

    HEADER = ("epsilon", "e_tissue", "e_blood", "energy_H", "energy_V", "t_micro_sec", "t_macro_sec")

    def energy_ratio(self) -> float:
        tot = [r.energy_H + r.energy_V for r in self.rows]
        return max(tot) / min(tot) if min(tot) > 0 else float("nan")


def macro_comparison_fields(cfg: RunConfig, cell: UnitCellGeometry, macro: MacroResult) -> tuple[np.ndarray, np.ndarray]:
    """``|Y1| T`` and ``|Y2| mean(T_b)`` block-averaged to the comparison grid."""
    d = cfg.cell_dim
    shape = (-1,) + (macro.M,) * d
    tissue = block_average(macro.trajectory.T.reshape(shape) * cell.vol_Y1, cfg.macro_M, d)
    blood = block_average(macro.blood_mean.reshape(shape) * cell.vol_Y2, cfg.macro_M, d)
    return tissue, blood


def micro_comparison_fields(cfg: RunConfig, traj: MicroTrajectory) -> tuple[np.ndarray, np.ndarray]:
    d = cfg.cell_dim
    tissue = block_average(cell_average(traj.U, traj.grid, TISSUE), cfg.macro_M, d)
    blood = block_average(cell_average(traj.U, traj.grid, BLOOD), cfg.macro_M, d)
    return tissue, blood


def run_convergence_study(cfg: RunConfig) -> StudyReport:
    t0 = time.perf_counter()
    cell_res = run_cell(cfg)
    macro = run_macro(cfg, cell_res)
    t_macro = time.perf_counter() - t0
    ref_t, ref_b = macro_comparison_fields(cfg, cell_res.cell, macro)
    rows, energies = [], []
    for eps in cfg.epsilons():
        t1 = time.perf_counter()
        traj = run_micro(cfg, eps, cell_res.cell)
        t_micro = time.perf_counter() - t1
        mic_t, mic_b = micro_comparison_fields(cfg, traj)
        en = energy_norms(traj.U, traj.grid, traj.timegrid)
        energies.append(en)
        row = StudyRow(eps, _rel_distance(mic_t, ref_t), _rel_distance(mic_b, ref_b), en.sup_H, en.int_V,
                       t_micro if cfg.wallclock else 0.0, t_macro if cfg.wallclock else 0.0)
        log.info("eps=%g e_tissue=%.4e e_blood=%.4e micro %.2fs", eps, row.e_tissue, row.e_blood, t_micro)
        rows.append(row)
    return StudyReport(rows, cell_res.kernel, cell_report(cell_res, cfg), energies)
