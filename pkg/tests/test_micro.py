import numpy as np
import pytest
import scipy.sparse as sp

from bioheat_homog.cell_static import PhysicalParams
from bioheat_homog.geometry import BLOOD, TISSUE, InclusionSpec, build_unit_cell, cell_average, tile_micro_domain
from bioheat_homog.micro_solver import (
    assemble_micro,
    energy_norms,
    interface_conductance,
    micro_faces,
    solve_micro,
)
from bioheat_homog.numerics import TimeGrid, is_symmetric
from bioheat_homog.profiles import DataProfiles, Profile

from conftest import square_cell

STUDY_DATA = DataProfiles(
    f=Profile("gaussian", amplitude=1.0, center=(0.5, 0.5), width=0.25),
    f_b=Profile("constant", value=0.5),
    h=Profile("sine-product", amplitude=1.0),
    h_b=Profile("sine-product", amplitude=0.5),
)


def tiny_grid():
    # 3x3 cell with a single blood cell in the middle, one period (eps = 1)
    cell = build_unit_cell(InclusionSpec((0.5, 0.5), (1 / 6, 1 / 6)), 3, 2)
    return tile_micro_domain(cell, 1.0)


def test_hand_assembled_stencil():
    grid = tiny_grid()
    p = PhysicalParams(alpha=2.0, alpha_b=3.0, gamma=5.0)
    A = assemble_micro(grid, p, "cell").toarray()
    h = 1 / 3
    mask = grid.mask
    ref = np.zeros((9, 9))
    for i in range(3):
        for j in range(3):
            r = 3 * i + j
            for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                a, b = i + di, j + dj
                if not (0 <= a < 3 and 0 <= b < 3):
                    ref[r, r] += 2 * 2.0 / h**2  # ghost at half distance, tissue side
                    continue
                c = 3 * a + b
                if mask[i, j] == mask[a, b] == TISSUE:
                    w = 2.0 / h**2
                elif mask[i, j] == mask[a, b] == BLOOD:
                    w = 1.0 * 3.0 / h**2
                else:
                    w = 1.0 * 5.0 / h  # eps * gamma * face / volume
                ref[r, r] += w
                ref[r, c] -= w
    assert np.allclose(A, ref, rtol=1e-14)
    assert mask[1, 1] == BLOOD


def test_operator_symmetric_and_positive():
    grid = tile_micro_domain(square_cell(8), 0.25)
    for rec in ("cell", "halfcell"):
        A = assemble_micro(grid, PhysicalParams(1.0, 1.0, 1.0), rec)
        assert is_symmetric(A, rtol=0.0)
        assert sp.linalg.eigsh(A, k=1, which="SA", return_eigenvectors=False)[0] > 0


def test_gamma_zero_block_diagonal():
    grid = tile_micro_domain(square_cell(8), 0.25)
    A = assemble_micro(grid, PhysicalParams(1.0, 1.0, 0.0)).tocoo()
    mask = grid.mask.ravel()
    assert not np.any(mask[A.row] != mask[A.col])


def test_halfcell_conductance():
    grid = tile_micro_domain(square_cell(8), 0.25)
    p = PhysicalParams(1.0, 2.0, 3.0)
    h, e = grid.h, grid.eps
    expect = 1 / (h / 2 + 1 / (e * 3.0) + h / (2 * e**2 * 2.0))
    assert interface_conductance(grid, p, "halfcell") == pytest.approx(expect)
    assert interface_conductance(grid, p, "cell") == pytest.approx(e * 3.0)
    with pytest.raises(ValueError):
        interface_conductance(grid, p, "nodal")


def test_zero_data_zero_trajectory():
    grid = tile_micro_domain(square_cell(8), 0.5)
    traj = solve_micro(grid, PhysicalParams(1.0, 1.0, 1.0), DataProfiles(), TimeGrid(0.01, 10))
    assert np.all(traj.U == 0)


def test_insulated_blood_keeps_constant():
    grid = tile_micro_domain(square_cell(8), 0.25)
    data = DataProfiles(h=Profile("sine-product"), h_b=Profile("constant", value=0.7))
    traj = solve_micro(grid, PhysicalParams(1.0, 1.0, 0.0), data, TimeGrid(0.01, 20))
    blood = grid.mask.ravel() == BLOOD
    assert np.allclose(traj.U[:, blood], 0.7, atol=1e-10)


def test_gamma_continuity():
    grid = tile_micro_domain(square_cell(8), 0.25)
    tg = TimeGrid(0.01, 20)
    a = solve_micro(grid, PhysicalParams(1.0, 1.0, 1e-8), STUDY_DATA, tg, tol=1e-13).U
    b = solve_micro(grid, PhysicalParams(1.0, 1.0, 0.0), STUDY_DATA, tg, tol=1e-13).U
    assert np.linalg.norm(a - b) / np.linalg.norm(b) < 1e-5


def test_energy_non_increasing_without_sources():
    grid = tile_micro_domain(square_cell(8), 0.25)
    data = DataProfiles(h=STUDY_DATA.h, h_b=STUDY_DATA.h_b)
    traj = solve_micro(grid, PhysicalParams(1.0, 1.0, 1.0), data, TimeGrid(0.01, 30))
    H = energy_norms(traj.U, grid).H
    assert np.all(np.diff(H) <= 1e-15)


def test_energy_hand_computation(rng):
    cell = build_unit_cell(InclusionSpec((0.5, 0.5), (0.25, 0.25)), 4, 2)
    grid = tile_micro_domain(cell, 1.0)
    U = rng.standard_normal(grid.shape)
    h, eps, mask = 0.25, 1.0, grid.mask
    Hn = (U**2).sum() * h**2
    V = 0.0
    for i in range(4):
        for j in range(4):
            for a, b in ((i + 1, j), (i, j + 1)):
                if a > 3 or b > 3:
                    continue
                jump2 = (U[a, b] - U[i, j]) ** 2
                if mask[i, j] == mask[a, b] == TISSUE:
                    V += jump2  # (jump/h)^2 * h^2
                elif mask[i, j] == mask[a, b] == BLOOD:
                    V += eps**2 * jump2
                else:
                    V += eps * jump2 * h
            V += 2 * U[i, j] ** 2 * ((i in (0, 3)) + (j in (0, 3)))
    rep = energy_norms(U.ravel(), grid)
    assert rep.H[0] == pytest.approx(Hn, rel=1e-13)
    assert rep.V[0] == pytest.approx(V, rel=1e-13)


def test_constant_field_energy():
    grid = tile_micro_domain(square_cell(8), 0.25)
    rep = energy_norms(np.full(grid.N**2, 1.5), grid, dirichlet_faces=False)
    assert rep.H[0] == pytest.approx(1.5**2)
    assert rep.V[0] == 0.0
    zero = energy_norms(np.zeros((3, grid.N**2)), grid, TimeGrid(0.1, 2))
    assert zero.sup_H == 0 and zero.int_V == 0


def test_micro_faces_partition():
    grid = tile_micro_domain(square_cell(8), 0.5)
    f = micro_faces(grid)
    n_faces = 2 * grid.N * (grid.N - 1)
    assert f.tt[0].size + f.bb[0].size + f.tb[0].size == n_faces
    assert f.tb[0].size == 4 * 4 * 4  # 4 inclusions, 4 sides, 4 faces per side


def test_self_refinement_at_coarsest_eps():
    coarse = tile_micro_domain(square_cell(8), 0.25)
    fine = tile_micro_domain(square_cell(16), 0.25)
    p = PhysicalParams(1.0, 1.0, 1.0)
    a = solve_micro(coarse, p, STUDY_DATA, TimeGrid.from_final(0.5, 250), reconstruction="halfcell")
    b = solve_micro(fine, p, STUDY_DATA, TimeGrid.from_final(0.5, 500), reconstruction="halfcell")
    for phase in (TISSUE, BLOOD):
        ca = cell_average(a.U, coarse, phase)
        cb = cell_average(b.U[::2], fine, phase)
        assert np.linalg.norm(ca - cb) / np.linalg.norm(cb) < 0.05
