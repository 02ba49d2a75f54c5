import numpy as np
import pytest

from bioheat_homog.geometry import (
    BLOOD,
    TISSUE,
    AlignmentError,
    ConnectivityError,
    GeometryError,
    InclusionSpec,
    InteriorityError,
    TilingError,
    block_average,
    build_unit_cell,
    cell_average,
    grid_centers,
    tile_micro_domain,
)

from conftest import square_cell


def test_default_square_measures():
    cell = square_cell(32)
    assert cell.vol_Y2 == pytest.approx(0.25, abs=1e-15)
    assert cell.vol_Y1 == pytest.approx(0.75, abs=1e-15)
    assert cell.area_Sigma == pytest.approx(2.0, abs=1e-15)
    assert cell.faces.shape == (4 * 16, 4)
    assert cell.vol_Y1 + cell.vol_Y2 == pytest.approx(1.0)


def test_measures_independent_of_resolution():
    for n in (8, 16, 64):
        cell = square_cell(n)
        assert (cell.vol_Y1, cell.vol_Y2, cell.area_Sigma) == pytest.approx((0.75, 0.25, 2.0))


def test_cube_in_3d():
    cell = square_cell(8, d=3)
    assert cell.vol_Y2 == pytest.approx(0.125)
    assert cell.area_Sigma == pytest.approx(6 * 0.25)


def test_no_inclusion():
    cell = build_unit_cell(None, 8, 2)
    assert np.all(cell.chi == TISSUE)
    assert cell.vol_Y1 == 1.0 and cell.area_Sigma == 0.0
    assert cell.faces.shape == (0, 4)


def test_faces_point_from_tissue_to_blood():
    cell = square_cell(16)
    flat = cell.chi.ravel()
    assert np.all(flat[cell.faces[:, 0]] == TISSUE)
    assert np.all(flat[cell.faces[:, 1]] == BLOOD)


def test_misaligned_box_rejected():
    with pytest.raises(AlignmentError):
        build_unit_cell(InclusionSpec((0.5, 0.5), (0.23, 0.25)), 16, 2)


def test_box_touching_cell_boundary_rejected():
    with pytest.raises(InteriorityError):
        build_unit_cell(InclusionSpec((0.25, 0.5), (0.25, 0.25)), 16, 2)


def test_overlapping_inclusions_rejected():
    inner = InclusionSpec((0.5, 0.5), (0.375, 0.375))
    with pytest.raises(GeometryError):
        build_unit_cell([inner, InclusionSpec((0.5, 0.5), (0.125, 0.125))], 16, 2)


def test_island_is_a_connectivity_error():
    ring = [
        InclusionSpec((0.5, 0.1875), (0.3125, 0.0625)),
        InclusionSpec((0.5, 0.8125), (0.3125, 0.0625)),
        InclusionSpec((0.1875, 0.5), (0.0625, 0.25)),
        InclusionSpec((0.8125, 0.5), (0.0625, 0.25)),
    ]
    with pytest.raises(ConnectivityError):
        build_unit_cell(ring, 16, 2)


def test_tiling_and_eps():
    cell = square_cell(8)
    grid = tile_micro_domain(cell, 0.25)
    assert grid.K == 4 and grid.N == 32 and grid.shape == (32, 32)
    assert grid.eps == 0.25
    assert np.array_equal(grid.mask[8:16, 16:24], cell.chi)
    with pytest.raises(TilingError):
        tile_micro_domain(cell, 0.3)


def test_no_blood_on_outer_boundary():
    grid = tile_micro_domain(square_cell(8), 0.125)
    bc = grid.boundary_face_counts().reshape(grid.shape)
    assert np.all(grid.mask[bc > 0] == TISSUE)
    assert bc.sum() == 4 * grid.N


def test_cell_average_of_indicator_is_phase_volume():
    cell = square_cell(8)
    grid = tile_micro_domain(cell, 0.25)
    ones = np.ones(grid.shape)
    assert np.allclose(cell_average(ones, grid, TISSUE), cell.vol_Y1)
    assert np.allclose(cell_average(ones, grid, BLOOD), cell.vol_Y2)
    stack = np.stack([ones, 2 * ones]).reshape(2, -1)
    avg = cell_average(stack, grid, TISSUE)
    assert avg.shape == (2, 4, 4)
    assert np.allclose(avg[1], 2 * cell.vol_Y1)


def test_block_average_preserves_mean(rng):
    a = rng.standard_normal((3, 8, 8))
    b = block_average(a, 4, 2)
    assert b.shape == (3, 4, 4)
    assert np.allclose(b.mean(axis=(1, 2)), a.mean(axis=(1, 2)))
    assert np.allclose(b[:, 0, 0], a[:, :2, :2].mean(axis=(1, 2)))
    with pytest.raises(ValueError):
        block_average(a, 3, 2)


def test_grid_centers_order():
    x = grid_centers(4, 2)
    assert x.shape == (16, 2)
    assert np.allclose(x[1], [0.125, 0.375])  # last axis fastest


def test_rectangular_box_perimeter():
    cell = build_unit_cell(InclusionSpec((0.5, 0.5), (0.125, 0.25)), 16, 2)
    assert cell.area_Sigma == pytest.approx(1.5)
    assert cell.vol_Y1 + cell.vol_Y2 == pytest.approx(1.0)


def test_tiling_counts():
    cell = square_cell(8)
    half = tile_micro_domain(cell, 0.5)
    assert half.shape == (16, 16)
    assert (half.mask == BLOOD).sum() == 4 * (cell.chi == BLOOD).sum()
    assert np.array_equal(tile_micro_domain(cell, 1.0).mask, cell.chi)
    quarter = tile_micro_domain(cell, 0.25)
    assert (quarter.mask == BLOOD).mean() == 0.25


def test_cell_average_affine_field_brute_force():
    cell = square_cell(8)
    grid = tile_micro_domain(cell, 0.25)
    x1 = grid.centers()[:, 0]
    avg = cell_average(x1, grid, TISSUE)
    n, K, h = 8, 4, grid.h
    brute = np.zeros((K, K))
    for a in range(K):
        for b in range(K):
            tot = 0.0
            for i in range(n):
                for j in range(n):
                    I, J = a * n + i, b * n + j
                    if grid.mask[I, J] == TISSUE:
                        tot += (I + 0.5) * h
            brute[a, b] = tot / n**2
    assert np.allclose(avg, brute, rtol=1e-13)
    # symmetric inclusion: |Y1| times the x1 coordinate of each eps-cell centre
    centres = (np.arange(K) + 0.5) / K
    assert np.allclose(avg, cell.vol_Y1 * centres[:, None] * np.ones((1, K)))
    assert np.all(cell_average(np.zeros(grid.shape), grid, TISSUE) == 0)
