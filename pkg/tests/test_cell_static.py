import numpy as np
import pytest

from bioheat_homog.cell_static import (
    PhysicalParams,
    derive_coefficients,
    effective_coefficients,
    effective_gamma,
    effective_tensor,
    solve_corrector,
    solve_correctors,
)
from bioheat_homog.geometry import TISSUE, build_unit_cell

from conftest import square_cell


def dense_effective_entry(cell, alpha):
    """Loop-assembled tissue graph Laplacian, least-squares solve, energy of y1 + w."""
    n, chi = cell.n, cell.chi
    h = 1.0 / n
    idx = {}
    for i in range(n):
        for j in range(n):
            if chi[i, j] == TISSUE:
                idx[(i, j)] = len(idx)
    N = len(idx)
    L = np.zeros((N, N))
    b = np.zeros(N)
    edges = []
    for (i, j), p in idx.items():
        for di, dj in ((1, 0), (0, 1)):
            q = idx.get(((i + di) % n, (j + dj) % n))
            if q is None:
                continue
            edges.append((p, q, di))
            L[p, p] += 1
            L[q, q] += 1
            L[p, q] -= 1
            L[q, p] -= 1
            # drift of the macroscopic coordinate y1 across the face
            b[p] += di * h
            b[q] -= di * h
    w = np.linalg.lstsq(L, b, rcond=None)[0]
    energy = sum(((w[q] - w[p]) / h + di) ** 2 for p, q, di in edges)
    return alpha * h**2 * energy


def test_matches_dense_oracle():
    cell = square_cell(8)
    A = effective_coefficients(cell, PhysicalParams(1.3, 1.0, 1.0)).A
    assert A[0, 0] == pytest.approx(dense_effective_entry(cell, 1.3), rel=1e-9)


def test_no_inclusion_gives_alpha_identity():
    cell = build_unit_cell(None, 8, 2)
    co = effective_coefficients(cell, PhysicalParams(2.5, 1.0, 1.0))
    assert np.allclose(co.A, 2.5 * np.eye(2), atol=1e-12)
    assert co.gamma == 0.0


def test_symmetry_and_bounds():
    cell = square_cell(32)
    A = effective_coefficients(cell, PhysicalParams(1.0, 1.0, 1.0)).A
    assert np.abs(A - A.T).max() <= 1e-12
    assert abs(A[0, 1]) < 1e-10
    assert A[0, 0] == pytest.approx(A[1, 1], rel=1e-10)
    eig = np.linalg.eigvalsh(A)
    assert eig.min() > 0
    assert eig.max() <= 0.75 + 1e-12  # arithmetic (Voigt) bound alpha |Y1|
    assert eig.max() < 0.6  # isotropic upper bound for insulating inclusions, alpha (1 - phi)/(1 + phi)


# Richardson extrapolation of the n = 64/128/256 runs (observed order 1.33)
A11_LIMIT = 0.57735108


def test_fine_grid_richardson_target():
    a = [effective_coefficients(square_cell(n), PhysicalParams(1.0, 1.0, 1.0)).A[0, 0] for n in (64, 128, 256)]
    order = np.log2((a[1] - a[0]) / (a[2] - a[1]))
    limit = a[2] + (a[2] - a[1]) / (2**order - 1)
    assert limit == pytest.approx(A11_LIMIT, rel=1e-6)
    a32 = effective_coefficients(square_cell(32), PhysicalParams(1.0, 1.0, 1.0)).A[0, 0]
    assert a32 == pytest.approx(A11_LIMIT, rel=0.02)


def test_self_convergence_toward_extrapolated_value():
    a = [effective_coefficients(square_cell(n), PhysicalParams(1.0, 1.0, 1.0)).A[0, 0] for n in (16, 32, 64)]
    order = np.log2((a[1] - a[0]) / (a[2] - a[1]))
    assert order >= 1.0
    limit = a[2] + (a[2] - a[1]) / (2**order - 1)
    assert limit == pytest.approx(0.57735, rel=2e-3)
    assert a[1] == pytest.approx(limit, rel=0.02)


def test_linear_in_alpha():
    cell = square_cell(16)
    A1 = effective_coefficients(cell, PhysicalParams(1.0, 1.0, 1.0)).A
    A3 = effective_coefficients(cell, PhysicalParams(3.0, 1.0, 1.0)).A
    assert np.allclose(A3, 3 * A1, rtol=1e-9, atol=1e-14)


def test_corrector_reflection_symmetry():
    cell = square_cell(32)
    w = solve_corrector(cell, 1.0, 0, tol=1e-12).as_grid(fill=0.0)
    # odd under y1 -> 1 - y1, even under y2 -> 1 - y2
    assert np.allclose(w, -w[::-1, :], atol=1e-9)
    assert np.allclose(w, w[:, ::-1], atol=1e-9)
    assert np.isnan(solve_corrector(cell, 1.0, 0).as_grid()).sum() == cell.blood_cells.size


def test_corrector_zero_mean():
    cell = square_cell(16)
    for c in solve_correctors(cell, 1.0):
        assert abs(c.values.mean()) < 1e-13


def test_three_dimensional_cell():
    cell = square_cell(8, d=3)
    A = effective_coefficients(cell, PhysicalParams(1.0, 1.0, 1.0)).A
    assert np.allclose(A, A[0, 0] * np.eye(3), atol=1e-9)
    assert 0 < A[0, 0] < cell.vol_Y1


def test_no_inclusion_correctors_vanish():
    for c in solve_correctors(build_unit_cell(None, 8, 2), 1.0):
        assert np.all(c.values == 0)


def test_effective_gamma_default_geometry():
    assert effective_gamma(square_cell(32), 1.0) == 8.0 / 3.0
    assert effective_gamma(square_cell(32), 2.0) == 16.0 / 3.0
    assert effective_gamma(square_cell(32), 0.0) == 0.0
    with pytest.raises(ValueError):
        effective_gamma(square_cell(8), -1.0)


def test_foreign_correctors_rejected():
    c8, c16 = square_cell(8), square_cell(16)
    with pytest.raises(ValueError):
        effective_tensor(c8, 1.0, solve_correctors(c16, 1.0))


def test_derive_coefficients_forms():
    kw = dict(rho=1050.0, c=3600.0, kappa=0.5, rho_b=1060.0, c_b=3800.0, kappa_b=0.6, omega_b=5e-4)
    p = derive_coefficients(**kw)
    assert p.alpha == pytest.approx(0.5 / (1050 * 3600))
    assert p.alpha_b == pytest.approx(0.6 / (1060 * 3800))
    assert p.gamma == pytest.approx(5e-4 * 1060 * 3800 / 3600)
    q = derive_coefficients(**kw, alpha_b_uses="kappa", gamma_form="with_rho")
    assert q.alpha_b == pytest.approx(0.5 / (1060 * 3800))
    assert q.gamma == pytest.approx(5e-4 * 1060 * 3800 * 1050)
    with pytest.raises(ValueError):
        derive_coefficients(**{**kw, "rho": 0.0})
    with pytest.raises(ValueError):
        derive_coefficients(**kw, gamma_form="other")


def test_derive_coefficients_arithmetic():
    p = derive_coefficients(rho=1.0, c=4.0, kappa=2.0, rho_b=2.0, c_b=0.5, kappa_b=1.0, omega_b=0.0)
    assert p.alpha == 0.5
    assert p.alpha_b == 1.0
    assert p.gamma == 0.0


def test_params_validation():
    with pytest.raises(ValueError):
        PhysicalParams(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        PhysicalParams(1.0, 1.0, -0.1)
