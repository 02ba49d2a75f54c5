"""Sparse linear solves and convolution quadrature shared by all solvers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DEFAULT_TOL = 1e-10


class SolverError(RuntimeError):
    """CG did not reach the requested residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (relative residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class KernelSamples:
    """Kernel values ``values[k] ~ H(k * dt)``."""

    dt: float
    values: np.ndarray

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"kernel step must be positive, got {self.dt}")
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("kernel samples must be finite")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)


def is_symmetric(A: sp.spmatrix, rtol: float = 1e-14) -> bool:
    A = sp.csr_matrix(A)
    diff = abs(A - A.T)
    scale = abs(A).max() if A.nnz else 0.0
    return diff.nnz == 0 or diff.max() <= rtol * scale


def cg_solve(
    A: sp.spmatrix,
    b: np.ndarray,
    tol: float = DEFAULT_TOL,
    project_constants: bool = False,
    x0: np.ndarray | None = None,
    jacobi: bool = True,
    maxiter: int | None = None,
) -> np.ndarray:
    """Conjugate gradients for a symmetric positive (semi-)definite ``A``.

    With ``project_constants`` the system may be singular with the constants
    as nullspace; ``b`` must then have zero mean and the returned solution is
    the zero-mean representative.
    """
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    N = b.size
    if A.shape != (N, N):
        raise ValueError(f"operator shape {A.shape} does not match rhs size {N}")
    bnorm = np.linalg.norm(b)
    if project_constants and abs(b.sum()) > 1e-10 * max(bnorm, 1.0) * np.sqrt(N):
        raise ValueError("right-hand side must have zero mean for a constant nullspace")
    if bnorm == 0.0:
        return np.zeros(N)

    M = None
    if jacobi:
        diag = A.diagonal()
        if np.all(diag > 0):
            M = sp.diags(1.0 / diag)
    cap = maxiter if maxiter is not None else 50 * N
    x, _ = spla.cg(A, b, x0=x0, rtol=tol, atol=0.0, maxiter=cap, M=M)
    res = np.linalg.norm(b - A @ x) / bnorm
    if not np.isfinite(res) or res > tol * 10:
        # scipy measures the preconditioned residual; retry unpreconditioned once
        x, _ = spla.cg(A, b, x0=x, rtol=tol, atol=0.0, maxiter=cap)
        res = np.linalg.norm(b - A @ x) / bnorm
        if not np.isfinite(res) or res > tol * 10:
            raise SolverError("conjugate gradients did not converge", res)
    if project_constants:
        x = x - x.mean()
    return x


def _check_steps(kernel: KernelSamples, dt: float | None) -> None:
    if dt is not None and not np.isclose(dt, kernel.dt, rtol=1e-12, atol=0.0):
        raise ValueError(f"history step {dt} differs from kernel step {kernel.dt}")


def convolve_trapezoid(
    kernel: KernelSamples, history: np.ndarray, m: int, dt: float | None = None
) -> np.ndarray | float:
    """Trapezoidal value of ``int_0^{t_m} H(t_m - s) f(s) ds``.

    ``history[j]`` holds ``f(t_j)`` (scalar or field); ``dt`` optionally states
    the history step, which must agree with the kernel's.
    """
    _check_steps(kernel, dt)
    history = np.asarray(history, dtype=float)
    if m < 0 or m >= len(history):
        raise IndexError(f"time index {m} outside history of length {len(history)}")
    if m >= len(kernel):
        raise IndexError(f"time index {m} outside kernel of length {len(kernel)}")
    if m == 0:
        return np.zeros(history.shape[1:]) if history.ndim > 1 else 0.0
    w = kernel.values[m::-1].copy()  # w[j] = H(t_m - t_j)
    w[0] *= 0.5
    w[-1] *= 0.5
    return kernel.dt * np.tensordot(w, history[: m + 1], axes=(0, 0))


def convolve_trapezoid_series(
    kernel: KernelSamples, history: np.ndarray, dt: float | None = None
) -> np.ndarray:
    """``convolve_trapezoid`` for every ``m`` at once; returns the same shape as ``history``.

    ``kernel.values`` may carry extra trailing axes matching ``history`` (a
    separate kernel per spatial point).
    """
    _check_steps(kernel, dt)
    f = np.asarray(history, dtype=float)
    H = kernel.values
    nt = len(f)
    if len(H) < nt:
        raise ValueError("kernel shorter than history")
    H = H[:nt]
    out = np.zeros_like(f)
    # column-wise direct convolution keeps a fixed summation order
    H2 = H.reshape(nt, -1)
    f2 = f.reshape(nt, -1)
    shared = H2.shape[1] == 1
    if not shared and H2.shape[1] != f2.shape[1]:
        raise ValueError(f"kernel trailing shape {H.shape[1:]} does not match history {f.shape[1:]}")
    o2 = out.reshape(nt, -1)
    for c in range(f2.shape[1]):
        h = H2[:, 0] if shared else H2[:, c]
        full = np.convolve(h, f2[:, c])[:nt]
        o2[:, c] = full - 0.5 * (h * f2[0, c] + h[0] * f2[:, c])
    out = o2.reshape(f.shape) * kernel.dt
    out[0] = 0.0
    return out


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = k * dt`` for ``k = 0..steps``."""

    dt: float
    steps: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        if self.steps < 0:
            raise ValueError(f"number of steps must be non-negative, got {self.steps}")

    @classmethod
    def from_final(cls, t_final: float, steps: int) -> "TimeGrid":
        return cls(dt=t_final / steps, steps=steps)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.steps + 1)

    @property
    def t_final(self) -> float:
        return self.dt * self.steps
