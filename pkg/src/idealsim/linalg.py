"""Dense complex matrix primitives.

Norms, spectra, Hermitian square roots, numerical kernels and solvers for
the Stein equation ``X = Q + A^* X A``.  Everything here is a pure function
of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import (
    InvalidInput,
    NotPSD,
    NumericalFailure,
    SpectralRadiusViolation,
)

__all__ = [
    "SteinSolution",
    "as_matrix",
    "hermitian_part",
    "op_norm",
    "spec_radius",
    "herm_sqrt",
    "stein_solve",
    "kernel_basis",
    "condition_number",
]

SteinMethod = Literal["auto", "direct-vectorized", "smith-squaring", "truncated-series"]

#: Inputs with r(a) above ``1 - STEIN_MARGIN`` are rejected.
STEIN_MARGIN = 1e-8
#: Largest dimension handled by the dense Kronecker solve under ``method="auto"``.
DIRECT_MAX_DIM = 16
KERNEL_TOL = 1e-9


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate ``m`` as a finite square matrix and return a complex copy."""
    arr = np.array(m, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InvalidInput(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} has non-finite entries")
    return arr


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def op_norm(m) -> float:
    """Operator 2-norm (largest singular value)."""
    m = as_matrix(m)
    return float(np.linalg.norm(m, 2))


def spec_radius(m) -> float:
    """Largest eigenvalue modulus."""
    m = as_matrix(m)
    try:
        ev = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc
    return float(np.max(np.abs(ev)))


def condition_number(m) -> float:
    """2-norm condition number; ``inf`` for singular input."""
    s = np.linalg.svd(as_matrix(m), compute_uv=False)
    if s[-1] == 0.0:
        return float("inf")
    return float(s[0] / s[-1])


def herm_sqrt(m) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    The input is symmetrized before the eigendecomposition and eigenvalues
    in ``[-1e-12 * ||m||, 0)`` are clipped to zero.

    Raises
    ------
    NotPSD
        If an eigenvalue is more negative than the tolerance.
    """
    m = hermitian_part(as_matrix(m))
    w, v = np.linalg.eigh(m)
    scale = max(float(np.max(np.abs(w))), 0.0)
    if w[0] < -1e-12 * scale:
        raise NotPSD(f"matrix has negative eigenvalue {w[0]:.3e} (scale {scale:.3e})")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return hermitian_part(root)


@dataclass(frozen=True)
class SteinSolution:
    """Solution of ``X = Q + A^* X A`` together with how it was obtained."""

    z: np.ndarray
    residual: float
    method: str
    iterations: int

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.z)[0])


def _stein_direct(a: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, int]:
    # vec(A^* X A) = (A^T kron A^*) vec(X) with column-major vec
    n = a.shape[0]
    op = np.eye(n * n, dtype=complex) - np.kron(a.T, a.conj().T)
    try:
        x = np.linalg.solve(op, q.reshape(-1, order="F"))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"Stein system is singular: {exc}") from exc
    return x.reshape(n, n, order="F"), 1


def _stein_smith(a: np.ndarray, q: np.ndarray, max_iter: int) -> tuple[np.ndarray, int]:
    x = q.copy()
    ak = a.copy()
    stop = 1e-14 * (1.0 + op_norm(q))
    for k in range(1, max_iter + 1):
        x = x + ak.conj().T @ x @ ak
        ak = ak @ ak
        na = np.linalg.norm(ak, 2)
        if not np.isfinite(na):
            break
        if na * na * np.linalg.norm(x, 2) < stop:
            return x, k
    raise NumericalFailure(f"Smith iteration did not converge in {max_iter} squarings")


def _stein_series(a: np.ndarray, q: np.ndarray, max_iter: int) -> tuple[np.ndarray, int]:
    x = q.copy()
    term_right = np.eye(a.shape[0], dtype=complex)
    stop = 1e-14
    for k in range(1, max_iter + 1):
        term_right = term_right @ a
        na = np.linalg.norm(term_right, 2)
        x = x + term_right.conj().T @ q @ term_right
        if na * na < stop:
            return x, k
    raise NumericalFailure(f"truncated series did not converge in {max_iter} terms")


def stein_solve(
    a,
    q,
    method: SteinMethod = "auto",
    tol: float = 1e-10,
    max_iter: int | None = None,
) -> SteinSolution:
    """Solve the Stein equation ``X = Q + A^* X A`` for Hermitian ``Q``.

    For ``r(A) < 1`` the unique solution is the series
    ``sum_k (A^*)^k Q A^k``.  ``method="auto"`` uses the dense vectorized
    solve up to dimension 16 and Smith's squaring iteration above.

    Parameters
    ----------
    a, q : array_like
        Square matrices of equal size.  ``q`` is symmetrized.
    method : str
        ``"auto"``, ``"direct-vectorized"``, ``"smith-squaring"`` or
        ``"truncated-series"`` (the plain partial sums, kept as an oracle).
    tol : float
        Accepted residual relative to ``||Q|| + (1 + ||A||^2) ||X||``.

    Raises
    ------
    SpectralRadiusViolation
        If ``r(A) > 1 - 1e-8``.
    NumericalFailure
        On non-convergence or when the residual exceeds ``tol``.
    """
    a = as_matrix(a, "a")
    q = hermitian_part(as_matrix(q, "q"))
    if a.shape != q.shape:
        raise InvalidInput(f"shape mismatch: a {a.shape} vs q {q.shape}")
    r = spec_radius(a)
    if r > 1.0 - STEIN_MARGIN:
        raise SpectralRadiusViolation(f"r(a) = {r:.12g} is not below 1 - {STEIN_MARGIN:g}")

    if method == "auto":
        method = "direct-vectorized" if a.shape[0] <= DIRECT_MAX_DIM else "smith-squaring"
    if method == "direct-vectorized":
        x, iters = _stein_direct(a, q)
    elif method == "smith-squaring":
        x, iters = _stein_smith(a, q, max_iter or 64)
    elif method == "truncated-series":
        x, iters = _stein_series(a, q, max_iter or 1_000_000)
    else:
        raise InvalidInput(f"unknown Stein method {method!r}")

    x = hermitian_part(x)
    residual = op_norm(x - q - a.conj().T @ x @ a)
    nx = op_norm(x)
    scale = op_norm(q) + (1.0 + op_norm(a) ** 2) * nx
    if not np.isfinite(residual) or residual > tol * max(scale, 1.0):
        raise NumericalFailure(
            f"Stein residual {residual:.3e} exceeds tolerance ({method}, scale {scale:.3e})"
        )
    return SteinSolution(z=x, residual=residual, method=method, iterations=iters)


def kernel_basis(m, tol: float = KERNEL_TOL, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical kernel of ``m``.

    A right singular vector belongs to the kernel when its singular value is
    below ``tol * scale``; ``scale`` defaults to the largest singular value.
    The zero matrix has the whole space as kernel.
    """
    m = as_matrix(m)
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    n = m.shape[0]
    _, s, vh = np.linalg.svd(m)
    ref = s[0] if scale is None else scale
    if s[0] == 0.0:
        return np.eye(n, dtype=complex)
    keep = s < tol * ref
    return vh.conj().T[:, keep]
