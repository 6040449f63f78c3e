"""Stein equations, Grammians and the conditioning diagnostics.

The controllability Grammian solves ``P - A P A^T = B B^T`` and the
observability Grammian solves the dual ``P - A^T P A = C^T C``. Both are
computed with the squaring ("doubling") iteration

    P <- P + A_k P A_k^T,   A_k <- A_k @ A_k,

which sums the series ``sum_j A^j B B^T (A^T)^j`` in blocks of length 2^k.
"""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .errors import ConvergenceError, DimensionError, UnstableError

STABILITY_MARGIN = 1e-10
MAX_DOUBLINGS = 128
DOUBLING_RTOL = 1e-14


def spectral_radius(A) -> float:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"square matrix required, got {A.shape}")
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def solve_stein(A, B, *, rtol: float = DOUBLING_RTOL,
                maxiter: int = MAX_DOUBLINGS) -> np.ndarray:
    """Solve ``P - A P A^T = B B^T`` for symmetric ``P``.

    Parameters
    ----------
    A : (n, n) array_like
        Advance matrix, spectral radius below ``1 - 1e-10``.
    B : (n, m) array_like
        Input matrix.

    Raises
    ------
    UnstableError
        If ``A`` is not strictly stable; the series then does not converge.
    ConvergenceError
        If the relative increment does not drop below ``rtol`` within
        ``maxiter`` doublings.
    """
    A = np.asarray(A, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    n = A.shape[0]
    if A.shape != (n, n) or B.shape[0] != n:
        raise DimensionError(
            f"incompatible shapes A{A.shape}, B{B.shape}")
    rho = spectral_radius(A)
    if rho >= 1.0 - STABILITY_MARGIN:
        raise UnstableError(f"spectral radius {rho:.12g} is not below 1")
    P = B @ B.T
    Ak = A.copy()
    for _ in range(maxiter):
        inc = Ak @ P @ Ak.T
        P = P + inc
        P = 0.5 * (P + P.T)
        Ak = Ak @ Ak
        scale = np.linalg.norm(P)
        if np.linalg.norm(inc) <= rtol * max(scale, np.finfo(float).tiny):
            return P
    raise ConvergenceError(
        f"doubling iteration did not converge in {maxiter} steps")


def solve_dual_stein(A, C, **kw) -> np.ndarray:
    """Solve ``P - A^T P A = C^T C`` (observability Grammian)."""
    A = np.asarray(A, dtype=float)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    return solve_stein(A.T, C.T, **kw)


def stein_residual(A, B, P) -> float:
    A = np.asarray(A, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    return float(np.linalg.norm(P - A @ P @ A.T - B @ B.T))


def condition_number(P) -> float:
    s = np.linalg.svd(np.asarray(P, dtype=float), compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])


def _psd_sqrt(P) -> np.ndarray:
    # S with S S^T = P; eigen-based so a semidefinite P is tolerated.
    w, V = np.linalg.eigh(P)
    return V * np.sqrt(np.clip(w, 0.0, None))


def hankel_singular_values(P_ctrl, P_obs) -> np.ndarray:
    """Square roots of the eigenvalues of ``P_ctrl @ P_obs``, descending.

    Evaluated as the eigenvalues of the symmetric ``S^T P_ctrl S`` with
    ``P_obs = S S^T`` so they stay real.
    """
    S = _psd_sqrt(np.asarray(P_obs, dtype=float))
    M = S.T @ np.asarray(P_ctrl, dtype=float) @ S
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    return np.sqrt(np.clip(w, 0.0, None))[::-1]


@dataclass(frozen=True)
class GrammianReport:
    P_ctrl: np.ndarray
    P_obs: np.ndarray
    hankel: np.ndarray
    kappa_ctrl: float
    kappa_obs: float
    kappa_sigma: float
    excess: float

    def inequality_holds(self, rtol: float = 1e-8) -> bool:
        return self.kappa_sigma ** 2 <= self.kappa_ctrl * self.kappa_obs * (
            1.0 + rtol)


def grammian_report(A, B, C) -> GrammianReport:
    """Both Grammians, Hankel singular values and condition numbers.

    ``excess`` is ``kappa_ctrl * kappa_obs / kappa_sigma**2``; it is at
    least one, with equality for balanced, input normal and output normal
    realizations.
    """
    if B is None:
        raise DimensionError("B required for the controllability Grammian")
    A = np.asarray(A, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if not (np.any(B) and np.any(C)):
        raise DimensionError("B and C must be nonzero")
    Pc = solve_stein(A, B)
    Po = solve_dual_stein(A, C)
    hsv = hankel_singular_values(Pc, Po)
    kc, ko = condition_number(Pc), condition_number(Po)
    ks = np.inf if hsv[-1] == 0.0 else float(hsv[0] / hsv[-1])
    excess = kc * ko / ks ** 2 if np.isfinite(ks) else np.nan
    return GrammianReport(Pc, Po, hsv, kc, ko, ks, excess)


def is_observable(A, C, rtol: float = 1e-12) -> bool:
    """Positive definite observability Grammian (requires stable ``A``)."""
    P = solve_dual_stein(A, C)
    w = np.linalg.eigvalsh(P)
    n = P.shape[0]
    return bool(w[0] > rtol * np.trace(P) / n)


def stein_map(A, B, P) -> np.ndarray:
    """``B B^T + A P A^T``; the solution is its fixed point."""
    A = np.asarray(A, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    return B @ B.T + A @ P @ A.T
