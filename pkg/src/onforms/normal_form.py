"""Output-normal normalization of stable observable pairs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import UnobservableError
from .grammians import solve_dual_stein
from .pair import OutputPair

OBSERVABILITY_RTOL = 1e-12


@dataclass(frozen=True)
class SimilarityTransform:
    """Invertible ``T`` stored together with its inverse."""

    T: np.ndarray
    T_inv: np.ndarray

    def residual(self) -> float:
        n = self.T.shape[0]
        return float(np.linalg.norm(self.T @ self.T_inv - np.eye(n)))

    def apply(self, pair: OutputPair) -> OutputPair:
        return OutputPair(self.T_inv @ pair.A @ self.T, pair.C @ self.T)

    def then(self, other: "SimilarityTransform") -> "SimilarityTransform":
        """Compose: apply ``self`` first, then ``other``."""
        return SimilarityTransform(self.T @ other.T, other.T_inv @ self.T_inv)


def _cholesky_step(pair: OutputPair):
    P = solve_dual_stein(pair.A, pair.C)
    w = np.linalg.eigvalsh(P)
    n = pair.n
    if w[0] <= OBSERVABILITY_RTOL * np.trace(P) / n:
        raise UnobservableError(
            f"observability Grammian is singular (min eigenvalue {w[0]:.3g})")
    try:
        L = np.linalg.cholesky(P)
    except np.linalg.LinAlgError as exc:
        raise UnobservableError(str(exc)) from None
    # T = L^{-T}, T^{-1} = L^T
    T_inv = L.T.copy()
    T = solve_triangular(T_inv, np.eye(n), lower=False)
    return SimilarityTransform(T, T_inv)


def to_output_normal(pair: OutputPair, refine: int = 3,
                     target: float = 1e-13):
    """Transform ``pair`` so that ``A^T A + C^T C = I``.

    With ``P`` the observability Grammian and ``P = L L^T`` its Cholesky
    factorization, ``T = L^{-T}`` gives ``T^{-1} A T, C T`` output normal.
    Up to ``refine`` extra passes repeat the construction on the result
    while its residual exceeds ``target * n``. Their Grammians are within
    rounding of the identity, so the composite ``T`` stays upper triangular
    with positive diagonal. Without them an ill-conditioned Grammian leaves
    residuals near ``cond(P) * eps``.

    Returns
    -------
    (OutputPair, SimilarityTransform)
    """
    st = _cholesky_step(pair)
    out = st.apply(pair)
    for _ in range(refine):
        if out.on_residual() <= target * pair.n:
            break
        step = _cholesky_step(out)
        st = st.then(step)
        out = step.apply(out)
    return out, st


def dual_input_pair(A, B) -> OutputPair:
    """Output pair ``(A^T, B^T)``; input normal (A, B) maps to output normal."""
    A = np.asarray(A, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    return OutputPair(A.T, B.T)


def input_normal_residual(A, B) -> float:
    A = np.asarray(A, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    return float(np.linalg.norm(np.eye(A.shape[0]) - A @ A.T - B @ B.T))
