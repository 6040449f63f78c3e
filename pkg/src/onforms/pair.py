"""The output pair (A, C) and its (C, A) stack."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class OutputPair:
    """Advance matrix ``A`` (n x n) and measurement matrix ``C`` (d x n).

    Arrays are copied to float64 on construction. Derived flags such as
    output normality are always recomputed from the matrices.
    """

    A: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float, ndmin=2)
        C = np.array(self.C, dtype=float, ndmin=2)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError(f"A must be square, got shape {A.shape}")
        if C.ndim != 2 or C.shape[1] != A.shape[0]:
            raise DimensionError(
                f"C must have {A.shape[0]} columns, got shape {C.shape}")
        if C.shape[0] < 1:
            raise DimensionError("C must have at least one row")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(C))):
            raise DimensionError("A and C must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "C", C)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.C.shape[0]

    @property
    def stack(self) -> np.ndarray:
        """The (n+d) x n matrix [C; A]."""
        return np.vstack([self.C, self.A])

    @classmethod
    def from_stack(cls, Q, d: int) -> "OutputPair":
        Q = np.asarray(Q, dtype=float)
        return cls(Q[d:], Q[:d])

    def on_residual(self) -> float:
        """Frobenius norm of I - A^T A - C^T C."""
        return on_residual(self.A, self.C)

    def is_output_normal(self, tol: float = 1e-10) -> bool:
        return self.on_residual() <= tol

    def spectral_radius(self) -> float:
        from .grammians import spectral_radius
        return spectral_radius(self.A)

    def is_stable(self, margin: float = 1e-10) -> bool:
        return self.spectral_radius() < 1.0 - margin

    def transform(self, T, T_inv=None) -> "OutputPair":
        """Similarity (T^-1 A T, C T)."""
        T = np.asarray(T, dtype=float)
        if T_inv is None:
            T_inv = np.linalg.inv(T)
        return OutputPair(T_inv @ self.A @ T, self.C @ T)

    def conjugate(self, U) -> "OutputPair":
        """Orthogonal similarity (U^T A U, C U)."""
        U = np.asarray(U, dtype=float)
        return OutputPair(U.T @ self.A @ U, self.C @ U)


def on_residual(A, C) -> float:
    A = np.asarray(A, dtype=float)
    C = np.asarray(C, dtype=float)
    n = A.shape[0]
    return float(np.linalg.norm(np.eye(n) - A.T @ A - C.T @ C))


def orthogonality_residual(U) -> float:
    U = np.asarray(U, dtype=float)
    return float(np.linalg.norm(U.T @ U - np.eye(U.shape[1])))
