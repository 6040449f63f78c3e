"""Real Schur forms with a fixed block order and standardized 2x2 blocks.

Complex-pair blocks come first, then real eigenvalues. Within each group the
default order has moduli nondecreasing along the diagonal, ties broken by
real part nonincreasing and then by |imaginary part| nondecreasing.
``descending=True`` flips only the modulus comparison.

Two standardizations of a 2x2 block ``Z`` are offered:

* ``lambda_r``: ``z11 == z22``, ``z12 * z21 < 0``, ``z12 + z21 > 0``;
* ``qd``: ``Z = Q D`` with ``Q = [[c, s], [-s, c]]``, ``s >= 0`` and
  ``D = diag(d1, d2)``, ``d1 >= d2 > 0``; equivalently the columns of ``Z``
  are orthogonal with norms ``d1 >= d2`` and ``z12 >= 0``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import schur as _lapack_schur
from scipy.linalg.lapack import dtrexc

from .errors import ConvergenceError, DimensionError, DomainError
from .pair import OutputPair

SPLIT_TOL = 1e-12
ORDER_TOL = 1e-9
EQUAL_SV_RTOL = 1e-12


def schur_blocks(T, tol: float = SPLIT_TOL) -> List[Tuple[int, int]]:
    """``(start, size)`` of each diagonal block of a quasi-triangular T."""
    T = np.asarray(T)
    n = T.shape[0]
    blocks = []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > tol * (
                abs(T[i, i]) + abs(T[i + 1, i + 1]) + 1e-300):
            blocks.append((i, 2))
            i += 2
        else:
            blocks.append((i, 1))
            i += 1
    return blocks


def block_eigenvalue(T, start: int, size: int) -> complex:
    """Eigenvalue of a diagonal block; for a pair, the one with Im > 0."""
    if size == 1:
        return complex(T[start, start])
    Z = T[start:start + 2, start:start + 2]
    tr = 0.5 * (Z[0, 0] + Z[1, 1])
    det = Z[0, 0] * Z[1, 1] - Z[0, 1] * Z[1, 0]
    disc = tr * tr - det
    if disc >= 0:
        # real pair; report the larger so the caller can notice
        return complex(tr + np.sqrt(disc))
    return complex(tr, np.sqrt(-disc))


def _precedes(a: complex, b: complex, descending: bool,
              tol: float = ORDER_TOL) -> int:
    """cmp-style comparison: negative when a's block goes first."""
    ra, rb = a.imag == 0.0, b.imag == 0.0
    if ra != rb:
        return 1 if ra else -1
    scale = tol * max(1.0, abs(a), abs(b))
    ma, mb = abs(a), abs(b)
    if abs(ma - mb) > scale:
        first = ma > mb if descending else ma < mb
        return -1 if first else 1
    if abs(a.real - b.real) > scale:
        return -1 if a.real > b.real else 1
    ia, ib = abs(a.imag), abs(b.imag)
    if abs(ia - ib) > scale:
        return -1 if ia < ib else 1
    return 0


def order_key(descending: bool = False):
    return functools.cmp_to_key(
        lambda a, b: _precedes(a, b, descending))


@dataclass(frozen=True)
class SchurForm:
    """``U^T A U = T`` with ``T`` quasi upper triangular."""

    U: np.ndarray
    T: np.ndarray
    mode: str = "raw"
    descending: bool = False

    @property
    def n(self) -> int:
        return self.T.shape[0]

    @property
    def blocks(self) -> List[Tuple[int, int]]:
        return schur_blocks(self.T)

    @property
    def ell(self) -> int:
        """Number of complex-conjugate pairs."""
        return sum(1 for _, s in self.blocks if s == 2)

    @property
    def M(self) -> int:
        return self.n - self.ell

    def m(self, k: int) -> int:
        """1-based first row of block k (k = 1..M); ``m(0) = 0``."""
        if k == 0:
            return 0
        ell = self.ell
        return 2 * k - 1 if k <= ell else k + ell

    def eigenvalues(self) -> List[complex]:
        return [block_eigenvalue(self.T, s, z) for s, z in self.blocks]

    def residual(self, A) -> float:
        A = np.asarray(A, dtype=float)
        return float(np.linalg.norm(self.U.T @ A @ self.U - self.T))

    def below_blocks(self) -> float:
        """Largest entry below the block diagonal."""
        mask = np.tril(np.ones_like(self.T, dtype=bool), -1)
        for s, z in self.blocks:
            if z == 2:
                mask[s + 1, s] = False
        return float(np.max(np.abs(self.T[mask]), initial=0.0))

    def complex_first(self) -> bool:
        sizes = [z for _, z in self.blocks]
        return sizes == sorted(sizes, reverse=True)

    def is_ordered(self, tol: float = ORDER_TOL) -> bool:
        eig = self.eigenvalues()
        return all(_precedes(a, b, self.descending, tol) <= 0
                   for a, b in zip(eig, eig[1:]))


# ----------------------------------------------------------- computation


def _move_block(T, U, ifst: int, ilst: int):
    T, U, info = dtrexc(T, U, ifst + 1, ilst + 1)
    if info != 0:
        raise ConvergenceError(
            f"block exchange rejected moving block {ifst} to {ilst} "
            "(ill-conditioned swap)")
    return T, U


def _sort_blocks(T, U, key):
    # Selection sort by block moves; blocks are recomputed after each move
    # because an exchange can re-standardize its neighbours.
    T = np.asfortranarray(T, dtype=float)
    U = np.asfortranarray(U, dtype=float)
    pos = 0
    n = T.shape[0]
    while pos < n:
        cand = [(s, z) for s, z in schur_blocks(T) if s >= pos]
        best = min(cand, key=lambda b: key(block_eigenvalue(T, *b)))
        if best[0] != pos:
            T, U = _move_block(T, U, best[0], pos)
        size = next(z for s, z in schur_blocks(T) if s == pos)
        pos += size
    return np.ascontiguousarray(T), np.ascontiguousarray(U)


def _clean(T):
    # zero the entries below the block diagonal (they are rounding noise)
    T = T.copy()
    n = T.shape[0]
    keep = np.triu(np.ones((n, n), dtype=bool))
    for s, z in schur_blocks(T):
        if z == 2:
            keep[s + 1, s] = True
    T[~keep] = 0.0
    return T


def real_schur(A) -> SchurForm:
    """Real Schur form with complex-pair blocks ahead of real eigenvalues."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"square matrix required, got {A.shape}")
    T, U = _lapack_schur(A, output="real")
    # stable partition: complex blocks first, original order otherwise
    T, U = _sort_blocks(T, U, lambda lam: lam.imag == 0.0)
    return SchurForm(U, _clean(T), "raw")


def order_blocks(sf: SchurForm, descending: Optional[bool] = None
                 ) -> SchurForm:
    """Reorder the diagonal blocks into the canonical order."""
    if sf.mode != "raw":
        raise DomainError("reorder before standardizing the 2x2 blocks")
    desc = sf.descending if descending is None else descending
    T, U = _sort_blocks(sf.T, sf.U, order_key(desc))
    return SchurForm(U, _clean(T), "raw", desc)


# ------------------------------------------------------- 2x2 standardizing


@dataclass(frozen=True)
class TwoByTwoBlock:
    """A standardized 2x2 block ``Z = W^T Z_in W``."""

    Z: np.ndarray
    W: np.ndarray
    standardization: str
    c: float = np.nan
    s: float = np.nan
    d1: float = np.nan
    d2: float = np.nan

    @property
    def z11(self):
        return self.Z[0, 0]

    @property
    def z12(self):
        return self.Z[0, 1]

    @property
    def z21(self):
        return self.Z[1, 0]

    @property
    def z22(self):
        return self.Z[1, 1]


def _rot(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, s], [-s, c]])


def is_lambda_r(Z, tol: float = 1e-10) -> bool:
    Z = np.asarray(Z)
    scale = max(1.0, np.abs(Z).max())
    return bool(abs(Z[0, 0] - Z[1, 1]) <= tol * scale
                and Z[0, 1] * Z[1, 0] < 0
                and Z[0, 1] + Z[1, 0] > -tol * scale)


def is_qd(Z, tol: float = 1e-10) -> bool:
    Z = np.asarray(Z)
    scale = max(1.0, np.abs(Z).max()) ** 2
    n1, n2 = np.linalg.norm(Z[:, 0]), np.linalg.norm(Z[:, 1])
    return bool(abs(Z[0, 0] * Z[0, 1] + Z[1, 0] * Z[1, 1]) <= tol * scale
                and Z[0, 1] >= -tol * np.sqrt(scale)
                and n1 >= n2 - tol * np.sqrt(scale))


def standardize_lambda_r_block(Z) -> TwoByTwoBlock:
    """Rotate a complex-eigenvalue block to equal diagonal entries.

    Only rotations are used, so the result is the same for every
    rotation-similar input. For a block that commutes with rotations
    (``z12 == -z21``) the sum condition degenerates to ``z12 + z21 = 0`` and
    the reflection ``diag(1, -1)`` is used to make ``z12 > 0``.
    """
    Z = np.asarray(Z, dtype=float)

    def diff(phi):
        W = _rot(phi)
        Y = W.T @ Z @ W
        return Y[0, 0] - Y[1, 1]

    p, q = diff(0.0), diff(0.25 * np.pi)
    phi0 = 0.5 * np.arctan2(-p, q)
    best = None
    for phi in (phi0, phi0 + 0.5 * np.pi):
        W = _rot(phi)
        Y = W.T @ Z @ W
        if best is None or Y[0, 1] + Y[1, 0] > best[1][0, 1] + best[1][1, 0]:
            best = (W, Y)
    W, Y = best
    Y[1, 1] = Y[0, 0] = 0.5 * (Y[0, 0] + Y[1, 1])
    if not Y[0, 1] * Y[1, 0] < 0:
        raise DomainError("2x2 block has real eigenvalues; blocks mis-split")
    scale = max(1.0, np.abs(Y).max())
    if abs(Y[0, 1] + Y[1, 0]) <= 1e-14 * scale and Y[0, 1] < 0:
        F = np.diag([1.0, -1.0])
        W, Y = W @ F, F @ Y @ F
    return TwoByTwoBlock(Y, W, "lambda_r")


def standardize_qd_block(Z) -> TwoByTwoBlock:
    """Orthogonally similar ``W^T Z W = Q D`` in qd form.

    From the SVD ``Z = U S V^T`` the similarity ``W = V`` gives
    ``V^T Z V = (V^T U) S``; a final ``diag(1, -1)`` makes ``z12 >= 0``.
    Singular values come out descending, so ``d1 >= d2``. When ``det Z < 0``
    the factor ``Q`` is necessarily a reflection ``[[c, s], [s, -c]]``.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.shape != (2, 2):
        raise DimensionError("2x2 block required")
    Uz, sv, Vt = np.linalg.svd(Z)
    if sv[1] <= 1e-14 * max(sv[0], 1e-300):
        raise DomainError("qd standardization needs a nonsingular block")
    det = np.linalg.det(Z)
    if sv[0] - sv[1] <= EQUAL_SV_RTOL * sv[0] and det < 0:
        # Z = r * (symmetric reflection): any rotation keeps the form, so
        # pin it to the eigenbasis, diag(r, -r)
        w, V = np.linalg.eigh(0.5 * (Z + Z.T))
        W = V[:, ::-1]
    else:
        W = Vt.T
    Y = W.T @ Z @ W
    if Y[0, 1] < 0:
        F = np.diag([1.0, -1.0])
        W, Y = W @ F, F @ Y @ F
    d1, d2 = np.linalg.norm(Y[:, 0]), np.linalg.norm(Y[:, 1])
    return TwoByTwoBlock(Y, W, "qd", c=Y[0, 0] / d1, s=Y[0, 1] / d2,
                         d1=d1, d2=d2)


def _standardize_blocks(sf: SchurForm, fn, mode: str) -> SchurForm:
    T = sf.T.copy()
    U = sf.U.copy()
    for s, z in sf.blocks:
        if z != 2:
            continue
        blk = fn(T[s:s + 2, s:s + 2])
        W = blk.W
        T[s:s + 2, :] = W.T @ T[s:s + 2, :]
        T[:, s:s + 2] = T[:, s:s + 2] @ W
        T[s:s + 2, s:s + 2] = blk.Z
        U[:, s:s + 2] = U[:, s:s + 2] @ W
    return replace(sf, U=U, T=T, mode=mode)


def standardize_lambda_r(sf: SchurForm) -> SchurForm:
    return _standardize_blocks(sf, standardize_lambda_r_block, "lambda_r")


def standardize_qd(sf: SchurForm) -> SchurForm:
    return _standardize_blocks(sf, standardize_qd_block, "qd")


def ordered_qd_schur(A, descending: bool = False) -> SchurForm:
    """Ordered real Schur form of ``A`` with qd 2x2 blocks."""
    return standardize_qd(order_blocks(real_schur(A), descending))


def fix_block_signs(A, C, U, start: int = 0):
    """Choose the free sign of each diagonal block at or after ``start``.

    Conjugating a block by -I keeps it (and the qd/lambda_r form) intact
    but flips the entries of the stack [C; A] above it. The sign is fixed by
    making the largest-magnitude such entry positive.
    """
    A = A.copy()
    C = C.copy()
    U = U.copy()
    for s, z in schur_blocks(A[start:, start:]):
        s += start
        cols = slice(s, s + z)
        v = np.concatenate([C[:, cols].ravel(), A[:s, cols].ravel()])
        if v.size == 0 or not np.any(v):
            continue
        if v[np.argmax(np.abs(v))] < 0:
            A[cols, :] *= -1.0
            A[:, cols] *= -1.0
            C[:, cols] *= -1.0
            U[:, cols] *= -1.0
    return A, C, U


def schur_on(pair: OutputPair, descending: bool = False):
    """Output normal pair whose advance matrix is ordered qd Schur.

    Returns the transformed pair and the Schur data of the normalized
    advance matrix; the block signs are fixed with :func:`fix_block_signs`,
    which makes the result unique when the eigenvalues are distinct.
    """
    from .normal_form import to_output_normal

    on, _ = to_output_normal(pair)
    sf = ordered_qd_schur(on.A, descending)
    A, C, U = fix_block_signs(sf.T, on.C @ sf.U, sf.U)
    sf = replace(sf, T=A, U=U)
    return OutputPair(A, C), sf


# -------------------------------------------------------------- diagnostics


@dataclass(frozen=True)
class BlockStructureReport:
    groups: List[Tuple[int, int]]
    off_block: float


def block_diagonal_structure_check(sf1: SchurForm, sf2: SchurForm, U,
                                   sep: float = 1e-4) -> BlockStructureReport:
    """Mass of ``U`` outside the eigenvalue-group block diagonal.

    ``U`` relates the two forms by ``T2 @ U = U @ T1``. Consecutive blocks
    of ``sf1`` whose eigenvalues agree to ``sep`` form one group.
    """
    U = np.asarray(U, dtype=float)
    groups = []
    prev = None
    for s, z in sf1.blocks:
        lam = block_eigenvalue(sf1.T, s, z)
        if prev is not None and abs(lam - prev) < sep:
            g0, gz = groups[-1]
            groups[-1] = (g0, gz + z)
        else:
            groups.append((s, z))
        prev = lam
    mask = np.ones_like(U, dtype=bool)
    for s, z in groups:
        mask[s:s + z, s:s + z] = False
    off = float(np.max(np.abs(U[mask]), initial=0.0))
    return BlockStructureReport(groups, off)
