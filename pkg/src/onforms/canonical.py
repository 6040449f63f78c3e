"""Hessenberg-observer and observer-triangular forms of output normal pairs.

Both reductions are orthogonal similarities ``(U^T A U, C U)`` assembled
from adjacent Givens rotations, so output normality carries over. The
stack orientation is always ``[C; A]``.

Zero tests use ``tol = 1e-8 * |[C; A]|_F`` unless a tolerance is passed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import FormError
from .pair import OutputPair
from .rotations import SignatureMatrix, apply_signature
from .schur import fix_block_signs, ordered_qd_schur, schur_blocks

ZERO_RTOL = 1e-8
DEGENERATE_TOL = 1e-8
ON_TOL = 1e-8
FORMS = ("HO", "OTS", "Schur")


def default_tol(pair: OutputPair) -> float:
    return ZERO_RTOL * max(float(np.linalg.norm(pair.stack)), 1.0)


def _require_on(pair: OutputPair, tol: float = ON_TOL):
    r = pair.on_residual()
    if r > tol:
        raise FormError(f"pair is not output normal (residual {r:.3g})")


# ------------------------------------------------------- Givens similarity


class _Work:
    """Mutable A, C, U under accumulated orthogonal similarity."""

    def __init__(self, pair: OutputPair):
        self.A = pair.A.copy()
        self.C = pair.C.copy()
        self.U = np.eye(pair.n)

    def stack_row(self, r: int) -> np.ndarray:
        d = self.C.shape[0]
        return self.C[r] if r < d else self.A[r - d]

    def rotate(self, i: int, j: int, a: float, b: float) -> bool:
        """Similarity by G(i, j) chosen so (a, b) in columns (i, j) -> (r, 0).

        The same (c, s) maps rows (a, b) -> (r, 0) under G^T, so it serves
        both row and column driven sweeps.
        """
        r = np.hypot(a, b)
        if b == 0.0 or r == 0.0:
            return False
        c, s = a / r, -b / r
        for X in (self.A, self.C, self.U):
            xi, xj = X[:, i].copy(), X[:, j]
            X[:, i] = c * xi - s * xj
            X[:, j] = s * xi + c * xj
        ai, aj = self.A[i].copy(), self.A[j]
        self.A[i] = c * ai - s * aj
        self.A[j] = s * ai + c * aj
        return True

    def pair(self) -> OutputPair:
        return OutputPair(self.A, self.C)


def to_hessenberg_observer(pair: OutputPair, standard: bool = True,
                           check_on: bool = True):
    """Orthogonally reduce an output normal pair to Hessenberg-observer form.

    The first row of ``C`` is rotated onto ``e_1``; the Hessenberg sweep
    then never touches the first state, so that row stays put.

    Returns
    -------
    (OutputPair, U)
        With ``standard`` (default) the signs are normalized so that
        ``C[0, 0] >= 0`` and ``A[i+1, i] >= 0``.
    """
    if check_on:
        _require_on(pair)
    w = _Work(pair)
    n = pair.n
    for j in range(n - 1, 0, -1):
        if w.rotate(j - 1, j, w.C[0, j - 1], w.C[0, j]):
            w.C[0, j] = 0.0
    for k in range(n - 2):
        for i in range(n - 1, k + 1, -1):
            # row rotation (i-1, i) on column k; its column half acts on
            # columns i-1, i > k
            if w.rotate(i - 1, i, w.A[i - 1, k], w.A[i, k]):
                w.A[i, k] = 0.0
    out, U = w.pair(), w.U
    if standard:
        out, E = standardize(out, "HO")
        U = U * E.signs[None, :]
    return out, U


def to_ots(pair: OutputPair, standard: bool = True, check_on: bool = True):
    """Orthogonally reduce an output normal pair to observer triangular form.

    Row r of the stack has its entries right of the diagonal rotated into
    column r. For r >= d this is row r - d of A, and the accompanying row
    rotations only touch rows r and beyond, so finished rows stay finished.
    """
    if check_on:
        _require_on(pair)
    w = _Work(pair)
    n = pair.n
    for r in range(n):
        for j in range(n - 1, r, -1):
            row = w.stack_row(r)
            if w.rotate(j - 1, j, row[j - 1], row[j]):
                w.stack_row(r)[j] = 0.0
    out, U = w.pair(), w.U
    if standard:
        out, E = standardize(out, "OTS")
        U = U * E.signs[None, :]
    return out, U


# ---------------------------------------------------------- classification


def ots_residual(pair: OutputPair) -> float:
    Q = pair.stack
    return float(np.max(np.abs(np.triu(Q, 1)), initial=0.0))


def ho_residual(pair: OutputPair) -> float:
    a = np.max(np.abs(np.tril(pair.A, -2)), initial=0.0)
    c = np.max(np.abs(pair.C[0, 1:]), initial=0.0)
    return float(max(a, c))


def schur_residual(pair: OutputPair, tol: Optional[float] = None) -> float:
    """Largest entry that must vanish for A to be quasi upper triangular."""
    A = pair.A
    n = pair.n
    res = float(np.max(np.abs(np.tril(A, -2)), initial=0.0))
    sub = np.abs(np.diag(A, -1))
    if tol is None:
        tol = default_tol(pair)
    # two consecutive nonzero subdiagonal entries cannot both survive
    for i in range(n - 2):
        if sub[i] > tol and sub[i + 1] > tol:
            res = max(res, float(min(sub[i], sub[i + 1])))
    return res


@dataclass(frozen=True)
class FormClassification:
    """Structure flags of a pair in one canonical form.

    ``reducible_index`` is the first offending position: for HO, the ``k``
    with ``A[k, k-1] == 0`` (the size of the leading irreducible block);
    for OTS, the 0-based diagonal index with ``Q[k, k] == 0``.
    """

    form: Optional[str]
    standard: bool = False
    unreduced: bool = False
    degenerate: bool = False
    reducible_index: Optional[int] = None
    residual: float = np.inf

    @property
    def strict(self) -> bool:
        return self.standard and self.unreduced


def classify(pair: OutputPair, tol: Optional[float] = None,
             form: Optional[str] = None) -> FormClassification:
    """Flags for ``form``; if None, the first of HO, OTS, Schur that fits."""
    if tol is None:
        tol = default_tol(pair)
    forms = FORMS if form is None else (form,)
    for f in forms:
        if f not in FORMS:
            raise ValueError(f"unknown form {f!r}")
        res = {"HO": ho_residual, "OTS": ots_residual}.get(
            f, lambda p: schur_residual(p, tol))(pair)
        if res <= tol:
            return _flags(pair, f, tol, res)
    return FormClassification(None)


def _flags(pair, form, tol, res) -> FormClassification:
    if form == "OTS":
        diag = np.diag(pair.stack)
        zero = np.flatnonzero(np.abs(diag) < tol)
        return FormClassification(
            form, standard=bool(np.all(diag > -tol)),
            unreduced=zero.size == 0,
            reducible_index=int(zero[0]) if zero.size else None,
            residual=res)
    if form == "HO":
        c11 = pair.C[0, 0]
        sub = np.diag(pair.A, -1)
        degenerate = abs(c11) >= 1.0 - DEGENERATE_TOL
        zero = np.flatnonzero(np.abs(sub) < tol)
        standard = bool(np.all(sub > -tol) and c11 > -tol and not degenerate)
        return FormClassification(
            form, standard=standard,
            unreduced=zero.size == 0 and abs(c11) >= tol,
            degenerate=degenerate,
            reducible_index=int(zero[0]) + 1 if zero.size else None,
            residual=res)
    # Schur: "standard" means ordered with qd 2x2 blocks
    from .schur import SchurForm, is_qd
    sf = SchurForm(np.eye(pair.n), pair.A, "qd")
    ok = sf.is_ordered() and sf.complex_first() and all(
        is_qd(pair.A[s:s + 2, s:s + 2]) for s, z in sf.blocks if z == 2)
    return FormClassification(form, standard=ok, unreduced=True,
                              residual=res)


# ---------------------------------------------------------- standardizing


def standardize(pair: OutputPair, form: str
                ) -> Tuple[OutputPair, SignatureMatrix]:
    """Signature ``E`` making the form's sign conventions hold.

    Signs are fixed greedily left to right: OTS needs ``Q[i, i] >= 0``,
    whose sign depends on ``E[i]`` and (for i >= d) ``E[i - d]``; HO needs
    ``C[0, 0] >= 0`` and ``A[i+1, i] >= 0``. For Schur the block signs are
    fixed as in :func:`onforms.schur.fix_block_signs`.
    """
    n, d = pair.n, pair.d
    e = np.ones(n)
    if form == "OTS":
        Q = pair.stack
        for i in range(n):
            v = Q[i, i] * (e[i - d] if i >= d else 1.0)
            if v < 0:
                e[i] = -1.0
    elif form == "HO":
        if pair.C[0, 0] < 0:
            e[0] = -1.0
        for i in range(n - 1):
            if pair.A[i + 1, i] * e[i] < 0:
                e[i + 1] = -1.0
    elif form == "Schur":
        A, _, U = fix_block_signs(pair.A, pair.C, np.eye(n))
        e = np.sign(np.diag(U))
    else:
        raise ValueError(f"unknown form {form!r}")
    E = SignatureMatrix(e)
    return apply_signature(pair, E), E


# --------------------------------------------------- degenerate / reducible


def split_degenerate(pair: OutputPair, tol: float = DEGENERATE_TOL):
    """Peel a leading identity block off the stack: ``Q = I_m (+) Q_hat``.

    Returns ``(m, remainder)``; ``m <= d`` and the remainder has the same
    number of outputs as ``pair``.
    """
    n, d = pair.n, pair.d
    Q = pair.stack
    m = 0
    while m < min(d, n) and abs(Q[m, m]) >= 1.0 - tol:
        m += 1
    if m == 0:
        return 0, pair
    if m == n:
        raise FormError("every state is degenerate; nothing remains")
    lead = Q[:m, :m]
    if (np.abs(np.abs(lead) - np.eye(m)).max() > tol
            or np.abs(Q[m:, :m]).max(initial=0.0) > tol
            or np.abs(Q[:m, m:]).max(initial=0.0) > tol):
        raise FormError("leading degenerate block is not a direct summand")
    return m, OutputPair.from_stack(Q[m:, m:], d)


def reduce_partial_schur(pair: OutputPair, tol: Optional[float] = None,
                         descending: bool = False):
    """Put the trailing block of a reducible HO pair in ordered qd Schur form.

    With ``A[k, k-1] == 0`` the transform is ``I_k (+) U_t``; the leading
    k x k block and the first k columns of C are returned untouched.
    Block signs of the trailing part are fixed, so for distinct trailing
    eigenvalues the result does not depend on how the trailing block was
    represented.
    """
    if tol is None:
        tol = default_tol(pair)
    cls = classify(pair, tol, "HO")
    if cls.form != "HO":
        raise FormError("pair is not in Hessenberg-observer form")
    if cls.degenerate:
        raise FormError("pair is degenerate; split it first")
    k = cls.reducible_index
    if k is None:
        raise FormError("pair is not reducible")
    A, C = pair.A, pair.C
    n = pair.n
    sf = ordered_qd_schur(A[k:, k:], descending)
    Ut = sf.U
    A2 = np.empty_like(A)
    A2[:k, :k] = A[:k, :k]
    A2[:k, k:] = A[:k, k:] @ Ut
    A2[k:, :k] = Ut.T @ A[k:, :k]
    A2[k:, k:] = sf.T
    C2 = np.empty_like(C)
    C2[:, :k] = C[:, :k]
    C2[:, k:] = C[:, k:] @ Ut
    U = np.eye(n)
    U[k:, k:] = Ut
    A2, C2, U = fix_block_signs(A2, C2, U, start=k)
    return OutputPair(A2, C2), U


def trailing_blocks(pair: OutputPair, k: int) -> List[Tuple[int, int]]:
    return [(s + k, z) for s, z in schur_blocks(pair.A[k:, k:])]


# -------------------------------------------------------------- invariants


def signature_sequence(pair: OutputPair, count: Optional[int] = None
                       ) -> np.ndarray:
    """``s_k = C A^k C^T`` for ``k = 0 .. count-1`` (default ``2n``).

    Invariant under orthogonal similarity, hence the cross-form oracle.
    """
    if count is None:
        count = 2 * pair.n
    X = pair.C.T.copy()
    out = np.empty((count, pair.d, pair.d))
    for k in range(count):
        out[k] = pair.C @ X
        X = pair.A @ X
    return out
