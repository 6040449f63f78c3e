"""Orthogonal-product parameterization of observer-triangular ON pairs.

An OTSON stack is written as

    [C; A] = Q_n Q_{n-1} ... Q_1 [I_n; 0_{d,n}],

where ``Q_k`` embeds a (d+1) x (d+1) ORP member ``(mu, y^T; x, O)`` onto
the coordinates ``k`` and ``n .. n+d-1`` (0-based ``k - 1``). Writing
``Gamma_k = Q_k ... Q_1`` as ``[[L, 0, N], [0, I, 0], [M, 0, P]]`` gives the
recurrences

    L_k = [[L_{k-1}, 0], [y^T M_{k-1}, mu]]     N_k = [N_{k-1}; y^T P_{k-1}]
    M_k = [O M_{k-1}, x]                         P_k = O P_{k-1}

and the stack is ``[L_n; M_n]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Sequence

import numpy as np

from .canonical import classify
from .errors import DimensionError, DomainError, FormError
from .pair import OutputPair
from .rotations import (OrpBlocks, OrpFamily, OrpParam, orp_apply,
                        orp_blocks, orp_matrix, orp_reduce)

BOUNDARY_TOL = 1e-10
OTSON_KINDS = ("Q1", "Q2", "householder")
FACTOR_KINDS = ("Q1", "Q2")


@dataclass(frozen=True)
class OtsonParams:
    """One ORP parameter vector per state, ``thetas[k]`` for stage k+1."""

    thetas: Sequence[OrpParam]
    d: int

    def __post_init__(self):
        thetas = tuple(self.thetas)
        if not thetas:
            raise DimensionError("at least one stage is required")
        fam = thetas[0].family
        if fam.m != self.d + 1 or fam.target != 0:
            raise DimensionError(
                f"stages must be ORPs of O({self.d + 1}) onto e_1")
        if any(t.family != fam for t in thetas):
            raise DimensionError("all stages must share one family")
        object.__setattr__(self, "thetas", thetas)

    @property
    def n(self) -> int:
        return len(self.thetas)

    @property
    def family(self) -> OrpFamily:
        return self.thetas[0].family

    @property
    def angles(self) -> np.ndarray:
        """``(n, d)`` array, row k holding stage k+1."""
        return np.array([t.thetas for t in self.thetas])

    @classmethod
    def from_angles(cls, angles, kind: str = "Q1") -> "OtsonParams":
        angles = np.atleast_2d(np.asarray(angles, dtype=float))
        n, d = angles.shape
        fam = OrpFamily(kind, d + 1)
        return cls([OrpParam(a, fam) for a in angles], d)

    def mus(self) -> np.ndarray:
        return np.array([orp_blocks(t).mu for t in self.thetas])

    def check_domain(self):
        for t in self.thetas:
            t.check_domain()


@dataclass(frozen=True)
class GammaState:
    """Blocks of ``Gamma_k``: ``L`` (k x k), ``M`` (d x k), ``N``, ``P``."""

    L: np.ndarray
    M: np.ndarray
    N: np.ndarray
    P: np.ndarray

    @property
    def k(self) -> int:
        return self.L.shape[0]


def gamma_states(blocks: Sequence[OrpBlocks], d: int) -> Iterator[GammaState]:
    """Run the recurrences, yielding ``Gamma_1 .. Gamma_n``."""
    L = np.zeros((0, 0))
    M = np.zeros((d, 0))
    N = np.zeros((0, d))
    P = np.eye(d)
    for b in blocks:
        k = L.shape[0]
        L2 = np.zeros((k + 1, k + 1))
        L2[:k, :k] = L
        L2[k, :k] = b.y @ M
        L2[k, k] = b.mu
        N = np.vstack([N, b.y @ P])
        M = np.hstack([b.O @ M, b.x[:, None]])
        P = b.O @ P
        L = L2
        yield GammaState(L, M, N, P)


def otson_reconstruct(params: OtsonParams) -> OutputPair:
    """Pair whose stack is ``Q_n ... Q_1 [I; 0]``, via the recurrences."""
    params.check_domain()
    state = None
    for state in gamma_states([orp_blocks(t) for t in params.thetas],
                              params.d):
        pass
    return OutputPair.from_stack(np.vstack([state.L, state.M]), params.d)


def embedded_stage(p: OrpParam, k: int, n: int) -> np.ndarray:
    """Dense (n+d) x (n+d) ``Q_{k+1}`` for 0-based stage ``k``."""
    d = p.family.m - 1
    G = np.eye(n + d)
    idx = [k] + list(range(n, n + d))
    G[np.ix_(idx, idx)] = orp_matrix(p)
    return G


def otson_dense(params: OtsonParams) -> OutputPair:
    """Reference reconstruction by full (n+d)^2 matrix products."""
    n, d = params.n, params.d
    G = np.eye(n + d)
    for k, p in enumerate(params.thetas):
        G = embedded_stage(p, k, n) @ G
    return OutputPair.from_stack(G[:, :n], d)


def otson_factor(pair: OutputPair, kind: str = "Q1", tol: float = 1e-8
                 ) -> OtsonParams:
    """Stage parameters of an OTSON pair, determined from the last stage back.

    Stage k zeroes the ``d`` entries of column k in the bottom rows
    ``n .. n+d-1``; orthonormality then clears row k as well.

    Only the signed Givens families can be factored: an unsigned
    Householder stage maps a column to ``-|h| e_1`` whenever its diagonal
    entry is positive, so the sweep would not end at ``[I; 0]``.
    """
    if kind not in FACTOR_KINDS:
        raise DomainError(f"factorization needs one of {FACTOR_KINDS}")
    cls = classify(pair, form="OTS")
    if cls.form != "OTS":
        raise FormError("pair is not in observer triangular form")
    r = pair.on_residual()
    if r > tol:
        raise FormError(f"pair is not output normal (residual {r:.3g})")
    n, d = pair.n, pair.d
    fam = OrpFamily(kind, d + 1)
    W = pair.stack.copy()
    thetas: List[OrpParam] = [None] * n
    for k in range(n - 1, -1, -1):
        coords = [k] + list(range(n, n + d))
        h = W[coords, k]
        if not np.any(h):
            raise FormError(f"column {k} has no active mass")
        p = orp_reduce(fam, h)
        orp_apply(p, W[:, :k + 1], coords, transpose=True)
        thetas[k] = p
    return OtsonParams(thetas, d)


def otson_domain_check(params: OtsonParams, tol: float = BOUNDARY_TOL) -> str:
    """``'strict'`` (all mu > 0), ``'unreduced'`` (all mu != 0) or
    ``'boundary'`` (some |mu| <= tol, where parameters stop being unique)."""
    mu = params.mus()
    if np.any(np.abs(mu) <= tol):
        return "boundary"
    if np.all(mu > 0):
        return "strict"
    return "unreduced"


def otson_bottom_rows(params: OtsonParams) -> np.ndarray:
    """Last d+2 rows of A from the closed form in stages n-1 and n.

    Rows are stack rows ``n-2 .. n+d-1``:

        [ y_{n-1}^T M_{n-2},              mu_{n-1},           0    ]
        [ y_n^T O_{n-1} M_{n-2},          y_n^T x_{n-1},      mu_n ]
        [ O_n O_{n-1} M_{n-2},            O_n x_{n-1},        x_n  ]
    """
    n, d = params.n, params.d
    if n < d + 2:
        raise DimensionError(f"need n >= d + 2, got n={n}, d={d}")
    blocks = [orp_blocks(t) for t in params.thetas]
    M = np.zeros((d, 0))
    for st in gamma_states(blocks[:n - 2], d):
        M = st.M
    b1, b2 = blocks[n - 2], blocks[n - 1]
    out = np.zeros((d + 2, n))
    out[0, :n - 2] = b1.y @ M
    out[0, n - 2] = b1.mu
    out[1, :n - 2] = b2.y @ b1.O @ M
    out[1, n - 2] = b2.y @ b1.x
    out[1, n - 1] = b2.mu
    out[2:, :n - 2] = b2.O @ b1.O @ M
    out[2:, n - 2] = b2.O @ b1.x
    out[2:, n - 1] = b2.x
    return out


def random_otson_params(n: int, d: int, rng, kind: str = "Q1",
                        strict: bool = True, spread: float = 0.98
                        ) -> OtsonParams:
    """Angles drawn uniformly from the family domain.

    With ``strict`` the extended-range angle is restricted so that every
    ``mu_k`` is positive (Givens families) and kept away from the boundary.
    ``spread`` scales the half-range angles; values near 1 reach the
    boundary, where angle recovery is limited by eps over the smallest
    singular value of the parameter Jacobian.
    """
    if kind == "householder":
        ang = rng.normal(size=(n, d))
        p = OtsonParams.from_angles(ang, kind)
        if strict:
            # the Householder mu is -sign(h_0) * ..., fix by resampling signs
            p = _strict_householder(p, rng)
        return p
    half = 0.5 * np.pi
    ang = rng.uniform(-half, half, size=(n, d)) * spread
    fam = OrpFamily(kind, d + 1)
    w = fam.wide_index()
    if not strict:
        ang[:, w] = rng.uniform(-np.pi, np.pi, size=n)
    return OtsonParams.from_angles(ang, kind)


def _strict_householder(p: OtsonParams, rng) -> OtsonParams:
    thetas = []
    for t in p.thetas:
        for _ in range(100):
            if orp_blocks(t).mu > 1e-3:
                break
            t = OrpParam(rng.normal(size=t.thetas.shape), t.family)
        thetas.append(t)
    return OtsonParams(thetas, p.d)
