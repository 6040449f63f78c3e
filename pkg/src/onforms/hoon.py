"""Orthogonal-product parameterization of Hessenberg-observer ON pairs.

With ``C[0] = (sqrt(1 - gamma^2), 0, ..., 0)`` and ``C_hat`` the remaining
d-1 rows of C,

    [C_hat; A] = V_1 V_2 ... V_n [0_{d-1,n}; P(gamma)].

For k < n, ``V_k`` embeds a (d+1) x (d+1) ORP member ``(O, x; y^T, mu)``
(target: last coordinate) onto rows ``0 .. d-1`` and ``d+k-1`` of the
(n+d-1)-dimensional stack; ``V_n`` is a d x d ORP member onto ``e_d`` acting
on rows ``0 .. d-1``. ``P(gamma)`` has ``P[1, 0] = gamma``,
``P[k+1, k] = 1`` and ``P[0, n-1] = 1``.

``X_k = V_1 ... V_k`` splits as ``[N_k, H_k] (+) I`` with H upper triangular:

    N_k = [N_{k-1} O_k; y_k^T]        H_k = [[H_{k-1}, N_{k-1} x_k], [0, mu_k]]
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Sequence

import numpy as np

from .canonical import DEGENERATE_TOL, classify
from .errors import DimensionError, DomainError, FormError
from .pair import OutputPair
from .rotations import (OrpBlocks, OrpFamily, OrpParam, orp_apply,
                        orp_blocks, orp_matrix, orp_reduce)

BOUNDARY_TOL = 1e-10
HOON_KINDS = ("Q3", "householder")
FACTOR_KINDS = ("Q3",)


def stage_families(d: int, kind: str = "Q3"):
    """Families for stages 1..n-1 (dimension d+1) and stage n (dimension d)."""
    if kind == "householder":
        return (OrpFamily(kind, d + 1, target=d),
                OrpFamily(kind, d, target=d - 1))
    return OrpFamily(kind, d + 1), OrpFamily(kind, d)


def scaled_permutation(n: int, gamma: float) -> np.ndarray:
    if n < 2:
        raise DimensionError("P(gamma) needs n >= 2")
    if not 0.0 <= gamma < 1.0:
        raise DomainError(f"gamma must lie in [0, 1), got {gamma}")
    P = np.zeros((n, n))
    P[1, 0] = gamma
    for k in range(1, n - 1):
        P[k + 1, k] = 1.0
    P[0, n - 1] = 1.0
    return P


@dataclass(frozen=True)
class HoonParams:
    gamma: float
    thetas: Sequence[OrpParam]
    last: OrpParam

    def __post_init__(self):
        thetas = tuple(self.thetas)
        if not thetas:
            raise DimensionError("HOON pairs need n >= 2")
        fam = thetas[0].family
        d = fam.m - 1
        if any(t.family != fam for t in thetas):
            raise DimensionError("stages 1..n-1 must share one family")
        if self.last.family.m != d:
            raise DimensionError(
                f"final stage must be an ORP of O({d}), got "
                f"O({self.last.family.m})")
        if fam.target != d or self.last.family.target != d - 1:
            raise DimensionError("HOON stages reduce onto the last coordinate")
        g = float(self.gamma)
        if not 0.0 <= g < 1.0:
            raise DomainError(f"gamma must lie in [0, 1), got {g}")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "gamma", g)

    @property
    def n(self) -> int:
        return len(self.thetas) + 1

    @property
    def d(self) -> int:
        return self.thetas[0].family.m - 1

    @property
    def kind(self) -> str:
        return self.thetas[0].family.kind

    @property
    def angles(self) -> np.ndarray:
        """``(n-1, d)`` angles of stages 1..n-1."""
        return np.array([t.thetas for t in self.thetas])

    def flat(self) -> np.ndarray:
        """``[gamma, stage angles row by row, final angles]``."""
        return np.concatenate([[self.gamma], self.angles.ravel(),
                               self.last.thetas])

    @classmethod
    def from_angles(cls, gamma, angles, last, kind: str = "Q3",
                    last_sign: float = 1.0) -> "HoonParams":
        angles = np.atleast_2d(np.asarray(angles, dtype=float))
        d = angles.shape[1]
        fam, fam_last = stage_families(d, kind)
        return cls(gamma, [OrpParam(a, fam) for a in angles],
                   OrpParam(last, fam_last, last_sign))

    def mus(self) -> np.ndarray:
        return np.array([orp_blocks(t).mu for t in self.thetas])

    def check_domain(self):
        for t in self.thetas:
            t.check_domain()
        self.last.check_domain()


@dataclass(frozen=True)
class XState:
    """Blocks of ``X_k``: ``N`` ((d+k) x d) and ``H`` ((d+k) x k)."""

    N: np.ndarray
    H: np.ndarray


def x_states(blocks: Sequence[OrpBlocks], d: int) -> Iterator[XState]:
    N = np.eye(d)
    H = np.zeros((d, 0))
    for b in blocks:
        k = H.shape[1]
        H2 = np.zeros((d + k + 1, k + 1))
        H2[:d + k, :k] = H
        H2[:d + k, k] = N @ b.x
        H2[d + k, k] = b.mu
        N = np.vstack([N @ b.O, b.y[None, :]])
        H = H2
        yield XState(N, H)


def hoon_reconstruct(params: HoonParams) -> OutputPair:
    """HOON pair from ``(gamma, theta_1 .. theta_n)`` via the recurrences."""
    params.check_domain()
    n, d, g = params.n, params.d, params.gamma
    st = None
    for st in x_states([orp_blocks(t) for t in params.thetas], d):
        pass
    w = st.N @ orp_matrix(params.last)[:, -1]
    S = np.empty((n + d - 1, n))
    S[:, 0] = g * st.H[:, 0]
    S[:, 1:n - 1] = st.H[:, 1:]
    S[:, n - 1] = w
    C = np.zeros((d, n))
    C[0, 0] = np.sqrt(1.0 - g * g)
    C[1:] = S[:d - 1]
    return OutputPair(S[d - 1:], C)


def embedded_stage(p: OrpParam, k: int, n: int) -> np.ndarray:
    """Dense ``V_{k+1}`` in dimension n+d-1 (0-based stage ``k``)."""
    fam = p.family
    d = fam.m - 1 if k < n - 1 else fam.m
    G = np.eye(n + d - 1)
    idx = list(range(d)) + ([d + k] if k < n - 1 else [])
    G[np.ix_(idx, idx)] = orp_matrix(p)
    return G


def hoon_dense(params: HoonParams) -> OutputPair:
    """Reference reconstruction by full matrix products."""
    n, d = params.n, params.d
    X = np.eye(n + d - 1)
    for k, p in enumerate(params.thetas):
        X = X @ embedded_stage(p, k, n)
    X = X @ embedded_stage(params.last, n - 1, n)
    R = np.zeros((n + d - 1, n))
    R[d - 1:] = scaled_permutation(n, params.gamma)
    S = X @ R
    C = np.zeros((d, n))
    C[0, 0] = np.sqrt(1.0 - params.gamma ** 2)
    C[1:] = S[:d - 1]
    return OutputPair(S[d - 1:], C)


def hoon_factor(pair: OutputPair, kind: str = "Q3", tol: float = 1e-8
                ) -> HoonParams:
    """``(gamma, theta_1 .. theta_n)`` of a standard nondegenerate HOON pair.

    Stage k (k < n) zeroes rows ``0 .. d-1`` of column k-1 of the running
    ``[C_hat; A]`` stack into row ``d+k-1``; the final stage maps what is
    left of the last column onto ``e_d``. ``gamma`` is taken as the norm of
    the first column of ``[C_hat; A]``, equal to ``sqrt(1 - C[0,0]^2)`` but
    accurate when ``C[0, 0]`` is close to one.
    """
    if kind not in FACTOR_KINDS:
        raise DomainError(f"factorization needs one of {FACTOR_KINDS}")
    n, d = pair.n, pair.d
    if n < 2:
        raise DimensionError("HOON factorization needs n >= 2")
    cls = classify(pair, form="HO")
    if cls.form != "HO":
        raise FormError("pair is not in Hessenberg-observer form")
    r = pair.on_residual()
    if r > tol:
        raise FormError(f"pair is not output normal (residual {r:.3g})")
    c11 = pair.C[0, 0]
    if c11 < 0:
        raise FormError("C[0,0] is negative; standardize the pair first")
    if c11 >= 1.0 - DEGENERATE_TOL:
        raise FormError(
            f"degenerate pair: C11 (C[0,0]) = {c11!r} is within "
            f"{DEGENERATE_TOL:g} of 1")
    S = np.vstack([pair.C[1:], pair.A])
    gamma = float(np.linalg.norm(S[:, 0]))
    if gamma <= tol:
        raise FormError("A[1,0] vanishes: the pair is reducible at k=1")
    fam, fam_last = stage_families(d, kind)
    thetas: List[OrpParam] = []
    for k in range(n - 1):
        coords = list(range(d)) + [d + k]
        p = orp_reduce(fam, S[coords, k])
        orp_apply(p, S[:, k:], coords, transpose=True)
        thetas.append(p)
    last = orp_reduce(fam_last, S[:d, n - 1])
    return HoonParams(min(gamma, np.nextafter(1.0, 0.0)), thetas, last)


def hoon_domain_check(params: HoonParams, tol: float = BOUNDARY_TOL) -> str:
    """``'strict'`` when gamma > 0 and all mu_k > 0; ``'unreduced'`` when
    none vanish; ``'boundary'`` otherwise."""
    mu = params.mus()
    if params.gamma <= tol or np.any(np.abs(mu) <= tol):
        return "boundary"
    if np.all(mu > 0):
        return "strict"
    return "unreduced"


def random_hoon_params(n: int, d: int, rng, strict: bool = True,
                       kind: str = "Q3", spread: float = 0.98) -> HoonParams:
    """Angles uniform on the family domain, gamma uniform on (0.05, 0.95).

    ``spread`` scales the half-range angles; smaller values keep every
    subdiagonal well away from zero.
    """
    if n < 2:
        raise DimensionError("HOON pairs need n >= 2")
    gamma = rng.uniform(0.05, 0.95)
    if kind == "householder":
        ang = rng.normal(size=(n - 1, d))
        last = rng.normal(size=d - 1)
        return HoonParams.from_angles(gamma, ang, last, kind)
    half = 0.5 * np.pi
    ang = rng.uniform(-half, half, size=(n - 1, d)) * spread
    if not strict:
        ang[:, -1] = rng.uniform(-np.pi, np.pi, size=n - 1)
    last = rng.uniform(-half, half, size=d - 1) * spread
    if d > 1:
        last[-1] = rng.uniform(-np.pi, np.pi) * 0.999
    sign = 1.0 if d > 1 else float(rng.choice([-1.0, 1.0]))
    return HoonParams.from_angles(gamma, ang, last, kind, sign)
