"""Givens rotations, signature matrices and orthogonal reduction families.

Index conventions are 0-based throughout. ``G(i, j, theta)`` has
``g[i, i] = g[j, j] = cos(theta)``, ``g[i, j] = sin(theta)`` and
``g[j, i] = -sin(theta)``.

An orthogonal reduction parameterization (ORP) is a family of m x m
orthogonal matrices ``Q(theta)``, ``len(theta) == m - 1``, such that every
vector ``h`` has a unique ``theta`` with ``Q(theta).T @ h == |h| e_k``.
Three Givens families are provided:

``Q1``  ``G(0, m-1, t[m-2]) ... G(0, 2, t[1]) G(0, 1, t[0])``, target e_0
``Q2``  ``G(m-2, m-1, t[m-2]) ... G(1, 2, t[1]) G(0, 1, t[0])``, target e_0
``Q3``  ``G(0, 1, t[0]) G(1, 2, t[1]) ... G(m-2, m-1, t[m-2])``, target e_{m-1}

plus an unsigned Householder family. The factor applied last while reducing
a vector carries the doubled angular range (-pi, pi]; every other angle
lives in (-pi/2, pi/2].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, DomainError
from .pair import OutputPair

HALF_PI = 0.5 * np.pi
GIVENS_KINDS = ("Q1", "Q2", "Q3")
KINDS = GIVENS_KINDS + ("householder",)


@dataclass
class FlopCounter:
    """Per-call accumulator of multiplies and adds.

    A fused multiply-add counts as one multiply and one add.
    """

    mults: int = 0
    adds: int = 0

    def add(self, mults: int, adds: int = 0):
        self.mults += mults
        self.adds += adds


@dataclass(frozen=True)
class GivensRotation:
    i: int
    j: int
    theta: float

    def __post_init__(self):
        if not (0 <= self.i < self.j):
            raise DimensionError(
                f"need 0 <= i < j, got i={self.i}, j={self.j}")

    def matrix(self, m: int) -> np.ndarray:
        if self.j >= m:
            raise DimensionError(f"index {self.j} out of range for size {m}")
        c, s = np.cos(self.theta), np.sin(self.theta)
        G = np.eye(m)
        G[self.i, self.i] = G[self.j, self.j] = c
        G[self.i, self.j] = s
        G[self.j, self.i] = -s
        return G


def rotate(v, i, j, c, s, transpose=False, counter=None):
    """Apply G (or G^T) with given cosine/sine to ``v`` in place.

    ``v`` may be 2-D, in which case rows i and j are rotated.
    """
    vi, vj = v[i], v[j]
    if transpose:
        a, b = c * vi - s * vj, s * vi + c * vj
    else:
        a, b = c * vi + s * vj, -s * vi + c * vj
    v[i] = a
    v[j] = b
    if counter is not None:
        counter.add(4, 2)


def apply_givens(g: GivensRotation, v, transpose: bool = False,
                 counter: Optional[FlopCounter] = None) -> np.ndarray:
    """Return ``G @ v`` (or ``G.T @ v``) without forming G."""
    v = np.array(v, dtype=float)
    if g.j >= v.shape[0]:
        raise DimensionError(
            f"rotation ({g.i}, {g.j}) out of range for length {v.shape[0]}")
    rotate(v, g.i, g.j, np.cos(g.theta), np.sin(g.theta), transpose, counter)
    return v


def wrap_angle(theta: float) -> float:
    """Map an angle into (-pi, pi]."""
    t = float(np.remainder(theta + np.pi, 2.0 * np.pi) - np.pi)
    if t <= -np.pi:
        t += 2.0 * np.pi
    return t


def fold_half(theta: float) -> float:
    """Map an angle into (-pi/2, pi/2] modulo pi."""
    t = wrap_angle(theta)
    if t > HALF_PI:
        t -= np.pi
    elif t <= -HALF_PI:
        t += np.pi
    return t


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class OrpFamily:
    """An ORP of O(m) onto the coordinate ``target``."""

    kind: str
    m: int
    target: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ORP kind {self.kind!r}")
        if self.m < 1:
            raise DimensionError("ORP dimension must be positive")
        default = self.m - 1 if self.kind == "Q3" else 0
        target = default if self.target is None else self.target
        if self.kind in GIVENS_KINDS and target != default:
            raise ValueError(
                f"{self.kind} reduces onto e_{default}, not e_{target}")
        if not 0 <= target < self.m:
            raise DimensionError(f"target {target} out of range")
        object.__setattr__(self, "target", target)

    @property
    def n_params(self) -> int:
        return self.m - 1

    @property
    def signed(self) -> bool:
        return self.kind != "householder"

    def factors(self):
        """Givens factors ``(i, j, angle_index, pivot)`` in written order.

        The written product is ``F[0] @ F[1] @ ...``; reducing a vector
        applies ``F[0].T`` first. ``pivot`` is the coordinate that keeps the
        mass, the other one is zeroed.
        """
        m = self.m
        if self.kind == "Q1":
            return [(0, a + 1, a, 0) for a in range(m - 2, -1, -1)]
        if self.kind == "Q2":
            return [(a, a + 1, a, a) for a in range(m - 2, -1, -1)]
        if self.kind == "Q3":
            return [(a, a + 1, a, a + 1) for a in range(m - 1)]
        raise ValueError("householder family has no Givens factors")

    def wide_index(self) -> Optional[int]:
        """Angle index with the (-pi, pi] range, or None."""
        if self.kind == "householder" or self.m < 2:
            return None
        return self.factors()[-1][2]


@dataclass(frozen=True)
class OrpParam:
    """Angles of one ORP member.

    In dimension 1 there are no angles and the family is the discrete group
    {+1, -1}; ``sign`` selects the member. It must stay +1 otherwise.
    """

    thetas: np.ndarray
    family: OrpFamily
    sign: float = 1.0

    def __post_init__(self):
        t = np.array(self.thetas, dtype=float).reshape(-1)
        if t.shape[0] != self.family.n_params:
            raise DimensionError(
                f"{self.family.kind} in dimension {self.family.m} takes "
                f"{self.family.n_params} angles, got {t.shape[0]}")
        if self.sign not in (1.0, -1.0) or (self.family.m > 1
                                             and self.sign != 1.0):
            raise DomainError("sign must be +1, or -1 in dimension 1 only")
        object.__setattr__(self, "thetas", t)
        object.__setattr__(self, "sign", float(self.sign))

    def in_domain(self) -> bool:
        if not self.family.signed:
            return bool(np.all(np.isfinite(self.thetas)))
        wide = self.family.wide_index()
        for a, t in enumerate(self.thetas):
            lo, hi = (-np.pi, np.pi) if a == wide else (-HALF_PI, HALF_PI)
            if not lo < t <= hi:
                return False
        return True

    def check_domain(self):
        if not self.in_domain():
            raise DomainError(
                f"angles {self.thetas} outside the {self.family.kind} domain")


@dataclass(frozen=True)
class OrpBlocks:
    """Partition ``(mu, y^T; x, O)`` of an ORP member.

    For a family targeting e_0 the scalar sits top-left; for one targeting
    the last coordinate it sits bottom-right and the layout is
    ``(O, x; y^T, mu)``.
    """

    mu: float
    x: np.ndarray
    y: np.ndarray
    O: np.ndarray = field(repr=False)


def _pivot_angle(vi, vj, pivot_is_i: bool, wide: bool) -> float:
    # Zero the non-pivot entry of (vi, vj) with G^T; the wide angle also
    # makes the surviving entry nonnegative.
    if vi == 0.0 and vj == 0.0:
        return 0.0
    if pivot_is_i:
        t = np.arctan2(-vj, vi)
    else:
        t = np.arctan2(vi, vj)
    return wrap_angle(t) if wide else fold_half(t)


def orp_reduce(family: OrpFamily, h) -> OrpParam:
    """Angles ``theta`` with ``orp_matrix(theta).T @ h == |h| e_target``.

    For the Householder family the image is ``+-|h| e_target`` and ``h``
    must be nonzero.
    """
    h = np.array(h, dtype=float).reshape(-1)
    if h.shape[0] != family.m:
        raise DimensionError(
            f"vector of length {h.shape[0]} for ORP of dimension {family.m}")
    if family.kind == "householder":
        return _householder_reduce(family, h)
    if family.m == 1:
        return OrpParam(np.zeros(0), family, -1.0 if h[0] < 0 else 1.0)
    v = h.copy()
    thetas = np.zeros(family.n_params)
    wide = family.wide_index()
    for i, j, a, p in family.factors():
        t = _pivot_angle(v[i], v[j], p == i, a == wide)
        thetas[a] = t
        rotate(v, i, j, np.cos(t), np.sin(t), transpose=True)
    return OrpParam(thetas, family)


def _householder_vector(family: OrpFamily, thetas) -> np.ndarray:
    return np.insert(np.asarray(thetas, dtype=float), family.target, 1.0)


def _householder_reduce(family: OrpFamily, h) -> OrpParam:
    nrm = np.linalg.norm(h)
    if nrm == 0.0:
        raise DomainError("Householder reduction of the zero vector")
    k = family.target
    sigma = 1.0 if h[k] >= 0 else -1.0
    u = h / nrm
    u[k] += sigma
    u /= u[k]
    return OrpParam(np.delete(u, k), family)


def orp_apply(p: OrpParam, v, coords: Optional[Sequence[int]] = None,
              transpose: bool = False,
              counter: Optional[FlopCounter] = None) -> np.ndarray:
    """Apply ``Q(theta)`` (or its transpose) to ``v`` in place.

    ``coords`` embeds the m local coordinates into ``v``; it defaults to the
    first m entries.
    """
    fam = p.family
    if coords is None:
        coords = range(fam.m)
    coords = list(coords)
    if fam.kind == "householder":
        u = _householder_vector(fam, p.thetas)
        w = v[coords]
        beta = 2.0 / float(u @ u)
        v[coords] = w - beta * np.multiply.outer(u, u @ w)
        if counter is not None:
            # u.w, u.u, beta*(u.w), then the axpy
            counter.add(3 * fam.m + 2, 3 * fam.m)
        return v
    if fam.m == 1:
        if p.sign < 0:
            v[coords[0]] = -v[coords[0]]
        return v
    facs = fam.factors()
    order = facs if transpose else facs[::-1]
    for i, j, a, _ in order:
        t = p.thetas[a]
        rotate(v, coords[i], coords[j], np.cos(t), np.sin(t), transpose,
               counter)
    return v


def orp_matrix(p: OrpParam) -> np.ndarray:
    """Dense m x m member of the family, factors multiplied as written."""
    p.check_domain()
    fam = p.family
    if fam.kind == "householder":
        u = _householder_vector(fam, p.thetas)
        return np.eye(fam.m) - 2.0 * np.outer(u, u) / float(u @ u)
    Q = np.eye(fam.m) * p.sign
    for i, j, a, _ in fam.factors():
        Q = Q @ GivensRotation(i, j, p.thetas[a]).matrix(fam.m)
    return Q


def orp_blocks(p: OrpParam) -> OrpBlocks:
    """Split an ORP member around its target coordinate."""
    fam = p.family
    Q = orp_matrix(p)
    if fam.target == 0:
        return OrpBlocks(float(Q[0, 0]), Q[1:, 0].copy(), Q[0, 1:].copy(),
                         Q[1:, 1:].copy())
    if fam.target == fam.m - 1:
        return OrpBlocks(float(Q[-1, -1]), Q[:-1, -1].copy(),
                         Q[-1, :-1].copy(), Q[:-1, :-1].copy())
    raise DomainError("blocks are defined only for end-point targets")


# -------------------------------------------------------------- signatures


@dataclass(frozen=True)
class SignatureMatrix:
    signs: np.ndarray

    def __post_init__(self):
        s = np.array(self.signs, dtype=float).reshape(-1)
        if not np.all(np.abs(s) == 1.0):
            raise ValueError("signature entries must be +1 or -1")
        object.__setattr__(self, "signs", s)

    @classmethod
    def identity(cls, n: int) -> "SignatureMatrix":
        return cls(np.ones(n))

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.signs)

    def __matmul__(self, other: "SignatureMatrix") -> "SignatureMatrix":
        return SignatureMatrix(self.signs * other.signs)


def apply_signature(pair: OutputPair, E: SignatureMatrix) -> OutputPair:
    """The pair (E A E, C E); E is its own inverse."""
    s = E.signs
    if s.shape[0] != pair.n:
        raise DimensionError(
            f"signature of length {s.shape[0]} for a pair with n={pair.n}")
    return OutputPair(s[:, None] * pair.A * s[None, :], pair.C * s[None, :])
