"""Implicit application of an ON stack from its orthogonal-product factors.

Neither A nor C is formed: a vector is pushed through the embedded ORP
stages one Givens (or Householder) factor at a time. Each Givens factor
costs four multiplies, so a matvec costs about 4nd of them and a
single-angle derivative about the same.

Multiply counts treat a fused multiply-add as one multiply. Cosines and
sines are tabulated once when the stack is built and are not counted.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import DimensionError
from .hoon import HoonParams, hoon_reconstruct
from .otson import OtsonParams, otson_reconstruct
from .pair import OutputPair
from .rotations import FlopCounter, OrpParam, orp_apply, rotate

Params = Union[OtsonParams, HoonParams]
# (stage, angle index) or the string "gamma" for HOON pairs
Which = Union[Tuple[int, int], str]


@dataclass
class _Stage:
    param: OrpParam
    coords: List[int]
    # (i, j, angle_index, cos, sin) in the order applied by Q @ v
    steps: List[Tuple[int, int, int, float, float]]


def _stage(p: OrpParam, coords) -> _Stage:
    fam = p.family
    steps = []
    if fam.kind != "householder" and fam.m > 1:
        for i, j, a, _ in fam.factors()[::-1]:
            t = p.thetas[a]
            steps.append((coords[i], coords[j], a, np.cos(t), np.sin(t)))
    return _Stage(p, list(coords), steps)


@dataclass
class ImplicitStack:
    """Stack ``[C; A]`` held only through its factor angles."""

    params: Params
    counter: FlopCounter = field(default_factory=FlopCounter)

    def __post_init__(self):
        p = self.params
        self.is_hoon = isinstance(p, HoonParams)
        self.n, self.d = p.n, p.d
        n, d = self.n, self.d
        if self.is_hoon:
            # V_n first, V_1 last; stack rows are offset by one for C[0]
            stages = [_stage(p.last, range(1, d + 1))]
            for k in range(n - 2, -1, -1):
                stages.append(_stage(p.thetas[k],
                                     list(range(1, d + 1)) + [d + k + 1]))
            self.gamma = p.gamma
            self.c11 = float(np.sqrt(1.0 - p.gamma ** 2))
        else:
            stages = [_stage(t, [k] + list(range(n, n + d)))
                      for k, t in enumerate(p.thetas)]
        self._stages = stages

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n + self.d, self.n

    def reset(self) -> FlopCounter:
        old, self.counter = self.counter, FlopCounter()
        return old

    # -------------------------------------------------------------- kernels

    def _seed(self, v, counter, dgamma=False) -> np.ndarray:
        n, d = self.n, self.d
        w = np.zeros(n + d)
        if not self.is_hoon:
            w[:n] = v
            return w
        # rows: C[0], then [C_hat; A] = X [0_{d-1}; P(gamma)] v
        g, c = self.gamma, self.c11
        if dgamma:
            w[0] = -g / c * v[0]
            w[d + 1] = v[0]
            counter.add(2, 0)
            return w
        w[0] = c * v[0]
        w[d] = v[n - 1]
        w[d + 1] = g * v[0]
        w[d + 2:] = v[1:n - 1]
        counter.add(2, 0)
        return w

    def _run(self, w, stages, counter, replace=None):
        for si, st in stages:
            if not st.steps:
                if st.param.family.kind == "householder":
                    orp_apply(st.param, w, st.coords, counter=counter)
                elif st.param.sign < 0:
                    w[st.coords[0]] = -w[st.coords[0]]
                continue
            for i, j, a, c, s in st.steps:
                if replace is not None and replace == (si, a):
                    wi, wj = w[i], w[j]
                    # derivative of G(i, j, t): [[-s, c], [-c, -s]]
                    w[:] = 0.0
                    w[i] = -s * wi + c * wj
                    w[j] = -c * wi - s * wj
                    counter.add(4, 2)
                else:
                    rotate(w, i, j, c, s, counter=counter)
        return w

    def _check(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise DimensionError(
                f"vector of shape {v.shape} for a stack with n={self.n}")
        return v

    # ---------------------------------------------------------------- public

    def matvec(self, v, counter: Optional[FlopCounter] = None) -> np.ndarray:
        v = self._check(v)
        counter = counter if counter is not None else self.counter
        w = self._seed(v, counter)
        return self._run(w, enumerate(self._stages), counter)

    def stage_index(self, which: Which) -> Tuple[int, int]:
        """Map a parameter label to (internal stage, angle index)."""
        n = self.n
        k, a = which
        if self.is_hoon:
            if not 0 <= k < n:
                raise DimensionError(f"stage {k} out of range 0..{n - 1}")
            m = self.d if k == n - 1 else self.d + 1
            internal = 0 if k == n - 1 else n - 1 - k
        else:
            if not 0 <= k < n:
                raise DimensionError(f"stage {k} out of range 0..{n - 1}")
            m = self.d + 1
            internal = k
        st = self._stages[internal]
        if st.param.family.kind == "householder":
            raise DimensionError("derivatives are defined for Givens stages")
        if not 0 <= a < m - 1:
            raise DimensionError(f"angle index {a} out of range 0..{m - 2}")
        return internal, a

    def grad(self, v, which: Which,
             counter: Optional[FlopCounter] = None) -> np.ndarray:
        v = self._check(v)
        counter = counter if counter is not None else self.counter
        if isinstance(which, str):
            if which != "gamma" or not self.is_hoon:
                raise DimensionError(f"unknown parameter {which!r}")
            w = self._seed(v, counter, dgamma=True)
            w = self._run(w, enumerate(self._stages), counter)
            w[0] = -self.gamma / self.c11 * v[0]
            return w
        internal, a = self.stage_index(which)
        w = self._seed(v, counter)
        if self.is_hoon:
            w[0] = 0.0
        # stages before the replaced one act on w; those after act on G' w
        return self._run(w, enumerate(self._stages), counter,
                         replace=(internal, a))

    def parameters(self) -> List[Which]:
        """Every differentiable parameter label."""
        n, d = self.n, self.d
        if self.is_hoon:
            labels: List[Which] = ["gamma"]
            labels += [(k, a) for k in range(n - 1) for a in range(d)]
            labels += [(n - 1, a) for a in range(d - 1)]
            return labels
        return [(k, a) for k in range(n) for a in range(d)]


def stack_matvec(s: ImplicitStack, v) -> np.ndarray:
    return s.matvec(v)


def advance_matvec(s: ImplicitStack, v) -> np.ndarray:
    return s.matvec(v)[s.d:]


def measure_matvec(s: ImplicitStack, v) -> np.ndarray:
    return s.matvec(v)[:s.d]


def stack_matvec_grad(s: ImplicitStack, v, which: Which) -> np.ndarray:
    return s.grad(v, which)


def materialize(s: ImplicitStack) -> OutputPair:
    """Dense pair, for debugging and tests only."""
    if s.is_hoon:
        return hoon_reconstruct(s.params)
    return otson_reconstruct(s.params)


def perturb(params: Params, which: Which, h: float) -> Params:
    """Copy of ``params`` with one parameter shifted by ``h``."""
    if isinstance(params, HoonParams):
        if which == "gamma":
            return HoonParams(params.gamma + h, params.thetas, params.last)
        k, a = which
        if k == params.n - 1:
            t = params.last.thetas.copy()
            t[a] += h
            return HoonParams(params.gamma, params.thetas,
                              OrpParam(t, params.last.family,
                                       params.last.sign))
        thetas = list(params.thetas)
        t = thetas[k].thetas.copy()
        t[a] += h
        thetas[k] = OrpParam(t, thetas[k].family)
        return HoonParams(params.gamma, thetas, params.last)
    k, a = which
    thetas = list(params.thetas)
    t = thetas[k].thetas.copy()
    t[a] += h
    thetas[k] = OrpParam(t, thetas[k].family)
    return OtsonParams(thetas, params.d)


@dataclass
class GradcheckResult:
    max_error: float
    worst: Optional[Which]
    count: int
    errors: List[float]

    def passed(self, tol: float) -> bool:
        return self.max_error <= tol


def gradcheck(params: Params, v=None, h: float = 1e-5,
              rng=None) -> GradcheckResult:
    """Central finite differences against :meth:`ImplicitStack.grad`."""
    s = ImplicitStack(params)
    if v is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        v = rng.standard_normal(s.n)
    errs, worst, best = [], None, -1.0
    for which in s.parameters():
        g = s.grad(v, which)
        fp = ImplicitStack(perturb(params, which, h)).matvec(v)
        fm = ImplicitStack(perturb(params, which, -h)).matvec(v)
        e = float(np.max(np.abs(g - (fp - fm) / (2 * h))))
        errs.append(e)
        if e > best:
            best, worst = e, which
    return GradcheckResult(max(errs, default=0.0), worst, len(errs), errs)
