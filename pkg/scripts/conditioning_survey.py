"""Where double precision runs out, as a function of n / d.

For each ratio r = n / d it reports, over seeded trials:

* the controllability condition number of random systems with m = 1 and
  m = d inputs, and the deviation of the excess ratio from one after
  output normalization (nan when no draw could be normalized);
* the worst reconstruct -> factor angle error for OTSON and HOON parameters
  drawn from the interior of the strict domain, next to eps / sigma_min of
  the parameter Jacobian, which bounds the attainable accuracy.
"""
from __future__ import annotations

import argparse
import warnings
from dataclasses import dataclass, field
from typing import List

import numpy as np

from onforms.errors import OnformsError
from onforms.fast_apply import ImplicitStack
from onforms.grammians import grammian_report
from onforms.hoon import hoon_factor, hoon_reconstruct, random_hoon_params
from onforms.io import random_system
from onforms.normal_form import to_output_normal
from onforms.otson import otson_factor, otson_reconstruct, random_otson_params

EPS = np.finfo(float).eps


@dataclass
class SurveyConfig:
    ratios: List[int] = field(default_factory=lambda: [1, 2, 4, 6, 8, 10])
    d: int = 6
    trials: int = 10
    spread: float = 0.5
    seed: int = 0


def jacobian_smin(params) -> float:
    s = ImplicitStack(params)
    J = np.column_stack([
        np.concatenate([s.grad(e, w) for e in np.eye(s.n)])
        for w in s.parameters()])
    return float(np.linalg.svd(J, compute_uv=False)[-1])


def excess_error(n, d, m, seed):
    try:
        sysm = random_system(n, d, m=m, seed=seed)
        on, st = to_output_normal(sysm.pair)
        r = grammian_report(on.A, st.T_inv @ sysm.B, on.C)
    except OnformsError:
        return np.nan, np.nan
    return r.kappa_ctrl, abs(r.excess - 1.0)


def run(cfg: SurveyConfig):
    d = cfg.d
    print(f"d = {d}, {cfg.trials} trials per row, spread {cfg.spread}")
    print(f"{'n/d':>4} {'n':>3} {'kc(m=1)':>9} {'exc(m=1)':>9} "
          f"{'kc(m=d)':>9} {'exc(m=d)':>9} {'otson err':>9} "
          f"{'eps/smin':>9} {'hoon err':>9} {'eps/smin':>9}")
    for r in cfg.ratios:
        n = r * d
        rng = np.random.default_rng(cfg.seed + r)
        sys_rows = []
        oe = ob = he = hb = 0.0
        for t in range(cfg.trials):
            seed = cfg.seed + 1000 * r + t
            sys_rows.append(excess_error(n, d, 1, seed)
                            + excess_error(n, d, d, seed))
            p = random_otson_params(n, d, rng, "Q1", spread=cfg.spread)
            q = otson_factor(otson_reconstruct(p))
            oe = max(oe, np.abs(p.angles - q.angles).max())
            ob = max(ob, EPS / jacobian_smin(p))
            h = random_hoon_params(n, d, rng, spread=cfg.spread)
            g = hoon_factor(hoon_reconstruct(h))
            he = max(he, abs(h.gamma - g.gamma),
                     np.abs(h.flat() - g.flat()).max())
            hb = max(hb, EPS / jacobian_smin(h))
        with warnings.catch_warnings():
            # all-nan columns: every draw was unobservable
            warnings.simplefilter("ignore", RuntimeWarning)
            k1, e1, kd, ed = np.nanmax(np.array(sys_rows), axis=0)
        print(f"{r:4d} {n:3d} {k1:9.1e} {e1:9.1e} {kd:9.1e} {ed:9.1e} "
              f"{oe:9.1e} {ob:9.1e} {he:9.1e} {hb:9.1e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=6)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--spread", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--ratios", type=int, nargs="*")
    args = ap.parse_args()
    cfg = SurveyConfig(d=args.d, trials=args.trials, spread=args.spread,
                       seed=args.seed)
    if args.ratios:
        cfg.ratios = args.ratios
    run(cfg)


if __name__ == "__main__":
    main()
