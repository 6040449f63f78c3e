"""Multiply counts of the implicit stack products over a grid of (n, d).

Prints one row per (family, n, d) with the matvec and gradient counts, their
ratio to n*d, and the bounds 6nd + 8(n+d) and 8nd + 8(n+d).
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from typing import List

import numpy as np

from onforms.fast_apply import ImplicitStack
from onforms.hoon import random_hoon_params
from onforms.otson import random_otson_params
from onforms.rotations import FlopCounter


@dataclass
class SweepConfig:
    ns: List[int] = field(default_factory=lambda: [4, 8, 16, 32, 64])
    ds: List[int] = field(default_factory=lambda: [1, 2, 4, 6])
    families: List[str] = field(
        default_factory=lambda: ["Q1", "Q2", "householder", "hoon"])
    seed: int = 0


def counts(params, rng):
    s = ImplicitStack(params)
    v = rng.standard_normal(s.n)
    c = FlopCounter()
    s.matvec(v, c)
    mv = c.mults
    grad = None
    if not (hasattr(params, "family") and params.family.kind == "householder"):
        c = FlopCounter()
        s.grad(v, s.parameters()[-1], c)
        grad = c.mults
    return mv, grad


def run(cfg: SweepConfig):
    rng = np.random.default_rng(cfg.seed)
    print(f"{'family':>11} {'n':>3} {'d':>2} {'matvec':>7} {'/nd':>6} "
          f"{'bound':>6} {'grad':>7} {'/nd':>6} {'bound':>6}")
    for fam in cfg.families:
        for n in cfg.ns:
            for d in cfg.ds:
                if fam == "hoon":
                    if n < 2:
                        continue
                    p = random_hoon_params(n, d, rng)
                else:
                    p = random_otson_params(n, d, rng, fam)
                mv, gr = counts(p, rng)
                nd = n * d
                g = "-" if gr is None else f"{gr:7d}"
                gr_ratio = "-" if gr is None else f"{gr / nd:6.2f}"
                print(f"{fam:>11} {n:3d} {d:2d} {mv:7d} {mv / nd:6.2f} "
                      f"{6 * nd + 8 * (n + d):6d} {g:>7} {gr_ratio:>6} "
                      f"{8 * nd + 8 * (n + d):6d}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n", type=int, nargs="*")
    ap.add_argument("--d", type=int, nargs="*")
    args = ap.parse_args()
    cfg = SweepConfig(seed=args.seed)
    if args.n:
        cfg.ns = args.n
    if args.d:
        cfg.ds = args.d
    run(cfg)


if __name__ == "__main__":
    main()
