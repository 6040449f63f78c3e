"""Command-line interface: ``onforms <subcommand> ...``.

Files are JSON (see :mod:`onforms.io`); ``-`` means stdin or stdout.
Diagnostics go to stderr so that subcommands can be piped together.

Exit codes: 0 success, 2 parse or dimension error, 3 domain or strictness
failure, 4 numerical failure, 5 invariant violation.
"""
from __future__ import annotations

import argparse
import sys
from typing import List, Optional

import numpy as np

from .canonical import FORMS, classify, signature_sequence
from .errors import InvariantError, OnformsError
from .fast_apply import gradcheck
from .grammians import grammian_report
from .hoon import hoon_reconstruct
from .io import (ModelFile, ParamFile, random_system, read_model,
                 read_params, write_model, write_params)
from .otson import otson_reconstruct
from .pipeline import PipelineConfig, domain_status, factor, reduce
from .normal_form import to_output_normal


def _say(msg: str):
    print(msg, file=sys.stderr)


def _reconstruct(p):
    from .hoon import HoonParams
    return hoon_reconstruct(p) if isinstance(p, HoonParams) \
        else otson_reconstruct(p)


# -------------------------------------------------------------- commands


def cmd_normalize(args) -> int:
    model = read_model(args.inp)
    pair, st = to_output_normal(model.pair)
    r = pair.on_residual()
    _say(f"on_residual {r:.3e}")
    write_model(args.out, model.with_pair(pair, st.T_inv, "normalize"))
    if r > args.tol_on:
        raise InvariantError(f"ON residual {r:.3e} exceeds {args.tol_on:g}")
    return 0


def cmd_reduce(args) -> int:
    model = read_model(args.inp)
    red = reduce(model.pair, args.form,
                 PipelineConfig(descending=args.descending))
    cls = red.classification
    pair = red.pair
    _say(f"form {cls.form}")
    _say(f"structure_residual {cls.residual:.3e}")
    _say(f"on_residual {pair.on_residual():.3e}")
    _say(f"standard {cls.standard} unreduced {cls.unreduced} "
         f"degenerate {cls.degenerate} reducible_index {cls.reducible_index}"
         + (" partial_schur" if red.partial_schur else ""))
    write_model(args.out, model.with_pair(pair, red.T_inv,
                                          f"reduce {args.form}"))
    if cls.form is None or cls.residual > args.tol_structure:
        raise InvariantError("reduction did not reach the requested form")
    return 0


def cmd_factor(args) -> int:
    model = read_model(args.inp)
    cfg = PipelineConfig(allow_boundary=args.allow_boundary,
                         factor_tol=args.tol_factor,
                         otson_family=args.family)
    p = factor(model.pair, args.kind, cfg)
    status = domain_status(p)
    _say(f"domain {status}")
    meta = {"source": model.metadata.get("provenance", "")}
    write_params(args.out, ParamFile.from_params(p, status == "strict", meta))
    return 0


def cmd_reconstruct(args) -> int:
    pf = read_params(args.inp)
    pair = _reconstruct(pf.to_params())
    _say(f"on_residual {pair.on_residual():.3e}")
    write_model(args.out, ModelFile.from_pair(
        pair, metadata={"provenance": f"reconstruct {pf.kind}"}))
    return 0


def cmd_check(args) -> int:
    model = read_model(args.inp)
    pair = model.pair
    rows = []

    def record(name, value, tol):
        ok = bool(value <= tol)
        rows.append(ok)
        _say(f"{'PASS' if ok else 'FAIL'} {name} {value:.3e} (tol {tol:g})")

    record("on_residual", pair.on_residual(), args.tol_on)
    cls = classify(pair)
    _say(f"form {cls.form} standard {cls.standard} unreduced "
         f"{cls.unreduced}")
    if cls.form is not None:
        record("structure_residual", cls.residual, args.tol_structure)
    if cls.form in ("HO", "OTS") and cls.strict:
        kind = "hoon" if cls.form == "HO" else "otson"
        try:
            p = factor(pair, kind, PipelineConfig(allow_boundary=True))
            back = _reconstruct(p)
            record(f"round_trip_{kind}",
                   float(np.abs(back.stack - pair.stack).max()),
                   args.tol_roundtrip)
        except OnformsError as exc:
            _say(f"FAIL round_trip_{kind} {exc}")
            rows.append(False)
    if args.params:
        pf = read_params(args.params)
        back = _reconstruct(pf.to_params())
        if back.A.shape != pair.A.shape or back.C.shape != pair.C.shape:
            _say("FAIL params shape mismatch")
            rows.append(False)
        else:
            record("params_stack", float(np.abs(back.stack - pair.stack).max()),
                   args.tol_roundtrip)
            s1, s2 = signature_sequence(back), signature_sequence(pair)
            record("signature_sequence", float(np.abs(s1 - s2).max()),
                   args.tol_signature)
    if not all(rows):
        raise InvariantError("check failed")
    _say("all checks passed")
    return 0


def cmd_cond(args) -> int:
    model = read_model(args.inp)
    rep = grammian_report(model.A, model.B, model.C)
    print(f"{'kappa_ctrl':>14} {'kappa_obs':>14} {'kappa_sigma':>14} "
          f"{'excess':>14}")
    print(f"{rep.kappa_ctrl:14.4f} {rep.kappa_obs:14.4f} "
          f"{rep.kappa_sigma:14.4f} {rep.excess:14.4f}")
    print("hankel " + " ".join(f"{h:.6g}" for h in rep.hankel))
    if not rep.inequality_holds():
        raise InvariantError("kappa_sigma^2 <= kappa_ctrl * kappa_obs fails")
    return 0


def cmd_random(args) -> int:
    model = random_system(args.n, args.d, args.m, args.rho, args.seed)
    write_model(args.out, model)
    return 0


def cmd_gradcheck(args) -> int:
    pf = read_params(args.inp)
    res = gradcheck(pf.to_params(), h=args.h,
                    rng=np.random.default_rng(args.seed))
    print(f"parameters {res.count} max_error {res.max_error:.3e} "
          f"worst {res.worst}")
    if not res.passed(args.tol):
        raise InvariantError(
            f"gradient error {res.max_error:.3e} exceeds {args.tol:g}")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="onforms",
        description="Output normal pairs: normalize, reduce, factor.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, inp=True, out=True):
        p = sub.add_parser(name, help=help_)
        if inp:
            p.add_argument("--in", dest="inp", default="-",
                           help="input file (default stdin)")
        if out:
            p.add_argument("--out", default="-",
                           help="output file (default stdout)")
        p.add_argument("--tol-on", type=float, default=1e-10)
        p.add_argument("--tol-structure", type=float, default=1e-10)
        p.set_defaults(func=fn)
        return p

    add("normalize", cmd_normalize, "transform to output normal form")
    p = add("reduce", cmd_reduce, "reduce to a canonical form")
    p.add_argument("--form", required=True,
                   choices=["hoon", "ho", "ots", "schur"])
    p.add_argument("--descending", action="store_true",
                   help="order Schur blocks by nonincreasing modulus")
    p = add("factor", cmd_factor, "orthogonal-product parameters")
    p.add_argument("--kind", required=True, choices=["otson", "hoon"])
    p.add_argument("--family", default="Q1", choices=["Q1", "Q2"],
                   help="ORP family for otson stages")
    p.add_argument("--allow-boundary", action="store_true")
    p.add_argument("--tol-factor", type=float, default=1e-8)
    add("reconstruct", cmd_reconstruct, "pair from parameters")
    p = add("check", cmd_check, "invariant report", out=False)
    p.add_argument("--params", default=None)
    p.add_argument("--tol-roundtrip", type=float, default=1e-9)
    p.add_argument("--tol-signature", type=float, default=1e-8)
    add("cond", cmd_cond, "Grammian conditioning report", out=False)
    p = add("random", cmd_random, "random stable observable model",
            inp=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--rho", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p = add("gradcheck", cmd_gradcheck, "finite-difference derivative sweep",
            out=False)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--h", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OnformsError as exc:
        _say(f"error: {exc}")
        return exc.exit_code
    except (ValueError, ArithmeticError) as exc:
        _say(f"error: {exc}")
        return 4 if isinstance(exc, ArithmeticError) else 2


if __name__ == "__main__":
    sys.exit(main())
