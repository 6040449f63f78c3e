"""End-to-end chains: normalize, reduce to a canonical form, factor."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .canonical import (FormClassification, classify, reduce_partial_schur,
                        to_hessenberg_observer, to_ots)
from .errors import DomainError, FormError
from .hoon import HoonParams, hoon_domain_check, hoon_factor
from .normal_form import to_output_normal
from .otson import OtsonParams, otson_domain_check, otson_factor
from .pair import OutputPair
from .schur import fix_block_signs, ordered_qd_schur

FORM_ALIASES = {"hoon": "HO", "ho": "HO", "ots": "OTS", "otson": "OTS",
                "schur": "Schur"}
ON_TARGET = 1e-12


@dataclass(frozen=True)
class PipelineConfig:
    descending: bool = False
    allow_boundary: bool = False
    factor_tol: float = 1e-8
    otson_family: str = "Q1"


@dataclass
class Reduction:
    """Reduced pair; ``T_inv @ B`` carries an input matrix along."""

    pair: OutputPair
    T_inv: np.ndarray
    classification: FormClassification
    # True when a reducible HO pair had its trailing block Schur-reduced
    partial_schur: bool = False


def ensure_output_normal(pair: OutputPair) -> OutputPair:
    return normalize_with_transform(pair)[0]


def normalize_with_transform(pair: OutputPair):
    """``(on_pair, T_inv)``; the identity when already output normal."""
    if pair.on_residual() <= ON_TARGET * max(pair.n, 1):
        return pair, np.eye(pair.n)
    out, st = to_output_normal(pair)
    return out, st.T_inv


def reduce(pair: OutputPair, form: str,
           config: PipelineConfig = PipelineConfig()) -> Reduction:
    """Output normal pair orthogonally similar to ``pair`` in ``form``.

    A reducible Hessenberg-observer result has its trailing block put in
    ordered qd Schur form, so the output is unique either way.
    """
    form = FORM_ALIASES.get(form.lower(), form)
    on, Ti = normalize_with_transform(pair)
    if form == "Schur":
        sf = ordered_qd_schur(on.A, config.descending)
        A, C, U = fix_block_signs(sf.T, on.C @ sf.U, sf.U)
        out = OutputPair(A, C)
        return Reduction(out, U.T @ Ti, classify(out, form="Schur"))
    if form == "OTS":
        out, U = to_ots(on)
        return Reduction(out, U.T @ Ti, classify(out, form="OTS"))
    if form != "HO":
        raise ValueError(f"unknown form {form!r}")
    out, U = to_hessenberg_observer(on)
    cls = classify(out, form="HO")
    if (cls.reducible_index is not None and cls.reducible_index > 0
            and not cls.degenerate):
        out, V = reduce_partial_schur(out, descending=config.descending)
        return Reduction(out, (U @ V).T @ Ti, classify(out, form="HO"), True)
    return Reduction(out, U.T @ Ti, cls)


def factor(pair: OutputPair, kind: str,
           config: PipelineConfig = PipelineConfig()
           ) -> Union[OtsonParams, HoonParams]:
    """Normalize, reduce and factor; refuse non-strict results unless
    ``config.allow_boundary``."""
    kind = kind.lower()
    if kind == "otson":
        red = pair if classify(pair, form="OTS").form == "OTS" and \
            pair.on_residual() <= config.factor_tol else reduce(pair, "OTS").pair
        params = otson_factor(red, config.otson_family, config.factor_tol)
        status = otson_domain_check(params)
    elif kind == "hoon":
        cls = classify(pair, form="HO")
        red = pair if cls.form == "HO" and cls.standard and \
            pair.on_residual() <= config.factor_tol else reduce(pair, "HO").pair
        params = hoon_factor(red, "Q3", config.factor_tol)
        status = hoon_domain_check(params)
    else:
        raise ValueError(f"unknown parameterization {kind!r}")
    if status != "strict" and not config.allow_boundary:
        raise DomainError(
            f"{kind} parameters are {status}, not strict; "
            "pass allow_boundary to accept them")
    return params


def domain_status(params) -> str:
    if isinstance(params, HoonParams):
        return hoon_domain_check(params)
    return otson_domain_check(params)
