"""JSON model and parameter files, and seeded random test systems.

Both formats are UTF-8 JSON objects with ``"format_version": 1``.
Matrices are row-major lists of lists. Floats are written with Python's
shortest round-trip representation, so reading a file back gives the same
doubles bit for bit and rewriting it gives the same bytes.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Union

import numpy as np

from .errors import DimensionError, DomainError, ParseError, UnobservableError
from .grammians import solve_dual_stein, spectral_radius
from .hoon import HoonParams
from .otson import OtsonParams
from .pair import OutputPair

FORMAT_VERSION = 1
RESAMPLES = 8
OBSERVABILITY_FLOOR = 1e-10


# ------------------------------------------------------------------ models


@dataclass
class ModelFile:
    A: np.ndarray
    C: np.ndarray
    B: Optional[np.ndarray] = None
    D: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.A = _matrix(self.A, "A")
        self.C = _matrix(self.C, "C")
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise DimensionError(f"A must be square, got {self.A.shape}")
        if self.C.shape[1] != n:
            raise DimensionError(
                f"C has {self.C.shape[1]} columns, expected n={n}")
        if self.B is not None:
            self.B = _matrix(self.B, "B")
            if self.B.shape[0] != n:
                raise DimensionError(
                    f"B has {self.B.shape[0]} rows, expected n={n}")
        if self.D is not None:
            self.D = _matrix(self.D, "D")
            want = (self.d, self.m)
            if self.D.shape != want:
                raise DimensionError(f"D has shape {self.D.shape}, "
                                     f"expected {want}")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.C.shape[0]

    @property
    def m(self) -> int:
        return 0 if self.B is None else self.B.shape[1]

    @property
    def pair(self) -> OutputPair:
        return OutputPair(self.A, self.C)

    @classmethod
    def from_pair(cls, pair: OutputPair, **kw) -> "ModelFile":
        return cls(pair.A, pair.C, **kw)

    def with_pair(self, pair: OutputPair, T_inv=None,
                  note: Optional[str] = None) -> "ModelFile":
        """Replace (A, C), carrying B along through ``T_inv`` if given."""
        B = None
        if self.B is not None and T_inv is not None:
            B = T_inv @ self.B
        meta = dict(self.metadata)
        if note:
            meta["provenance"] = (meta.get("provenance", "") + " | " + note
                                  ).strip(" |")
        return ModelFile(pair.A, pair.C, B, self.D if B is not None else None,
                         meta)

    def to_json(self) -> Dict[str, Any]:
        doc: Dict[str, Any] = {"format_version": FORMAT_VERSION,
                               "type": "model", "n": self.n, "d": self.d,
                               "m": self.m, "A": self.A.tolist(),
                               "C": self.C.tolist()}
        if self.B is not None:
            doc["B"] = self.B.tolist()
        if self.D is not None:
            doc["D"] = self.D.tolist()
        doc["metadata"] = self.metadata
        return doc

    @classmethod
    def from_json(cls, doc: Dict[str, Any]) -> "ModelFile":
        _check_header(doc, "model")
        for key in ("n", "d", "A", "C"):
            if key not in doc:
                raise ParseError(f"model: missing field {key!r}")
        n, d = _int(doc, "n"), _int(doc, "d")
        A = _declared(doc, "A", n, n)
        C = _declared(doc, "C", d, n)
        m = _int(doc, "m") if "m" in doc else None
        B = D = None
        if doc.get("B") is not None:
            B = _declared(doc, "B", n, m)
            m = B.shape[1]
        if doc.get("D") is not None:
            D = _declared(doc, "D", d, m)
        meta = doc.get("metadata", {})
        if not isinstance(meta, dict):
            raise ParseError("model: field 'metadata' must be an object")
        return cls(A, C, B, D, meta)


def _check_header(doc, kind: str):
    if not isinstance(doc, dict):
        raise ParseError(f"{kind}: top level must be a JSON object")
    v = doc.get("format_version")
    if v != FORMAT_VERSION:
        raise ParseError(f"{kind}: unsupported format_version {v!r}")
    t = doc.get("type", kind)
    if t != kind:
        raise ParseError(f"expected a {kind} file, got type {t!r}")


def _int(doc, key) -> int:
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ParseError(f"field {key!r} must be a nonnegative integer")
    return v


def _matrix(M, name: str) -> np.ndarray:
    try:
        M = np.array(M, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"matrix {name!r} is not numeric or ragged: {exc}")
    if M.ndim != 2:
        raise DimensionError(f"matrix {name!r} must be 2-D, got {M.ndim}-D")
    bad = np.argwhere(~np.isfinite(M))
    if bad.size:
        i, j = bad[0]
        raise DomainError(f"matrix {name!r} has a non-finite entry at "
                          f"[{i}][{j}]")
    return M


def _declared(doc, name, rows, cols) -> np.ndarray:
    raw = doc[name]
    if not isinstance(raw, list) or any(not isinstance(r, list) for r in raw):
        raise ParseError(f"matrix {name!r} must be a list of row lists")
    if len(raw) != rows:
        raise DimensionError(
            f"matrix {name!r} has {len(raw)} rows, expected {rows}")
    for i, r in enumerate(raw):
        if cols is not None and len(r) != cols:
            raise DimensionError(f"matrix {name!r} row {i} has {len(r)} "
                                 f"entries, expected {cols}")
    if rows == 0:
        return np.zeros((0, cols or 0))
    return _matrix(raw, name)


# -------------------------------------------------------------- parameters


@dataclass
class ParamFile:
    """Flat angle record.

    ``thetas`` is row-major by stage: ``n * d`` values for OTSON;
    for HOON, ``(n - 1) * d`` stage angles followed by the ``d - 1`` final
    ones (``gamma`` is stored separately). ``last_sign`` selects the
    final d = 1 HOON stage, which has no angles.
    """

    kind: str
    n: int
    d: int
    family: str
    thetas: np.ndarray
    gamma: Optional[float] = None
    strict: bool = True
    last_sign: float = 1.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("otson", "hoon"):
            raise ParseError(f"params: unknown kind {self.kind!r}")
        self.thetas = np.asarray(self.thetas, dtype=float).reshape(-1)
        want = (self.n * self.d if self.kind == "otson"
                else (self.n - 1) * self.d + self.d - 1)
        if self.thetas.shape[0] != want:
            raise DimensionError(
                f"{self.kind} with n={self.n}, d={self.d} needs {want} "
                f"angles, got {self.thetas.shape[0]}")
        if not np.all(np.isfinite(self.thetas)):
            raise DomainError("params: non-finite angle")
        if self.kind == "hoon" and self.gamma is None:
            raise ParseError("params: hoon files need 'gamma'")

    def to_params(self) -> Union[OtsonParams, HoonParams]:
        n, d = self.n, self.d
        if self.kind == "otson":
            p = OtsonParams.from_angles(self.thetas.reshape(n, d),
                                        self.family)
        else:
            k = (n - 1) * d
            p = HoonParams.from_angles(self.gamma,
                                       self.thetas[:k].reshape(n - 1, d),
                                       self.thetas[k:], self.family,
                                       self.last_sign)
        p.check_domain()
        return p

    @classmethod
    def from_params(cls, p, strict: bool,
                    metadata: Optional[dict] = None) -> "ParamFile":
        meta = dict(metadata or {})
        if isinstance(p, HoonParams):
            return cls("hoon", p.n, p.d, p.kind,
                       np.concatenate([p.angles.ravel(), p.last.thetas]),
                       p.gamma, strict, p.last.sign, meta)
        return cls("otson", p.n, p.d, p.family.kind, p.angles.ravel(),
                   None, strict, 1.0, meta)

    def to_json(self) -> Dict[str, Any]:
        doc = {"format_version": FORMAT_VERSION, "type": "params",
               "kind": self.kind, "n": self.n, "d": self.d,
               "family": self.family}
        if self.kind == "hoon":
            doc["gamma"] = float(self.gamma)
            doc["last_sign"] = float(self.last_sign)
        doc["thetas"] = self.thetas.tolist()
        doc["strict"] = bool(self.strict)
        doc["metadata"] = self.metadata
        return doc

    @classmethod
    def from_json(cls, doc) -> "ParamFile":
        _check_header(doc, "params")
        for key in ("kind", "n", "d", "family", "thetas"):
            if key not in doc:
                raise ParseError(f"params: missing field {key!r}")
        th = doc["thetas"]
        if not isinstance(th, list):
            raise ParseError("params: field 'thetas' must be a list")
        return cls(doc["kind"], _int(doc, "n"), _int(doc, "d"),
                   doc["family"], _matrix([th], "thetas")[0],
                   doc.get("gamma"), bool(doc.get("strict", True)),
                   float(doc.get("last_sign", 1.0)),
                   doc.get("metadata", {}))


# --------------------------------------------------------------- file I/O


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def loads(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: line {exc.lineno} column {exc.colno}: "
                         f"{exc.msg}") from None


def _read_text(path) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _write_text(path, text: str):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_model(path) -> ModelFile:
    return ModelFile.from_json(loads(_read_text(path), str(path)))


def write_model(path, model: ModelFile):
    _write_text(path, dumps(model.to_json()))


def read_params(path) -> ParamFile:
    return ParamFile.from_json(loads(_read_text(path), str(path)))


def write_params(path, pf: ParamFile):
    _write_text(path, dumps(pf.to_json()))


def read_any(path) -> Union[ModelFile, ParamFile]:
    doc = loads(_read_text(path), str(path))
    if isinstance(doc, dict) and doc.get("type") == "params":
        return ParamFile.from_json(doc)
    return ModelFile.from_json(doc)


# ------------------------------------------------------------ random models


@dataclass(frozen=True)
class RandomSystemConfig:
    n: int
    d: int
    m: int = 1
    rho: float = 0.9
    seed: int = 0


def random_system(n: int, d: int, m: int = 1, rho_target: float = 0.9,
                  seed: int = 0) -> ModelFile:
    """Gaussian (A, B, C) with A rescaled to spectral radius ``rho_target``.

    Draws come from a seeded PCG64 generator; observability (minimum
    eigenvalue of the observability Grammian above 1e-10) is checked and
    the draw repeated up to 8 times.
    """
    if not 1 <= d <= n:
        raise DimensionError(f"need 1 <= d <= n, got n={n}, d={d}")
    if m < 0:
        raise DimensionError("m must be nonnegative")
    if not 0.0 < rho_target < 1.0:
        raise DomainError(f"rho_target must lie in (0, 1), got {rho_target}")
    rng = np.random.default_rng(seed)
    for attempt in range(RESAMPLES):
        A = rng.standard_normal((n, n))
        r = spectral_radius(A)
        if r == 0.0:
            continue
        A *= rho_target / r
        C = rng.standard_normal((d, n))
        B = rng.standard_normal((n, m)) if m else None
        P = solve_dual_stein(A, C)
        if np.linalg.eigvalsh(P)[0] > OBSERVABILITY_FLOOR:
            meta = {"seed": int(seed), "generator": "numpy.PCG64",
                    "attempt": attempt, "rho_target": float(rho_target),
                    "provenance": f"random_system(n={n}, d={d}, m={m}, "
                                  f"rho={rho_target}, seed={seed})"}
            return ModelFile(A, C, B, None, meta)
    raise UnobservableError(
        f"no observable draw in {RESAMPLES} attempts (n={n}, d={d})")
