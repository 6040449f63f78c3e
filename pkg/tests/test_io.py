import json

import numpy as np
import pytest

from onforms.errors import (DimensionError, DomainError, ParseError,
                            UnobservableError)
from onforms.grammians import grammian_report, solve_dual_stein
from onforms.hoon import random_hoon_params
from onforms.io import (ModelFile, ParamFile, dumps, loads, random_system,
                        read_model, read_params, write_model, write_params)
from onforms.otson import random_otson_params


def test_model_round_trip(tmp_path):
    m = random_system(6, 2, 3, 0.8, seed=11)
    path = tmp_path / "m.json"
    write_model(path, m)
    text = path.read_text()
    back = read_model(path)
    for name in ("A", "B", "C"):
        np.testing.assert_array_equal(getattr(back, name), getattr(m, name))
    write_model(path, back)
    assert path.read_text() == text
    assert back.metadata["seed"] == 11


def test_row_count_error_names_matrix():
    doc = random_system(2, 1, seed=1).to_json()
    doc["A"].append([0.0, 0.0])
    with pytest.raises(DimensionError, match="'A'"):
        ModelFile.from_json(doc)
    doc = random_system(2, 1, seed=1).to_json()
    doc["C"][0].append(1.0)
    with pytest.raises(DimensionError, match="'C'"):
        ModelFile.from_json(doc)


def test_missing_b():
    doc = random_system(3, 1, seed=2).to_json()
    del doc["B"]
    m = ModelFile.from_json(doc)
    assert m.B is None and m.m == 0
    with pytest.raises(DimensionError, match="B required"):
        grammian_report(m.A, m.B, m.C)


def test_parse_errors():
    with pytest.raises(ParseError, match="line 2"):
        loads('{\n "n": ,\n}')
    with pytest.raises(ParseError, match="format_version"):
        ModelFile.from_json({"n": 1})
    with pytest.raises(ParseError, match="missing"):
        ModelFile.from_json({"format_version": 1, "n": 1, "d": 1, "A": [[0]]})


def test_non_finite_rejected():
    with pytest.raises(DomainError, match="non-finite"):
        ModelFile([[np.inf]], [[1.0]])
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})


def test_random_system_contract():
    m1 = random_system(7, 2, 2, 0.5, seed=3)
    m2 = random_system(7, 2, 2, 0.5, seed=3)
    assert dumps(m1.to_json()) == dumps(m2.to_json())
    assert abs(m1.pair.spectral_radius() - 0.5) <= 1e-6
    m = random_system(4, 4, 1, 0.9, seed=8)
    assert np.linalg.eigvalsh(solve_dual_stein(m.A, m.C))[0] > 1e-10


def test_random_system_errors():
    with pytest.raises(DimensionError):
        random_system(2, 3)
    with pytest.raises(DomainError):
        random_system(3, 1, rho_target=1.0)
    with pytest.raises(UnobservableError):
        random_system(40, 1, 1, 0.3, seed=0)


@pytest.mark.parametrize("kind", ["otson", "hoon"])
def test_params_round_trip(kind, tmp_path, rng):
    p = (random_otson_params(5, 2, rng) if kind == "otson"
         else random_hoon_params(5, 1, rng))
    pf = ParamFile.from_params(p, True)
    path = tmp_path / "p.json"
    write_params(path, pf)
    back = read_params(path).to_params()
    np.testing.assert_array_equal(
        np.concatenate([[getattr(back, "gamma", 0.0)],
                        back.angles.ravel()]),
        np.concatenate([[getattr(p, "gamma", 0.0)], p.angles.ravel()]))
    doc = json.loads(path.read_text())
    want = 10 if kind == "otson" else 4
    assert len(doc["thetas"]) == want


def test_params_count_error():
    with pytest.raises(DimensionError):
        ParamFile("hoon", 3, 2, "Q3", np.zeros(4), gamma=0.5)
    with pytest.raises(ParseError):
        ParamFile("hoon", 3, 2, "Q3", np.zeros(5))
