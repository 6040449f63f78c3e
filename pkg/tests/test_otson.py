import numpy as np
import pytest
from hypothesis import given, strategies as st

from onforms.canonical import classify, standardize
from onforms.errors import DimensionError, DomainError, FormError
from onforms.otson import (OtsonParams, gamma_states, otson_bottom_rows,
                           otson_dense, otson_domain_check, otson_factor,
                           otson_reconstruct, random_otson_params)
from onforms.pair import OutputPair
from onforms.rotations import (OrpFamily, OrpParam, SignatureMatrix,
                               apply_signature, orp_blocks)

from conftest import random_on_pair


def test_scalar_factor():
    p = otson_factor(OutputPair([[0.8]], [[0.6]]))
    t = p.thetas[0].thetas[0]
    assert np.cos(t) == pytest.approx(0.6, abs=1e-15)
    assert np.sin(t) == pytest.approx(-0.8, abs=1e-15)
    b = orp_blocks(p.thetas[0])
    assert b.mu == pytest.approx(0.6) and b.x[0] == pytest.approx(0.8)
    back = otson_reconstruct(p)
    np.testing.assert_allclose(back.stack, [[0.6], [0.8]], atol=1e-15)


@pytest.mark.parametrize("n,d", [(5, 2), (4, 4), (1, 3)])
def test_zero_angles(n, d):
    p = OtsonParams.from_angles(np.zeros((n, d)))
    pair = otson_reconstruct(p)
    C = np.zeros((d, n))
    C[:, :min(d, n)] = np.eye(d)[:, :min(d, n)]
    A = np.eye(n, k=d)
    np.testing.assert_array_equal(pair.C, C)
    np.testing.assert_array_equal(pair.A, A)
    assert pair.on_residual() == 0.0
    assert otson_domain_check(p) == "strict"
    np.testing.assert_array_equal(otson_factor(pair).angles, 0.0)


@pytest.mark.parametrize("kind", ["Q1", "Q2"])
def test_round_trip(kind, rng):
    p = random_otson_params(8, 2, rng, kind)
    q = otson_factor(otson_reconstruct(p), kind)
    np.testing.assert_allclose(q.angles, p.angles, atol=1e-10)


@pytest.mark.parametrize("kind", ["Q1", "Q2", "householder"])
def test_recurrence_matches_dense(kind, rng):
    for n, d in [(6, 3), (12, 2), (3, 5), (1, 1)]:
        p = random_otson_params(n, d, rng, kind)
        r = otson_reconstruct(p)
        np.testing.assert_allclose(r.stack, otson_dense(p).stack, atol=1e-12)
        assert r.on_residual() <= 1e-11
        assert np.abs(np.triu(r.stack, 1)).max() <= 1e-12


def test_gamma_states_orthonormal(rng):
    p = random_otson_params(7, 3, rng)
    blocks = [orp_blocks(t) for t in p.thetas]
    for st in gamma_states(blocks, 3):
        S = np.vstack([st.L, st.M])
        np.testing.assert_allclose(S.T @ S, np.eye(st.k), atol=1e-11)
        assert np.abs(np.triu(st.L, 1)).max() == 0.0


def test_factor_any_on_pair(rng):
    from onforms.canonical import to_ots
    pair, _ = to_ots(random_on_pair(9, 3, rng))
    p = otson_factor(pair)
    np.testing.assert_allclose(otson_reconstruct(p).stack, pair.stack,
                               atol=1e-10)
    assert np.all(p.mus() > 0)


def test_factor_rejects(rng):
    with pytest.raises(FormError):
        otson_factor(random_on_pair(4, 1, rng))
    with pytest.raises(FormError):
        otson_factor(OutputPair([[0.5, 0], [0.5, 0.5]], [[1.0, 0.0]]))
    pair = otson_reconstruct(random_otson_params(4, 1, rng))
    with pytest.raises(DomainError):
        otson_factor(pair, "householder")


def test_bottom_rows(rng):
    p = OtsonParams.from_angles(np.zeros((6, 2)))
    np.testing.assert_array_equal(otson_bottom_rows(p),
                                  otson_reconstruct(p).stack[4:])
    for n, d in [(6, 2), (5, 3), (9, 1)]:
        p = random_otson_params(n, d, rng)
        np.testing.assert_allclose(otson_bottom_rows(p),
                                   otson_reconstruct(p).stack[n - 2:],
                                   atol=1e-12)
    with pytest.raises(DimensionError):
        otson_bottom_rows(random_otson_params(3, 2, rng))


def test_domain_check(rng):
    p = random_otson_params(5, 2, rng)
    assert otson_domain_check(p) == "strict"
    ang = p.angles.copy()
    ang[1, 0] = np.pi / 2  # mu = cos(theta_1) * ... = 0
    q = OtsonParams.from_angles(ang)
    assert abs(q.mus()[1]) < 1e-15
    assert otson_domain_check(q) == "boundary"
    ang[1, 0] = 2.5
    assert otson_domain_check(OtsonParams.from_angles(ang)) == "unreduced"


def test_signature_orbit(rng):
    p = random_otson_params(7, 2, rng)
    pair = otson_reconstruct(p)
    E = SignatureMatrix(rng.choice([-1.0, 1.0], size=7))
    std, _ = standardize(apply_signature(pair, E), "OTS")
    np.testing.assert_allclose(otson_factor(std).angles, p.angles,
                               atol=1e-10)


def test_params_validation():
    with pytest.raises(DimensionError):
        OtsonParams([], 2)
    fam = OrpFamily("Q1", 3)
    with pytest.raises(DimensionError):
        OtsonParams([OrpParam([0, 0], fam)], 1)
    with pytest.raises(DomainError):
        otson_reconstruct(OtsonParams.from_angles([[0.1, 2.0]]))


@given(st.integers(1, 10), st.integers(1, 5), st.sampled_from(["Q1", "Q2"]),
       st.integers(0, 2 ** 32 - 1))
def test_bijection_property(n, d, kind, seed):
    rng = np.random.default_rng(seed)
    p = random_otson_params(n, d, rng, kind)
    pair = otson_reconstruct(p)
    assert classify(pair, form="OTS").strict
    q = otson_factor(pair, kind)
    np.testing.assert_allclose(q.angles, p.angles, atol=1e-10)
    np.testing.assert_allclose(otson_reconstruct(q).stack, pair.stack,
                               atol=1e-10)


def test_random_params_spread(rng):
    p = random_otson_params(12, 3, rng, "Q1", spread=0.5)
    assert np.abs(p.angles).max() <= 0.25 * np.pi
    assert otson_domain_check(p) == "strict"
