import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st

from onforms.errors import ConvergenceError, DimensionError, UnstableError
from onforms.grammians import (grammian_report, hankel_singular_values,
                               is_observable, solve_dual_stein, solve_stein,
                               spectral_radius, stein_map, stein_residual)

from conftest import random_on_pair, random_stable_pair


def test_scalar_closed_form():
    P = solve_stein([[0.5]], [[1.0]])
    assert abs(P[0, 0] - 4.0 / 3.0) <= 1e-14 * 4.0 / 3.0


@given(st.floats(-0.99, 0.99), st.floats(0.01, 10.0))
def test_scalar_property(a, c):
    P = solve_dual_stein([[a]], [[c]])
    want = c * c / (1 - a * a)
    assert abs(P[0, 0] - want) <= 1e-14 * want


def test_nilpotent_zero():
    B = np.arange(6.0).reshape(3, 2)
    np.testing.assert_array_equal(solve_stein(np.zeros((3, 3)), B), B @ B.T)


def test_random_residual(rng):
    for n in (5, 20, 64):
        pair = random_stable_pair(n, 2, rng)
        B = rng.standard_normal((n, 3))
        P = solve_stein(pair.A, B)
        assert stein_residual(pair.A, B, P) <= 1e-10 * max(
            1, np.linalg.norm(P))
        np.testing.assert_array_equal(P, P.T)
        ref = sla.solve_discrete_lyapunov(pair.A, B @ B.T)
        np.testing.assert_allclose(P, ref, rtol=1e-8,
                                   atol=1e-10 * np.abs(ref).max())


def test_fixed_point_is_stable(rng):
    pair = random_stable_pair(8, 2, rng)
    P = solve_dual_stein(pair.A, pair.C)
    step = stein_map(pair.A.T, pair.C.T, P)
    assert np.linalg.norm(step - P) <= 1e-12 * np.linalg.norm(P)


def test_dual_is_same_code_path(rng):
    pair = random_stable_pair(6, 2, rng)
    np.testing.assert_array_equal(solve_dual_stein(pair.A, pair.C),
                                  solve_stein(pair.A.T, pair.C.T))


def test_on_pair_grammian_is_identity(rng):
    pair = random_on_pair(10, 2, rng)
    P = solve_dual_stein(pair.A, pair.C)
    assert np.linalg.norm(P - np.eye(10)) <= 1e-10


def test_observable_positive_definite(rng):
    pair = random_stable_pair(8, 2, rng)
    assert np.linalg.eigvalsh(solve_dual_stein(pair.A, pair.C))[0] > 0
    assert is_observable(pair.A, pair.C)


def test_unstable_rejected():
    with pytest.raises(UnstableError):
        solve_stein(np.eye(2), np.ones((2, 1)))
    with pytest.raises(UnstableError):
        solve_stein([[1.0 - 1e-12]], [[1.0]])


def test_iteration_cap():
    # 1 - 1e-9 needs about 31 doublings; cap it below that
    with pytest.raises(ConvergenceError):
        solve_stein([[1.0 - 1e-9]], [[1.0]], maxiter=5)


def test_spectral_radius_examples():
    assert spectral_radius(np.eye(3)) == pytest.approx(1.0, abs=1e-12)
    assert spectral_radius([[0, 1], [-0.25, 0]]) == pytest.approx(0.5,
                                                                  abs=1e-12)
    shift = np.diag(np.ones(4), -1)
    assert spectral_radius(shift) <= 1e-8


def test_report_scalar():
    r = grammian_report([[0.5]], [[1.0]], [[1.0]])
    assert r.P_ctrl[0, 0] == pytest.approx(4 / 3, rel=1e-14)
    assert r.P_obs[0, 0] == pytest.approx(4 / 3, rel=1e-14)
    assert r.hankel[0] == pytest.approx(4 / 3, rel=1e-14)
    assert r.kappa_ctrl == r.kappa_obs == r.kappa_sigma == 1.0
    assert r.excess == pytest.approx(1.0, abs=1e-14)


def test_report_requires_b():
    with pytest.raises(DimensionError, match="B required"):
        grammian_report([[0.5]], None, [[1.0]])


def test_report_on_pair(rng):
    pair = random_on_pair(7, 2, rng)
    r = grammian_report(pair.A, rng.standard_normal((7, 2)), pair.C)
    assert abs(r.kappa_obs - 1) <= 1e-9
    assert abs(r.excess - 1) <= 1e-6


def test_report_inequality_and_hankel(rng):
    for _ in range(20):
        n = int(rng.integers(2, 9))
        pair = random_stable_pair(n, 2, rng)
        B = rng.standard_normal((n, 2))
        r = grammian_report(pair.A, B, pair.C)
        assert r.inequality_holds()
        assert r.excess >= 1 - 1e-8
        assert np.all(np.diff(r.hankel) <= 1e-12 * r.hankel[0])
        ev = np.sort(np.linalg.eigvals(r.P_ctrl @ r.P_obs).real)[::-1]
        np.testing.assert_allclose(r.hankel, np.sqrt(np.maximum(ev, 0)),
                                   rtol=1e-6, atol=1e-10 * r.hankel[0])
        np.testing.assert_allclose(
            hankel_singular_values(r.P_ctrl, r.P_obs), r.hankel)
