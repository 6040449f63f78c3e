import numpy as np
import pytest
from hypothesis import given, strategies as st

from onforms.errors import DimensionError, DomainError
from onforms.pair import OutputPair, orthogonality_residual
from onforms.schur import (SchurForm, block_diagonal_structure_check,
                           is_lambda_r, is_qd, order_blocks,
                           ordered_qd_schur, real_schur, schur_on,
                           standardize_lambda_r, standardize_lambda_r_block,
                           standardize_qd_block)
from onforms.canonical import signature_sequence

from conftest import random_orthogonal, random_stable_pair


def rot(phi):
    return np.array([[np.cos(phi), np.sin(phi)], [-np.sin(phi), np.cos(phi)]])


def sorted_eigs(M):
    return np.sort_complex(np.linalg.eigvals(M))


def block_matrix(blocks, rng):
    """Quasi-triangular matrix with the given diagonal blocks, mixed by a
    random orthogonal similarity."""
    n = sum(np.atleast_2d(b).shape[0] for b in blocks)
    T = np.triu(rng.standard_normal((n, n)), 1) * 0.3
    i = 0
    for b in blocks:
        b = np.atleast_2d(b)
        z = b.shape[0]
        T[i:i + z, i:i + z] = b
        i += z
    Q = random_orthogonal(n, rng)
    return Q @ T @ Q.T


# ----------------------------------------------------------- real_schur


def test_diagonal():
    A = np.diag([0.9, 0.5, 0.1])
    sf = real_schur(A)
    np.testing.assert_allclose(np.sort(np.diag(sf.T)), [0.1, 0.5, 0.9])
    np.testing.assert_allclose(np.abs(sf.U) @ np.ones(3), np.ones(3))


def test_single_complex_block():
    sf = real_schur([[0, 1], [-0.25, 0]])
    assert sf.blocks == [(0, 2)] and sf.ell == 1
    np.testing.assert_allclose(sorted_eigs(sf.T), [-0.5j, 0.5j], atol=1e-15)


def test_upper_triangular(rng):
    A = np.triu(rng.standard_normal((4, 4)))
    sf = order_blocks(real_schur(A))
    assert sf.residual(A) <= 1e-12
    np.testing.assert_allclose(np.sort(np.diag(sf.T)), np.sort(np.diag(A)),
                               atol=1e-12)


def test_schur_invariants(rng):
    for n in (5, 12, 30):
        A = rng.standard_normal((n, n))
        sf = real_schur(A)
        assert sf.residual(A) <= 1e-9 * np.linalg.norm(A)
        assert sf.below_blocks() <= 1e-11
        assert sf.complex_first()
        assert orthogonality_residual(sf.U) <= 1e-10
        np.testing.assert_allclose(sorted_eigs(sf.T), sorted_eigs(A),
                                   atol=1e-8)
        assert sf.M == n - sf.ell


def test_block_index_map(rng):
    A = block_matrix([rot(0.3) * 0.5, rot(1.0) * 0.7, 0.2, -0.4, 0.1], rng)
    sf = real_schur(A)
    assert sf.ell == 2 and sf.M == 5
    starts = [s + 1 for s, _ in sf.blocks]
    assert starts == [sf.m(k) for k in range(1, sf.M + 1)]
    assert sf.m(0) == 0


def test_non_square():
    with pytest.raises(DimensionError):
        real_schur(np.ones((2, 3)))


# ------------------------------------------------------------- ordering


def test_ordered_unchanged():
    T = np.array([[0.1, 1.0], [0.0, 0.9]])
    sf = order_blocks(SchurForm(np.eye(2), T))
    np.testing.assert_allclose(sf.T, T, atol=1e-15)
    np.testing.assert_allclose(np.abs(sf.U), np.eye(2), atol=1e-15)


def test_real_swap():
    T = np.array([[0.9, 1.0], [0.0, 0.1]])
    sf = order_blocks(SchurForm(np.eye(2), T))
    np.testing.assert_allclose(np.diag(sf.T), [0.1, 0.9], atol=1e-15)
    assert sf.residual(T) <= 1e-14


def test_complex_pairs_by_modulus(rng):
    A = block_matrix([rot(0.7) * 0.8, rot(1.2) * 0.3], rng)
    sf = order_blocks(real_schur(A))
    mods = [abs(l) for l in sf.eigenvalues()]
    np.testing.assert_allclose(mods, [0.3, 0.8], atol=1e-12)
    desc = order_blocks(real_schur(A), descending=True)
    np.testing.assert_allclose([abs(l) for l in desc.eigenvalues()],
                               [0.8, 0.3], atol=1e-12)


def test_tie_breaks(rng):
    # equal moduli: larger real part first; then smaller |Im| first
    A = block_matrix([-0.5, 0.5, rot(2.0) * 0.6, rot(0.5) * 0.6], rng)
    sf = order_blocks(real_schur(A))
    eig = sf.eigenvalues()
    assert eig[0].real > eig[1].real
    np.testing.assert_allclose([eig[2].real, eig[3].real], [0.5, -0.5],
                               atol=1e-12)


@given(st.integers(1, 12), st.integers(0, 2 ** 32 - 1))
def test_ordering_property(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    sf = ordered_qd_schur(A)
    assert sf.is_ordered() and sf.complex_first()
    assert sf.residual(A) <= 1e-9 * max(1, np.linalg.norm(A))
    assert orthogonality_residual(sf.U) <= 1e-10
    np.testing.assert_allclose(sorted_eigs(sf.T), sorted_eigs(A), atol=1e-9)
    for s, z in sf.blocks:
        if z == 2:
            Z = sf.T[s:s + 2, s:s + 2]
            assert is_qd(Z, tol=1e-11)
            assert abs(Z[0, 0] * Z[0, 1] + Z[1, 0] * Z[1, 1]) <= 1e-11 * max(
                1, np.abs(Z).max()) ** 2


def test_reorder_after_standardize_rejected(rng):
    sf = ordered_qd_schur(rng.standard_normal((4, 4)))
    with pytest.raises(DomainError):
        order_blocks(sf)


# ---------------------------------------------------------- lambda_r


def test_lambda_r_examples():
    assert is_lambda_r([[0, 1], [-0.25, 0]])
    assert is_lambda_r([[0.5, 2], [-0.125, 0.5]])
    assert not is_lambda_r([[0.5, 2], [0.125, 0.5]])


def test_lambda_r_restores_block(rng):
    Z0 = np.array([[0.3, 2.0], [-0.5, 0.3]])
    for _ in range(20):
        W = rot(rng.uniform(-np.pi, np.pi))
        blk = standardize_lambda_r_block(W.T @ Z0 @ W)
        np.testing.assert_allclose(blk.Z, Z0, atol=1e-10)
        assert is_lambda_r(blk.Z)


def test_lambda_r_negative_upper_entry(rng):
    # z12 < 0 is allowed; only the sum must be positive
    Z0 = np.array([[0.3, -0.5], [2.0, 0.3]])
    assert is_lambda_r(Z0)
    for _ in range(20):
        W = rot(rng.uniform(-np.pi, np.pi))
        blk = standardize_lambda_r_block(W.T @ Z0 @ W)
        np.testing.assert_allclose(blk.Z, Z0, atol=1e-10)


@given(st.floats(-2, 2), st.floats(0.05, 3), st.floats(0.05, 3),
       st.floats(-np.pi, np.pi))
def test_lambda_r_predicate_property(a, b, c, phi):
    W = rot(phi)
    blk = standardize_lambda_r_block(W.T @ np.array([[a, b], [-c, a]]) @ W)
    assert is_lambda_r(blk.Z)


def test_lambda_r_form(rng):
    A = block_matrix([rot(0.4) * 0.9, np.diag([2.0, 0.5]) @ rot(1.0) * 0.4,
                      0.3], rng)
    sf = order_blocks(real_schur(A))
    lr = standardize_lambda_r(sf)
    assert lr.mode == "lambda_r" and lr.residual(A) <= 1e-12
    for s, z in lr.blocks:
        if z == 2:
            assert is_lambda_r(lr.T[s:s + 2, s:s + 2])
    np.testing.assert_allclose(sorted_eigs(lr.T), sorted_eigs(A), atol=1e-10)


def test_lambda_r_rejects_real_block():
    with pytest.raises(DomainError):
        standardize_lambda_r_block([[1.0, 1.0], [0.5, 0.2]])


# ---------------------------------------------------------------- qd


def test_qd_example():
    blk = standardize_qd_block([[0, 1], [-0.25, 0]])
    np.testing.assert_allclose(blk.Z, [[0, 0.25], [-1, 0]], atol=1e-15)
    assert (blk.c, blk.s, blk.d1, blk.d2) == pytest.approx((0, 1, 1, 0.25),
                                                           abs=1e-15)


def test_qd_scaled_rotation():
    Z = 0.7 * rot(0.4)
    blk = standardize_qd_block(Z)
    np.testing.assert_allclose(blk.Z, Z, atol=1e-15)
    assert blk.d1 == pytest.approx(0.7) and blk.d2 == pytest.approx(0.7)
    assert blk.c == pytest.approx(np.cos(0.4))
    assert blk.s == pytest.approx(np.sin(0.4))


def test_qd_singular():
    with pytest.raises(DomainError):
        standardize_qd_block([[1.0, 2.0], [2.0, 4.0]])


def test_qd_contract(rng):
    for _ in range(200):
        Z = rng.standard_normal((2, 2))
        blk = standardize_qd_block(Z)
        W = blk.W
        np.testing.assert_allclose(W.T @ W, np.eye(2), atol=1e-14)
        np.testing.assert_allclose(W.T @ Z @ W, blk.Z, atol=1e-12)
        np.testing.assert_allclose([blk.d1, blk.d2],
                                   np.linalg.svd(Z, compute_uv=False),
                                   rtol=1e-12)
        assert blk.s >= 0 and blk.d1 >= blk.d2 > 0
        Qf = np.array([[blk.c, blk.s], [-blk.s, blk.c]])
        if np.linalg.det(Z) < 0:
            Qf = np.array([[blk.c, blk.s], [blk.s, -blk.c]])
        np.testing.assert_allclose(Qf @ np.diag([blk.d1, blk.d2]), blk.Z,
                                   atol=1e-12)
        # unique under orthogonal similarity
        V = random_orthogonal(2, rng)
        np.testing.assert_allclose(standardize_qd_block(V.T @ Z @ V).Z,
                                   blk.Z, atol=1e-10)


# ------------------------------------------------------------ Schur ON


def test_schur_on_scalar():
    out, _ = schur_on(OutputPair([[0.5]], [[1.0]]))
    assert out.A[0, 0] == pytest.approx(0.5, abs=1e-15)
    assert out.C[0, 0] == pytest.approx(np.sqrt(0.75), abs=1e-15)


def test_schur_on_complex_pair():
    phi = 0.8
    A = 0.5 * rot(phi) @ np.diag([1.5, 1 / 1.5])
    out, sf = schur_on(OutputPair(A, [[1.0, 0.3]]))
    blk = out.A
    assert is_qd(blk)
    svals = np.linalg.svd(blk, compute_uv=False)
    assert np.prod(svals) == pytest.approx(abs(np.linalg.det(A)), abs=1e-10)


def test_schur_on_random(rng):
    pair = random_stable_pair(9, 2, rng)
    out, sf = schur_on(pair)
    assert out.on_residual() <= 1e-9
    assert sf.is_ordered() and sf.complex_first()
    for s, z in sf.blocks:
        if z == 2:
            assert is_qd(out.A[s:s + 2, s:s + 2])
    # unique: any other orthogonal realization maps to the same pair
    other = out.conjugate(random_orthogonal(9, rng))
    out2, _ = schur_on(other)
    np.testing.assert_allclose(out2.stack, out.stack, atol=1e-8)
    np.testing.assert_allclose(signature_sequence(out2),
                               signature_sequence(out), atol=1e-10)


# -------------------------------------------------- structure diagnostic


def test_structure_identity(rng):
    sf = ordered_qd_schur(rng.standard_normal((5, 5)))
    rep = block_diagonal_structure_check(sf, sf, np.eye(5))
    assert rep.off_block == 0.0


def test_structure_distinct(rng):
    A = rng.standard_normal((6, 6))
    sf1 = ordered_qd_schur(A)
    V = random_orthogonal(6, rng)
    sf2 = ordered_qd_schur(V.T @ A @ V)
    # T2 = U2^T V^T A V U2 and T1 = U1^T A U1, so T2 = W^T T1 W
    W = sf1.U.T @ V @ sf2.U
    rep = block_diagonal_structure_check(sf1, sf2, W)
    assert rep.off_block <= 1e-8


def test_structure_repeated(rng):
    # a repeated eigenvalue with a nontrivial eigenspace: rotate within it
    A = np.diag([0.2, 0.5, 0.5])
    sf1 = ordered_qd_schur(A)
    W = np.eye(3)
    W[1:, 1:] = rot(0.6)
    sf2 = SchurForm(sf1.U @ W, W.T @ sf1.T @ W, "qd")
    rep = block_diagonal_structure_check(sf1, sf2, W)
    assert rep.groups == [(0, 1), (1, 2)]
    assert rep.off_block <= 1e-15
    assert np.abs(W[1:, 1:] - np.eye(2)).max() > 0.1
