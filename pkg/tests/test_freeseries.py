from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schurkit.freeseries import (
    FockVector,
    FormalSeries,
    da_norm,
    da_weight,
    fock_dim,
    fock_norm,
    mult_operator,
    nc_debranges_coeffs,
    nc_szego_coeff,
    series_multiply,
    shift_matrix,
    transpose_permutation,
    word_transpose,
    words_upto,
)
from schurkit.kernels import positivity_check
from schurkit.matops import ValidationError, psd_check
from schurkit.realization import free_transfer_coeffs
from schurkit.sampling import random_coisometric_colligation, random_nc_series

seeds = st.integers(0, 2**32 - 1)
words = st.lists(st.integers(1, 3), max_size=6).map(tuple)


def one(d=2):
    return FormalSeries.constant(1.0, d=d)


def z(j, d=2):
    return FormalSeries.monomial((j,), 1.0, d=d)


def test_transpose_examples():
    assert word_transpose(()) == ()
    assert word_transpose((2, 1, 3)) == (3, 1, 2)


@given(words)
def test_transpose_involution(w):
    assert word_transpose(word_transpose(w)) == w


def test_multiply_examples():
    S = series_multiply(one() + z(1), z(2))
    assert set(S.terms) == {(2,), (1, 2)}
    assert S.coeff((1, 2))[0, 0] == 1
    assert S.max_deviation(z(2) + FormalSeries.monomial((1, 2), 1.0, d=2)) == 0
    assert (z(1) * one()).max_deviation(z(1)) == 0
    assert (one() * z(1)).max_deviation(z(1)) == 0
    assert (z(1) * z(2)).max_deviation(z(2) * z(1)) == 1


def test_multiply_validation():
    with pytest.raises(ValidationError):
        series_multiply(z(1, 2), z(1, 3))
    with pytest.raises(ValidationError):
        series_multiply(FormalSeries.constant(np.ones((2, 2))), FormalSeries.constant(np.ones((3, 1))))


@given(seeds)
def test_multiply_associative(seed):
    rng = np.random.default_rng(seed)
    R, S, T = (random_nc_series(rng, 2, 2) for _ in range(3))
    assert ((R * S) * T).max_deviation(R * (S * T)) <= 1e-12


def test_commutative_mode_merges_words():
    S = FormalSeries(2, 1, 1, {(2, 1): 1.0, (1, 2): 2.0}, commutative=True)
    assert S.coeff((2, 1))[0, 0] == 3
    prod = series_multiply(FormalSeries.monomial((1,), d=2, commutative=True),
                           FormalSeries.monomial((2,), d=2, commutative=True))
    assert prod.coeff((2, 1))[0, 0] == 1


def test_szego_coeff():
    assert nc_szego_coeff((), ()) == 1
    assert nc_szego_coeff((1, 2), (1, 2)) == 1
    assert nc_szego_coeff((1,), (2,)) == 0


def test_fock_norm_examples():
    assert fock_norm(FockVector(2, 2, 1, np.zeros(7))) == 0
    f = FockVector.from_series(one() + z(1), 2)
    assert fock_norm(f) == pytest.approx(np.sqrt(2))
    assert f.to_series().max_deviation(one() + z(1)) == 0


@given(seeds)
def test_fock_norm_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=fock_dim(2, 3))
    assert fock_norm(FockVector(2, 3, 1, c)) == pytest.approx(fock_norm(FockVector(2, 3, 1, rng.permutation(c))))


def test_da_weight_examples():
    assert da_weight((0, 0, 0)) == 1
    assert da_weight((1, 1)) == Fraction(1, 2)
    assert da_weight((2, 1, 0)) == Fraction(1, 3)
    f = FormalSeries(2, 1, 1, {(1, 2): 1.0}, commutative=True)
    assert da_norm(f) == pytest.approx(np.sqrt(0.5))


def test_word_count():
    assert len(words_upto(2, 2)) == 7 == fock_dim(2, 2)
    assert words_upto(2, 1) == ((), (1,), (2,))


def test_shift_matrix_examples():
    assert np.array_equal(shift_matrix(1, 2, 1), np.eye(3, k=-1))
    d, N = 2, 3
    S1, S2 = shift_matrix(1, N, d), shift_matrix(2, N, d)
    assert np.allclose(S1.T @ S2, 0)
    short = [i for i, w in enumerate(words_upto(d, N)) if len(w) < N]
    P = np.eye(fock_dim(d, N))[:, short]
    assert np.allclose(P.T @ S1.T @ S1 @ P, np.eye(len(short)))


def test_mult_operator_examples():
    assert np.array_equal(mult_operator(one(), 3), np.eye(fock_dim(2, 3)))
    # one variable: left and right multiplication coincide
    assert np.array_equal(mult_operator(z(1, 1), 3), shift_matrix(1, 3, 1))
    # two variables: M_{z1} prepends, the shift appends; the transpose swaps them
    P = transpose_permutation(2, 3)
    assert np.array_equal(mult_operator(z(1), 3), P @ shift_matrix(1, 3, 2) @ P.T)


@given(seeds, st.integers(1, 3), st.integers(0, 2))
def test_mult_operator_matches_convolution(seed, d, deg):
    rng = np.random.default_rng(seed)
    N = 3
    S = random_nc_series(rng, d, deg, rows=2, cols=2)
    f = random_nc_series(rng, d, N, rows=2, cols=1)
    lhs = mult_operator(S, N) @ FockVector.from_series(f, N).coeffs
    rhs = FockVector.from_series(series_multiply(S, f).truncate(N), N).coeffs
    assert np.allclose(lhs, rhs, atol=1e-12)


@given(seeds)
def test_mult_operator_of_product(seed):
    rng = np.random.default_rng(seed)
    N = 4
    R, S = random_nc_series(rng, 2, 1), random_nc_series(rng, 2, 2)
    inputs = [i for i, w in enumerate(words_upto(2, N)) if len(w) <= N - R.degree - S.degree]
    lhs = mult_operator(R * S, N)[:, inputs]
    rhs = (mult_operator(R, N) @ mult_operator(S, N))[:, inputs]
    assert np.allclose(lhs, rhs, atol=1e-12)


@given(seeds)
def test_colligation_multiplier_norm(seed):
    rng = np.random.default_rng(seed)
    U = random_coisometric_colligation(rng, d=2, max_state=4, max_block=2)
    norms = [np.linalg.norm(mult_operator(free_transfer_coeffs(U, N), N), 2) for N in range(1, 6)]
    assert max(norms) <= 1 + 1e-9
    assert all(a <= b + 1e-12 for a, b in zip(norms, norms[1:]))


def test_nc_debranges_examples():
    K = nc_debranges_coeffs(FormalSeries.constant(0.6, d=2), 2)
    assert np.allclose(K.gram(), 0.64 * np.eye(7))
    K = nc_debranges_coeffs(z(1), 2)
    idx = {w: i for i, w in enumerate(K.points)}
    assert K.blocks[idx[()], idx[()], 0, 0] == 1
    assert K.blocks[idx[(1,)], idx[(1,)], 0, 0] == 0
    off = K.gram() - np.diag(np.diag(K.gram()))
    assert not np.any(off)


@given(seeds, st.floats(0.2, 1.5))
def test_nc_debranges_matches_multiplier_defect(seed, scale):
    rng = np.random.default_rng(seed)
    S = random_nc_series(rng, 2, 2, rows=2, cols=2, scale=scale / 4)
    N = 3
    K = nc_debranges_coeffs(S, N)
    M = mult_operator(S, N)
    assert np.allclose(K.gram(), np.eye(M.shape[0]) - M @ M.conj().T, atol=1e-12)
    assert positivity_check(K).is_psd == psd_check(np.eye(M.shape[0]) - M @ M.conj().T).is_psd
