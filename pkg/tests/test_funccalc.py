import numpy as np
import pytest
from hypothesis import given, strategies as st

from schurkit.freeseries import FormalSeries
from schurkit.funccalc import (
    CommutativityError,
    OperatorTuple,
    StrictnessError,
    UncertifiedError,
    certify,
    eval_at_contraction,
    eval_at_row_tuple,
    eval_colligation_resolvent,
    eval_tensored,
    row_contraction_check,
    von_neumann_check,
)
from schurkit.realization import free_transfer_coeffs, tensored_realization
from schurkit.sampling import (
    random_commuting_row_contraction,
    random_coisometric_colligation,
    random_row_contraction,
    random_strict_contraction,
)

from conftest import blaschke

seeds = st.integers(0, 2**32 - 1)
jordan = 0.9 * np.array([[0.0, 0.0], [1.0, 0.0]])


def test_row_contraction_examples():
    rep = row_contraction_check(OperatorTuple((np.zeros((2, 2)), np.zeros((2, 2)))))
    assert rep.row_norm == 0
    rep = row_contraction_check(OperatorTuple((0.9 * np.eye(3),)))
    assert rep.row_norm == pytest.approx(0.9) and rep.strict
    h = np.eye(2) / np.sqrt(2)
    rep = row_contraction_check(OperatorTuple((h, h)))
    assert rep.row_norm == pytest.approx(1.0) and not rep.strict


def test_eval_at_contraction_examples(rng):
    assert np.array_equal(eval_at_contraction(FormalSeries.monomial((1, 1), 1.0), jordan), np.zeros((2, 2)))
    T = random_strict_contraction(rng, 4)
    assert np.allclose(eval_at_contraction(FormalSeries.monomial((1,), 1.0), T), T)
    assert np.allclose(eval_at_contraction(blaschke(0.5), 0.5 * np.eye(2)), 0, atol=1e-12)
    with pytest.raises(StrictnessError) as info:
        eval_at_contraction(FormalSeries.monomial((1,), 1.0), np.eye(2))
    assert info.value.row_norm == pytest.approx(1.0)


def test_eval_at_row_tuple_examples(rng):
    S = FormalSeries(2, 1, 1, {(1,): 1.0, (2,): 1.0})
    T = OperatorTuple((0.3 * np.eye(2), 0.4 * np.eye(2)), commuting=True)
    assert np.allclose(eval_at_row_tuple(S, T, "free"), 0.7 * np.eye(2))
    # free mode composes the tuple in the letter order of the word
    T1 = np.array([[0.1, 0.2], [0.0, 0.3]])
    T2 = np.array([[0.0, 0.1], [0.2, 0.1]])
    pair = OperatorTuple((T1, T2))
    S = FormalSeries(2, 1, 1, {(1, 2): 2.0})
    assert np.allclose(eval_at_row_tuple(S, pair), 2 * T1 @ T2)
    assert not np.allclose(T1 @ T2, T2 @ T1)
    S = FormalSeries(2, 1, 1, {(): 0.5, (1,): 0.3})
    zero = OperatorTuple((np.zeros((3, 3)), np.zeros((3, 3))))
    assert np.array_equal(eval_at_row_tuple(S, zero), 0.5 * np.eye(3))


def test_commuting_mode_rejects_noncommuting_pair():
    T = OperatorTuple((np.array([[0, 0.5], [0, 0]]), np.array([[0, 0], [0.5, 0]])))
    with pytest.raises(CommutativityError):
        eval_at_row_tuple(FormalSeries(2, 1, 1, {(1,): 1.0}, True), T, "commuting")


def test_von_neumann_examples(rng):
    vn = von_neumann_check(blaschke(0.5), OperatorTuple((jordan,)))
    assert vn.passed
    T = random_strict_contraction(rng, 3, 0.9)
    vn = von_neumann_check(FormalSeries.monomial((1,), 1.0), OperatorTuple((T,)))
    assert vn.norm == pytest.approx(0.9) and vn.passed
    with pytest.raises(UncertifiedError):
        von_neumann_check(FormalSeries.constant(2.0), OperatorTuple((T,)))


def test_certify_commutative_series():
    S = FormalSeries(2, 1, 1, {(1, 2): 1.0}, commutative=True)
    ok, reason = certify(S)
    assert ok, reason
    assert not certify(FormalSeries(2, 1, 1, {(1,): 0.8, (2,): 0.8}, commutative=True))[0]


def test_scalar_collapse(rng):
    U = random_coisometric_colligation(rng, d=2, max_state=3)
    for _ in range(5):
        T = random_commuting_row_contraction(rng, 2, 1, 0.8)
        z = np.array([T.blocks[0][0, 0], T.blocks[1][0, 0]])
        assert np.max(np.abs(eval_at_row_tuple(U, T, "commuting") - U(z))) <= 1e-12


@given(seeds, st.sampled_from(["single", "commuting", "free"]), st.integers(1, 6))
def test_von_neumann_and_resolvent(seed, kind, k):
    rng = np.random.default_rng(seed)
    d = 1 if kind == "single" else int(rng.integers(2, 4))
    U = random_coisometric_colligation(rng, d=d, max_state=4)
    if kind == "single":
        T, mode = OperatorTuple((random_strict_contraction(rng, k, 0.9),)), "free"
    elif kind == "commuting":
        T, mode = random_commuting_row_contraction(rng, d, k, 0.9), "commuting"
    else:
        T, mode = random_row_contraction(rng, d, k, 0.9), "free"
    vn = von_neumann_check(U, T, mode)
    assert vn.passed
    series = eval_at_row_tuple(U, T, mode)
    assert np.max(np.abs(series - eval_colligation_resolvent(U, T))) <= 1e-9


@given(seeds)
def test_series_and_colligation_agree(seed):
    rng = np.random.default_rng(seed)
    U = random_coisometric_colligation(rng, d=2, max_state=3, max_block=2)
    T = random_row_contraction(rng, 2, 3, 0.05)
    S = free_transfer_coeffs(U, 9)
    assert np.max(np.abs(eval_at_row_tuple(S, T) - eval_colligation_resolvent(U, T))) <= 1e-9


def test_eval_tensored(rng):
    B = blaschke(0.5)
    T = tensored_realization(B, 2)
    eta = random_strict_contraction(rng, 2, 0.7)
    assert np.allclose(eval_tensored(T.colligation, eta), eval_at_contraction(B, eta), atol=1e-12)
    with pytest.raises(StrictnessError):
        eval_tensored(T.colligation, np.eye(2))
