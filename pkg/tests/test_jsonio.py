import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from schurkit import jsonio
from schurkit.freeseries import FormalSeries
from schurkit.funccalc import OperatorTuple
from schurkit.kernels import CPKernelSample, KernelSample, debranges_kernel, matrix_unit
from schurkit.sampling import (
    random_coisometric_colligation,
    random_disk_points,
    random_nc_series,
    random_tv_system,
)
from schurkit.tvsystems import LowerTriWindow

seeds = st.integers(0, 2**32 - 1)


def through_text(obj):
    return json.loads(jsonio.dumps(obj))


def test_complex_encoding():
    assert jsonio.encode_complex(1 - 2j) == [1.0, -2.0]
    assert jsonio.decode_complex([1, -2], "$") == 1 - 2j
    assert jsonio.decode_complex(3, "$") == 3
    for bad in (True, "1", [1], [1, 2, 3], None):
        with pytest.raises(jsonio.SchemaError):
            jsonio.decode_complex(bad, "$")


def test_matrix_errors_carry_paths():
    with pytest.raises(jsonio.SchemaError, match=r"\$\.A\[1\]: row has 1 entries"):
        jsonio.decode_matrix([[1, 2], [3]], "$.A")
    with pytest.raises(jsonio.SchemaError, match=r"\$\.A\[0\]\[1\]"):
        jsonio.decode_matrix([[1, "x"]], "$.A")


@given(seeds)
def test_colligation_round_trip(seed):
    rng = np.random.default_rng(seed)
    U = random_coisometric_colligation(rng, d=int(rng.integers(1, 4)), max_state=4)
    V = jsonio.decode_colligation(through_text(jsonio.encode_colligation(U)))
    assert V.flavor == U.flavor and (V.d, V.n, V.p, V.q) == (U.d, U.n, U.p, U.q)
    assert np.array_equal(V.matrix, U.matrix)


def test_colligation_empty_state_and_bad_shape():
    doc = {"d": 1, "n": 0, "p": 1, "q": 1, "A": [], "B": [], "C": [], "D": [[0.5]]}
    U = jsonio.decode_colligation(doc)
    assert U.n == 0 and U.flavor == "contractive"
    doc["D"] = [[0.5, 0.0]]
    with pytest.raises(jsonio.SchemaError, match=r"\$\.D: expected shape"):
        jsonio.decode_colligation(doc)
    with pytest.raises(jsonio.SchemaError, match=r"\$\.q: missing field"):
        jsonio.decode_colligation({"d": 1, "n": 0, "p": 1})


def test_kernel_sample_round_trip(rng):
    U = random_coisometric_colligation(rng, d=1, max_block=2)
    K = debranges_kernel(U, random_disk_points(rng, 4), "disk")
    K2 = jsonio.decode_kernel_sample(through_text(jsonio.encode_kernel_sample(K)))
    assert np.array_equal(K2.blocks, K.blocks) and K2.points == K.points


def test_kernel_sample_errors():
    doc = {"setting": "disk", "points": [0, 0.5], "block_dim": 1, "blocks": [[[[1]], [[1]]], [[[1]]]]}
    with pytest.raises(jsonio.SchemaError, match=r"\$\.blocks\[1\]: expected 2 blocks"):
        jsonio.decode_kernel_sample(doc)
    doc["setting"] = "torus"
    with pytest.raises(jsonio.SchemaError, match="unknown setting"):
        jsonio.decode_kernel_sample(doc)


def test_cp_kernel_round_trip():
    K = CPKernelSample.from_function(lambda p, q, a: a, [0], 2, 2)
    K2 = jsonio.decode_cp_kernel_sample(through_text(jsonio.encode_cp_kernel_sample(K)))
    assert np.array_equal(K2.choi_blocks, K.choi_blocks) and K2.points == K.points


def test_cp_kernel_wrong_size():
    doc = {"points": [0], "alg_dim": 2, "rep_dim": 1, "choi_blocks": [[1]]}
    with pytest.raises(jsonio.SchemaError, match=r"^\$: choi_blocks must be"):
        jsonio.decode_cp_kernel_sample(doc)


@given(seeds)
def test_series_round_trip(seed):
    rng = np.random.default_rng(seed)
    S = random_nc_series(rng, 2, 3, rows=2, cols=1)
    S2 = jsonio.decode_series(through_text(jsonio.encode_series(S)))
    assert S2.max_deviation(S) == 0 and not S2.commutative


def test_series_rejects_bad_letters():
    with pytest.raises(jsonio.SchemaError):
        jsonio.decode_series({"d": 2, "terms": [{"word": [3], "coeff": [[1]]}]})
    with pytest.raises(jsonio.SchemaError, match=r"\$\.terms\[0\]\.word"):
        jsonio.decode_series({"d": 2, "terms": [{"word": "12", "coeff": [[1]]}]})


def test_operator_tuple_round_trip(rng):
    T = OperatorTuple((0.3 * np.eye(2), matrix_unit(2, 0, 1) * 0.2), commuting=False)
    T2 = jsonio.decode_operator_tuple(through_text(jsonio.encode_operator_tuple(T)))
    assert all(np.array_equal(a, b) for a, b in zip(T.blocks, T2.blocks))


@given(seeds, st.booleans())
def test_tv_system_round_trip(seed, conservative):
    rng = np.random.default_rng(seed)
    sys = random_tv_system(rng, int(rng.integers(1, 6)), conservative=conservative)
    sys2 = jsonio.decode_tv_system(through_text(jsonio.encode_tv_system(sys)))
    assert sys2.state_dims == sys.state_dims and sys2.conservative == sys.conservative
    assert all(np.array_equal(a, b) for a, b in zip(sys.U_seq, sys2.U_seq))


def test_window_rejects_upper_entries():
    assert jsonio.decode_window([[1, 0], [0.5, 1]]).L == 2
    with pytest.raises(jsonio.SchemaError, match=r"T\[0\]\[1\]"):
        jsonio.decode_window([[1, 0.1], [0, 1]])


def test_dumps_is_canonical():
    a = jsonio.dumps({"b": 1, "a": [1.5, 2]})
    assert a == jsonio.dumps({"a": [1.5, 2], "b": 1}) and a.endswith("\n")


def test_window_type():
    assert isinstance(jsonio.decode_window([[0.5]]), LowerTriWindow)


def test_formal_series_type():
    S = jsonio.decode_series({"d": 1, "commutative": True, "terms": [{"word": [], "coeff": [[0.5]]}]})
    assert isinstance(S, FormalSeries) and S.commutative


def test_kernel_sample_type():
    K = jsonio.decode_kernel_sample({"setting": "abstract", "points": ["a"], "block_dim": 1, "blocks": [[[[2]]]]})
    assert isinstance(K, KernelSample) and K.points == ("a",)
