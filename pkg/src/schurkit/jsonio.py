"""JSON encodings of the library's data types.

Complex numbers are written as ``[re, im]``; a bare JSON number is accepted
as a real value on input. Matrices are lists of rows. Schema violations raise
:class:`SchemaError` with the path of the offending field.
"""
from __future__ import annotations

import json
from typing import Any

import numpy as np

from .freeseries import FormalSeries
from .funccalc import OperatorTuple
from .kernels import CPKernelSample, KernelSample
from .realization import Colligation
from .tvsystems import LowerTriWindow, TVSystem


class SchemaError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _field(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing field")
    return obj[key]


def decode_complex(x, path: str) -> complex:
    if isinstance(x, bool):
        raise SchemaError(path, "expected a number or [re, im]")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise SchemaError(path, "expected a number or [re, im]")


def encode_complex(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def decode_matrix(x, path: str) -> np.ndarray:
    if not isinstance(x, list) or not all(isinstance(row, list) for row in x):
        raise SchemaError(path, "expected a list of rows")
    if not x:
        return np.zeros((0, 0), dtype=complex)
    width = len(x[0])
    for i, row in enumerate(x):
        if len(row) != width:
            raise SchemaError(f"{path}[{i}]", f"row has {len(row)} entries, expected {width}")
    return np.array([[decode_complex(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)] for i, row in enumerate(x)],
                    dtype=complex).reshape(len(x), width)


def encode_matrix(M) -> list:
    M = np.asarray(M, dtype=complex)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    return [[encode_complex(v) for v in row] for row in M]


def decode_point(x, path: str, setting: str):
    if setting == "disk":
        return decode_complex(x, path)
    if not isinstance(x, list) or not x:
        raise SchemaError(path, "expected a nonempty list of coordinates")
    return np.array([decode_complex(v, f"{path}[{i}]") for i, v in enumerate(x)], dtype=complex)


def encode_point(z) -> Any:
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        return encode_complex(z)
    return [encode_complex(v) for v in z]


def decode_points(x, path: str, setting: str) -> list:
    if not isinstance(x, list):
        raise SchemaError(path, "expected a list of points")
    return [decode_point(v, f"{path}[{i}]", setting) for i, v in enumerate(x)]


def _wrap(path: str, fn, *args):
    try:
        return fn(*args)
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


# kernels

def decode_kernel_sample(obj: dict, path: str = "$") -> KernelSample:
    """``{setting, points, block_dim, blocks}``; ``blocks[i][j]`` is the ``block_dim``-square value ``K(w_i, w_j)``."""
    setting = _field(obj, "setting", path)
    if setting not in ("disk", "ball", "abstract"):
        raise SchemaError(f"{path}.setting", f"unknown setting {setting!r}")
    pts = _field(obj, "points", path)
    points = pts if setting == "abstract" else decode_points(pts, f"{path}.points", setting)
    q = _field(obj, "block_dim", path)
    if not isinstance(q, int) or q < 1:
        raise SchemaError(f"{path}.block_dim", "expected a positive integer")
    raw = _field(obj, "blocks", path)
    N = len(points)
    if not isinstance(raw, list) or len(raw) != N:
        raise SchemaError(f"{path}.blocks", f"expected {N} rows of blocks")
    blocks = np.zeros((N, N, q, q), dtype=complex)
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != N:
            raise SchemaError(f"{path}.blocks[{i}]", f"expected {N} blocks")
        for j, b in enumerate(row):
            M = decode_matrix(b, f"{path}.blocks[{i}][{j}]")
            if M.shape != (q, q):
                raise SchemaError(f"{path}.blocks[{i}][{j}]", f"expected a {q}x{q} block, got {M.shape}")
            blocks[i, j] = M
    return _wrap(path, KernelSample, tuple(points), blocks, setting)


def encode_kernel_sample(K: KernelSample) -> dict:
    N = K.n_points
    points = list(K.points) if K.setting == "abstract" else [encode_point(z) for z in K.points]
    return {
        "setting": K.setting,
        "points": points,
        "block_dim": K.block_dim,
        "blocks": [[encode_matrix(K.blocks[i, j]) for j in range(N)] for i in range(N)],
    }


def decode_cp_kernel_sample(obj: dict, path: str = "$") -> CPKernelSample:
    """``{points, alg_dim, rep_dim, choi_blocks}`` with the full block matrix as one matrix."""
    points = _field(obj, "points", path)
    if not isinstance(points, list):
        raise SchemaError(f"{path}.points", "expected a list")
    k = _field(obj, "alg_dim", path)
    m = _field(obj, "rep_dim", path)
    for name, v in (("alg_dim", k), ("rep_dim", m)):
        if not isinstance(v, int) or v < 1:
            raise SchemaError(f"{path}.{name}", "expected a positive integer")
    G = decode_matrix(_field(obj, "choi_blocks", path), f"{path}.choi_blocks")
    return _wrap(path, CPKernelSample, tuple(_hashable(p) for p in points), k, m, G)


def _hashable(p):
    return tuple(_hashable(v) for v in p) if isinstance(p, list) else p


def encode_cp_kernel_sample(K: CPKernelSample) -> dict:
    return {
        "points": [list(p) if isinstance(p, tuple) else p for p in K.points],
        "alg_dim": K.alg_dim,
        "rep_dim": K.rep_dim,
        "choi_blocks": encode_matrix(K.choi_blocks),
    }


# series and colligations

def decode_series(obj: dict, path: str = "$") -> FormalSeries:
    """``{d, commutative, terms: [{word, coeff}]}``; letters run from 1 to d."""
    d = _field(obj, "d", path)
    if not isinstance(d, int) or d < 1:
        raise SchemaError(f"{path}.d", "expected a positive integer")
    commutative = obj.get("commutative", False)
    if not isinstance(commutative, bool):
        raise SchemaError(f"{path}.commutative", "expected a boolean")
    terms = _field(obj, "terms", path)
    if not isinstance(terms, list) or not terms:
        raise SchemaError(f"{path}.terms", "expected a nonempty list")
    decoded = []
    for i, t in enumerate(terms):
        w = _field(t, "word", f"{path}.terms[{i}]")
        if not isinstance(w, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in w):
            raise SchemaError(f"{path}.terms[{i}].word", "expected a list of integer letters")
        decoded.append((tuple(w), decode_matrix(_field(t, "coeff", f"{path}.terms[{i}]"), f"{path}.terms[{i}].coeff")))
    rows, cols = decoded[0][1].shape
    merged: dict = {}
    for w, c in decoded:
        merged[w] = merged[w] + c if w in merged and merged[w].shape == c.shape else c
    return _wrap(path, FormalSeries, d, rows, cols, merged, commutative)


def encode_series(S: FormalSeries) -> dict:
    words = sorted(S.terms, key=lambda w: (len(w), w))
    return {
        "d": S.d,
        "commutative": S.commutative,
        "terms": [{"word": list(w), "coeff": encode_matrix(S.terms[w])} for w in words],
    }


def decode_colligation(obj: dict, path: str = "$") -> Colligation:
    """``{d, n, p, q, A, B, C, D, flavor}``; ``A`` is ``(d n) x n`` and ``B`` is ``(d n) x p``."""
    dims = {}
    for key in ("d", "n", "p", "q"):
        v = _field(obj, key, path)
        if not isinstance(v, int) or isinstance(v, bool) or v < (1 if key == "d" else 0):
            raise SchemaError(f"{path}.{key}", "expected a nonnegative integer" if key != "d" else "expected a positive integer")
        dims[key] = v
    d, n, p, q = dims["d"], dims["n"], dims["p"], dims["q"]
    shapes = {"A": (d * n, n), "B": (d * n, p), "C": (q, n), "D": (q, p)}
    mats = {}
    for key, shape in shapes.items():
        raw = _field(obj, key, path)
        M = decode_matrix(raw, f"{path}.{key}")
        if M.size == 0:
            M = np.zeros(shape, dtype=complex)
        if M.shape != shape:
            raise SchemaError(f"{path}.{key}", f"expected shape {shape}, got {M.shape}")
        mats[key] = M
    flavor = obj.get("flavor", "contractive")
    return _wrap(path, Colligation, mats["A"], mats["B"], mats["C"], mats["D"], d, flavor)


def encode_colligation(U: Colligation) -> dict:
    return {
        "d": U.d, "n": U.n, "p": U.p, "q": U.q,
        "A": encode_matrix(U.A), "B": encode_matrix(U.B),
        "C": encode_matrix(U.C), "D": encode_matrix(U.D),
        "flavor": U.flavor,
    }


# operator arguments

def decode_operator_tuple(obj: dict, path: str = "$") -> OperatorTuple:
    """``{blocks: [T_1, ..., T_d], commuting}``."""
    blocks = _field(obj, "blocks", path)
    if not isinstance(blocks, list) or not blocks:
        raise SchemaError(f"{path}.blocks", "expected a nonempty list of matrices")
    mats = tuple(decode_matrix(b, f"{path}.blocks[{i}]") for i, b in enumerate(blocks))
    commuting = obj.get("commuting", False)
    if not isinstance(commuting, bool):
        raise SchemaError(f"{path}.commuting", "expected a boolean")
    return _wrap(path, OperatorTuple, mats, commuting)


def encode_operator_tuple(T: OperatorTuple) -> dict:
    return {"blocks": [encode_matrix(B) for B in T.blocks], "commuting": T.commuting}


# time-varying

def decode_window(x, path: str = "$") -> LowerTriWindow:
    return _wrap(path, LowerTriWindow, decode_matrix(x, path))


def encode_window(T: LowerTriWindow) -> list:
    return encode_matrix(T.T)


def decode_tv_system(obj: dict, path: str = "$") -> TVSystem:
    L = _field(obj, "L", path)
    if not isinstance(L, int) or L < 1:
        raise SchemaError(f"{path}.L", "expected a positive integer")
    dims = _field(obj, "state_dims", path)
    if not isinstance(dims, list) or not all(isinstance(v, int) for v in dims):
        raise SchemaError(f"{path}.state_dims", "expected a list of integers")
    seq = _field(obj, "U_seq", path)
    if not isinstance(seq, list):
        raise SchemaError(f"{path}.U_seq", "expected a list of matrices")
    mats = tuple(decode_matrix(U, f"{path}.U_seq[{k}]") for k, U in enumerate(seq))
    return _wrap(path, TVSystem, L, tuple(dims), mats, bool(obj.get("conservative", False)))


def encode_tv_system(sys: TVSystem) -> dict:
    return {
        "L": sys.L,
        "state_dims": list(sys.state_dims),
        "U_seq": [encode_matrix(U) for U in sys.U_seq],
        "conservative": sys.conservative,
    }


def dumps(obj) -> str:
    """Canonical text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=1, separators=(",", ": ")) + "\n"
