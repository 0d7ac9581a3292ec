"""Seeded random instances for experiments and property tests."""
from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .freeseries import FormalSeries, words_upto
from .funccalc import OperatorTuple
from .realization import Colligation
from .tvsystems import LowerTriWindow, TVSystem


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def haar_unitary(size: int, rng) -> np.ndarray:
    if size == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(size, random_state=rng)


def random_coisometric_colligation(rng, d: int = 1, n: int | None = None, q: int | None = None,
                                   max_state: int = 6, max_block: int = 3) -> Colligation:
    """Rows of a Haar unitary of size ``d n + q + extra``.

    For ``d = 1`` the colligation is square (``p = q``). For ``d > 1`` the input
    dimension is ``(d - 1) n + q``, the smallest size that admits a coisometry
    with an ``n``-dimensional state.
    """
    rng = rng_from(rng)
    n = int(rng.integers(1, max_state + 1)) if n is None else n
    q = int(rng.integers(1, max_block + 1)) if q is None else q
    p = q if d == 1 else (d - 1) * n + q
    W = haar_unitary(n + p, rng)
    return Colligation.from_matrix(W[: d * n + q], d, n, p, "coisometric")


def random_disk_points(rng, count: int, radius: float = 0.95) -> list:
    rng = rng_from(rng)
    r = radius * np.sqrt(rng.random(count))
    return list(r * np.exp(2j * np.pi * rng.random(count)))


def random_ball_points(rng, count: int, d: int, radius: float = 0.95) -> list:
    rng = rng_from(rng)
    out = []
    for _ in range(count):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        out.append(v * radius * rng.random() ** (1 / (2 * d)))
    return out


def random_matrix(rng, rows: int, cols: int) -> np.ndarray:
    rng = rng_from(rng)
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_strict_contraction(rng, k: int, norm: float = 0.9) -> np.ndarray:
    M = random_matrix(rng, k, k)
    return norm * M / np.linalg.norm(M, 2)


def random_row_contraction(rng, d: int, k: int, norm: float = 0.9) -> OperatorTuple:
    """Free tuple with ``|[T_1 ... T_d]| = norm``."""
    row = random_matrix(rng, k, d * k)
    row *= norm / np.linalg.norm(row, 2)
    return OperatorTuple(tuple(row[:, j * k:(j + 1) * k] for j in range(d)))


def random_commuting_row_contraction(rng, d: int, k: int, norm: float = 0.9) -> OperatorTuple:
    """Simultaneously diagonalizable tuple ``T_j = V diag(lambda_j) V^*``.

    Each joint eigenvalue lies in the ball of radius ``norm``, so with a
    unitary ``V`` the row norm is at most ``norm``.
    """
    rng = rng_from(rng)
    lam = np.array(random_ball_points(rng, k, d, norm))
    V = haar_unitary(k, rng)
    return OperatorTuple(tuple(V @ np.diag(lam[:, j]) @ V.conj().T for j in range(d)), commuting=True)


def random_contraction_window(rng, L: int, norm: float = 0.95) -> LowerTriWindow:
    T = np.tril(random_matrix(rng, L, L))
    return LowerTriWindow(norm * T / np.linalg.norm(T, 2))


def random_tv_system(rng, L: int, max_state: int = 3, conservative: bool = False) -> TVSystem:
    rng = rng_from(rng)
    if conservative:
        n = int(rng.integers(0, max_state + 1))
        return TVSystem(L, (n,) * (L + 1), tuple(haar_unitary(n + 1, rng) for _ in range(L)), True)
    dims = tuple(int(x) for x in rng.integers(0, max_state + 1, size=L + 1))
    U_seq = tuple(random_matrix(rng, dims[k + 1] + 1, dims[k] + 1) for k in range(L))
    return TVSystem(L, dims, U_seq, False)


def random_nc_series(rng, d: int, degree: int, rows: int = 1, cols: int = 1, scale: float = 1.0) -> FormalSeries:
    rng = rng_from(rng)
    return FormalSeries(d, rows, cols, {w: scale * random_matrix(rng, rows, cols) for w in words_upto(d, degree)})
