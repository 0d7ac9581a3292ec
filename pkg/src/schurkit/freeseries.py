"""Formal power series over the free semigroup and truncated Fock spaces.

A word is a tuple of letters from ``1..d``; ``()`` is the empty word. The
monomial of ``(i1, ..., iN)`` is ``z_{i1} ... z_{iN}`` and operator powers are
composed in the same left-to-right order. Commutative series (the ball
setting) store one sorted word per multi-index.

Truncated Fock spaces use the graded lexicographic basis: all words of
length 0, then length 1, ..., each level in ascending letter order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Iterable, Mapping

import numpy as np

from .kernels import KernelSample
from .matops import ValidationError, as_matrix

Word = tuple


def check_word(word: Iterable[int], d: int) -> Word:
    w = tuple(int(x) for x in word)
    for x in w:
        if not 1 <= x <= d:
            raise ValidationError(f"letter {x} outside alphabet 1..{d}")
    return w


def word_transpose(word: Word) -> Word:
    return tuple(reversed(word))


@lru_cache(maxsize=None)
def words_upto(d: int, N: int) -> tuple:
    """All words of length at most ``N`` in graded lexicographic order."""
    out = []
    for n in range(N + 1):
        out.extend(itertools.product(range(1, d + 1), repeat=n))
    return tuple(out)


@lru_cache(maxsize=None)
def word_index(d: int, N: int) -> dict:
    return {w: i for i, w in enumerate(words_upto(d, N))}


def fock_dim(d: int, N: int) -> int:
    """``sum_{n <= N} d^n``."""
    return sum(d ** n for n in range(N + 1))


def multi_index(word: Word, d: int) -> tuple:
    n = [0] * d
    for x in word:
        n[x - 1] += 1
    return tuple(n)


def word_of_multi_index(n: Iterable[int]) -> Word:
    out = []
    for j, c in enumerate(n, start=1):
        out.extend([j] * int(c))
    return tuple(out)


@dataclass(frozen=True)
class FormalSeries:
    """Finitely supported ``S = sum_alpha s_alpha z^alpha`` with matrix coefficients."""

    d: int
    coeff_rows: int
    coeff_cols: int
    terms: Mapping = field(default_factory=dict)
    commutative: bool = False

    def __post_init__(self):
        if self.d < 1:
            raise ValidationError(f"alphabet size must be positive, got {self.d}")
        clean = {}
        for word, c in self.terms.items():
            w = check_word(word, self.d)
            if self.commutative:
                w = tuple(sorted(w))
            c = as_matrix(c, f"coefficient of {w}")
            if c.shape != (self.coeff_rows, self.coeff_cols):
                raise ValidationError(
                    f"coefficient of {w} has shape {c.shape}, expected {(self.coeff_rows, self.coeff_cols)}"
                )
            clean[w] = clean[w] + c if w in clean else c
        object.__setattr__(self, "terms", clean)

    @classmethod
    def constant(cls, c, d: int = 1, commutative: bool = False) -> "FormalSeries":
        c = as_matrix(c)
        return cls(d, c.shape[0], c.shape[1], {(): c}, commutative)

    @classmethod
    def monomial(cls, word, c=1.0, d: int | None = None, commutative: bool = False) -> "FormalSeries":
        c = as_matrix(c)
        word = tuple(word)
        d = d if d is not None else max(word, default=1)
        return cls(d, c.shape[0], c.shape[1], {word: c}, commutative)

    @property
    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def coeff(self, word) -> np.ndarray:
        w = tuple(word)
        if self.commutative:
            w = tuple(sorted(w))
        return self.terms.get(w, np.zeros((self.coeff_rows, self.coeff_cols), dtype=complex))

    def truncate(self, N: int) -> "FormalSeries":
        return FormalSeries(
            self.d, self.coeff_rows, self.coeff_cols,
            {w: c for w, c in self.terms.items() if len(w) <= N}, self.commutative,
        )

    def coeff_norm(self) -> float:
        """Largest coefficient operator norm."""
        return max((float(np.linalg.norm(c, 2)) for c in self.terms.values()), default=0.0)

    def max_deviation(self, other: "FormalSeries", upto: int | None = None) -> float:
        words = set(self.terms) | set(other.terms)
        if upto is not None:
            words = {w for w in words if len(w) <= upto}
        return max((float(np.max(np.abs(self.coeff(w) - other.coeff(w)))) for w in words), default=0.0)

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        _check_compatible(self, other, same_shape=True)
        terms = dict(self.terms)
        for w, c in other.terms.items():
            terms[w] = terms[w] + c if w in terms else c
        return FormalSeries(self.d, self.coeff_rows, self.coeff_cols, terms, self.commutative)

    def __mul__(self, other: "FormalSeries") -> "FormalSeries":
        return series_multiply(self, other)


def _check_compatible(S: FormalSeries, f: FormalSeries, same_shape: bool = False):
    if S.d != f.d:
        raise ValidationError(f"alphabet sizes differ ({S.d} vs {f.d})")
    if S.commutative != f.commutative:
        raise ValidationError("cannot mix commutative and noncommutative series")
    if same_shape and (S.coeff_rows, S.coeff_cols) != (f.coeff_rows, f.coeff_cols):
        raise ValidationError("coefficient shapes differ")


def series_multiply(S: FormalSeries, f: FormalSeries) -> FormalSeries:
    """Convolution product: the coefficient of ``z^v`` is ``sum_{alpha beta = v} s_alpha f_beta``."""
    _check_compatible(S, f)
    if S.coeff_cols != f.coeff_rows:
        raise ValidationError(
            f"inner coefficient dimensions differ ({S.coeff_cols} vs {f.coeff_rows})"
        )
    terms: dict = {}
    for a, sa in S.terms.items():
        for b, fb in f.terms.items():
            v = a + b
            if S.commutative:
                v = tuple(sorted(v))
            prod = sa @ fb
            terms[v] = terms[v] + prod if v in terms else prod
    return FormalSeries(S.d, S.coeff_rows, f.coeff_cols, terms, S.commutative)


def nc_szego_coeff(alpha: Word, beta: Word) -> int:
    """Coefficient of ``z^alpha w^{beta^T}`` in the noncommutative Szego kernel."""
    return 1 if tuple(alpha) == tuple(beta) else 0


@dataclass(frozen=True)
class FockVector:
    """Element of the Fock space truncated at degree ``N``, coefficients in ``C^block_dim``."""

    d: int
    N: int
    block_dim: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        expected = self.block_dim * fock_dim(self.d, self.N)
        if c.size != expected:
            raise ValidationError(f"Fock vector needs {expected} entries, got {c.size}")
        object.__setattr__(self, "coeffs", c)

    def coeff(self, word) -> np.ndarray:
        i = word_index(self.d, self.N)[tuple(word)]
        return self.coeffs[i * self.block_dim:(i + 1) * self.block_dim]

    @classmethod
    def from_series(cls, f: FormalSeries, N: int) -> "FockVector":
        if f.coeff_cols != 1:
            raise ValidationError("Fock vectors need column coefficients (coeff_cols == 1)")
        idx = word_index(f.d, N)
        out = np.zeros(f.coeff_rows * len(idx), dtype=complex)
        for w, c in f.terms.items():
            if len(w) <= N:
                i = idx[w]
                out[i * f.coeff_rows:(i + 1) * f.coeff_rows] = c[:, 0]
        return cls(f.d, N, f.coeff_rows, out)

    def to_series(self) -> FormalSeries:
        q = self.block_dim
        terms = {}
        for i, w in enumerate(words_upto(self.d, self.N)):
            c = self.coeffs[i * q:(i + 1) * q]
            if np.any(c):
                terms[w] = c.reshape(q, 1)
        return FormalSeries(self.d, q, 1, terms)


def fock_norm(f: FockVector) -> float:
    return float(np.linalg.norm(f.coeffs))


def da_weight(n: Iterable[int]) -> Fraction:
    """Drury-Arveson weight ``n! / |n|!`` of a multi-index, exactly."""
    n = [int(x) for x in n]
    if any(x < 0 for x in n):
        raise ValidationError(f"multi-index entries must be nonnegative, got {n}")
    num = 1
    for x in n:
        num *= factorial(x)
    return Fraction(num, factorial(sum(n)))


def da_norm(f: FormalSeries) -> float:
    """Norm in the Drury-Arveson space of a commutative series with column coefficients."""
    if not f.commutative:
        raise ValidationError("the Drury-Arveson norm applies to commutative series")
    total = 0.0
    for w, c in f.terms.items():
        total += float(da_weight(multi_index(w, f.d))) * float(np.linalg.norm(c) ** 2)
    return total ** 0.5


def shift_matrix(j: int, N: int, d: int, block_dim: int = 1) -> np.ndarray:
    """Matrix of ``f(z) -> f(z) z_j`` on the degree-``N`` truncation (words of length ``N`` are annihilated)."""
    if not 1 <= j <= d:
        raise ValidationError(f"letter {j} outside alphabet 1..{d}")
    idx = word_index(d, N)
    S = np.zeros((len(idx), len(idx)))
    for v, i in idx.items():
        if len(v) < N:
            S[idx[v + (j,)], i] = 1.0
    return np.kron(S, np.eye(block_dim))


def transpose_permutation(d: int, N: int, block_dim: int = 1) -> np.ndarray:
    """Permutation of the truncated basis sending each word to its transpose."""
    idx = word_index(d, N)
    P = np.zeros((len(idx), len(idx)))
    for v, i in idx.items():
        P[idx[word_transpose(v)], i] = 1.0
    return np.kron(P, np.eye(block_dim))


def _require_nc(S: FormalSeries, N: int):
    if S.commutative:
        raise ValidationError("operation defined for noncommutative series only")
    if S.degree > N:
        raise ValidationError(f"series has degree {S.degree} above truncation N={N}")


def mult_operator(S: FormalSeries, N: int) -> np.ndarray:
    """Matrix of ``f -> truncate_N(S f)``; block ``(v, beta)`` is ``s_alpha`` when ``v = alpha beta``."""
    _require_nc(S, N)
    idx = word_index(S.d, N)
    q, p = S.coeff_rows, S.coeff_cols
    M = np.zeros((q * len(idx), p * len(idx)), dtype=complex)
    for beta, jb in idx.items():
        for alpha, sa in S.terms.items():
            if len(alpha) + len(beta) > N:
                continue
            iv = idx[alpha + beta]
            M[iv * q:(iv + 1) * q, jb * p:(jb + 1) * p] += sa
    return M


def nc_debranges_coeffs(S: FormalSeries, N: int) -> KernelSample:
    """Coefficients ``K_{alpha, beta}`` of ``k_nc - S k_nc S*`` for ``|alpha|, |beta| <= N``.

    ``K_{alpha, beta} = delta I - sum s_{alpha'} s_{beta'}*`` over factorizations
    ``alpha = alpha' gamma``, ``beta = beta' gamma`` with a common suffix. The
    result is returned as an abstract kernel sample indexed by words.
    """
    _require_nc(S, N)
    words = words_upto(S.d, N)
    q = S.coeff_rows
    W = len(words)
    blocks = np.zeros((W, W, q, q), dtype=complex)
    zero = np.zeros((q, S.coeff_cols), dtype=complex)
    for i, a in enumerate(words):
        for j, b in enumerate(words):
            acc = np.eye(q, dtype=complex) if a == b else np.zeros((q, q), dtype=complex)
            for g in range(min(len(a), len(b)) + 1):
                if g and a[len(a) - g:] != b[len(b) - g:]:
                    break
                sa = S.terms.get(a[:len(a) - g], zero)
                sb = S.terms.get(b[:len(b) - g], zero)
                acc -= sa @ sb.conj().T
            blocks[i, j] = acc
    return KernelSample(words, blocks, "abstract")
