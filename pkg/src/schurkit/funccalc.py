"""Evaluating Schur-class functions at operator arguments.

``S(T) = sum_alpha s_alpha (x) T^alpha`` acts on ``U (x) K``; tensor products
are ``numpy.kron`` with the coefficient on the left. ``T^alpha`` composes the
tuple in the letter order of ``alpha``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .freeseries import FormalSeries, mult_operator
from .matops import ValidationError, as_matrix, op_norm
from .realization import Colligation, FLAVOR_TOL

STRICT_MARGIN = 1e-12
COMMUTE_TOL = 1e-10
TAIL_TOL = 1e-12
VN_SLACK = 1e-8
MAX_DEGREE = 20000


class StrictnessError(ValueError):
    """The operator argument is not a strict (row) contraction."""

    def __init__(self, message: str, row_norm: float):
        super().__init__(message)
        self.row_norm = row_norm


class CommutativityError(ValueError):
    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class UncertifiedError(ValueError):
    """No Schur-class certificate is available for the function."""


@dataclass(frozen=True)
class OperatorTuple:
    blocks: tuple
    commuting: bool = False

    def __post_init__(self):
        mats = tuple(as_matrix(T, f"T_{j + 1}") for j, T in enumerate(self.blocks))
        if not mats:
            raise ValidationError("operator tuple is empty")
        k = mats[0].shape[0]
        for T in mats:
            if T.shape != (k, k):
                raise ValidationError(f"tuple entries must all be {k}x{k}, got {T.shape}")
        object.__setattr__(self, "blocks", mats)

    @property
    def d(self) -> int:
        return len(self.blocks)

    @property
    def k(self) -> int:
        return self.blocks[0].shape[0]

    def power(self, word) -> np.ndarray:
        out = np.eye(self.k, dtype=complex)
        for letter in word:
            out = out @ self.blocks[letter - 1]
        return out


class RowContractionReport(NamedTuple):
    row_norm: float
    strict: bool
    commuting_residual: float


def _commuting_residual(T: OperatorTuple) -> float:
    res = 0.0
    for i in range(T.d):
        for j in range(i + 1, T.d):
            Ti, Tj = T.blocks[i], T.blocks[j]
            res = max(res, float(np.linalg.norm(Ti @ Tj - Tj @ Ti)))
    return res


def row_contraction_check(T: OperatorTuple) -> RowContractionReport:
    """Largest singular value of ``[T_1 ... T_d]``, strictness, and commutator size."""
    row = np.hstack(T.blocks)
    norm = op_norm(row)
    return RowContractionReport(norm, norm < 1 - STRICT_MARGIN, _commuting_residual(T))


def _require_strict(T: OperatorTuple, mode: str) -> RowContractionReport:
    rep = row_contraction_check(T)
    if not rep.strict:
        raise StrictnessError(
            f"argument is not a strict row contraction (row norm {rep.row_norm:.15g})", rep.row_norm
        )
    if mode == "commuting" and rep.commuting_residual > COMMUTE_TOL:
        raise CommutativityError(
            f"tuple does not commute (max |T_i T_j - T_j T_i|_F = {rep.commuting_residual:.3e})",
            rep.commuting_residual,
        )
    if mode not in ("commuting", "free"):
        raise ValidationError(f"unknown mode {mode!r}")
    return rep


def _series_sum(S: FormalSeries, T: OperatorTuple) -> np.ndarray:
    if S.d != T.d:
        raise ValidationError(f"series in {S.d} variables, tuple has {T.d} operators")
    out = np.zeros((S.coeff_rows * T.k, S.coeff_cols * T.k), dtype=complex)
    cache = {(): np.eye(T.k, dtype=complex)}
    for word in sorted(S.terms, key=len):
        if word not in cache:
            cache[word] = _power(cache, word, T)
        out += np.kron(S.terms[word], cache[word])
    return out


def _power(cache: dict, word, T: OperatorTuple) -> np.ndarray:
    prefix = word[:-1]
    if prefix not in cache:
        cache[prefix] = _power(cache, prefix, T)
    return cache[prefix] @ T.blocks[word[-1] - 1]


def _colligation_series(U: Colligation, T: OperatorTuple, row_norm: float) -> tuple[np.ndarray, int]:
    """Sum homogeneous components ``(C (x) I) Phi^{m-1} Psi`` until the tail bound is met.

    ``Phi = sum_i A_i (x) T_i`` and ``Psi = sum_j B_j (x) T_j``. Coefficients of a
    contractive colligation have norm at most 1, so the tail after degree
    ``m`` is below ``row_norm^(m+1) / (1 - row_norm)``.
    """
    k = T.k
    Ik = np.eye(k)
    out = np.kron(U.D, Ik)
    if U.n == 0:
        return out, 0
    Phi = sum(np.kron(U.A_block(i), T.blocks[i - 1]) for i in range(1, U.d + 1))
    X = sum(np.kron(U.B_block(j), T.blocks[j - 1]) for j in range(1, U.d + 1))
    CI = np.kron(U.C, Ik)
    coeff_bound = max(1.0, op_norm(U.matrix))
    m = 1
    while True:
        out = out + CI @ X
        if coeff_bound * row_norm ** (m + 1) / (1 - row_norm) < TAIL_TOL or m >= MAX_DEGREE:
            return out, m
        X = Phi @ X
        m += 1


def eval_colligation_resolvent(U: Colligation, T: OperatorTuple) -> np.ndarray:
    """Closed form ``D (x) I + (C (x) I)(I - Lambda(T)(A (x) I))^{-1} Lambda(T)(B (x) I)``."""
    k = T.k
    Ik = np.eye(k)
    if U.n == 0:
        return np.kron(U.D, Ik)
    Phi = sum(np.kron(U.A_block(i), T.blocks[i - 1]) for i in range(1, U.d + 1))
    Psi = sum(np.kron(U.B_block(j), T.blocks[j - 1]) for j in range(1, U.d + 1))
    L = np.eye(Phi.shape[0]) - Phi
    return np.kron(U.D, Ik) + np.kron(U.C, Ik) @ np.linalg.solve(L, Psi)


def eval_at_row_tuple(S, T: OperatorTuple, mode: str = "free") -> np.ndarray:
    """``S(T)`` for a finitely supported series or a colligation-backed function.

    Colligations are summed as a power series with the certified tail bound;
    use :func:`eval_colligation_resolvent` for the closed form.
    """
    rep = _require_strict(T, mode)
    if isinstance(S, Colligation):
        if S.d != T.d:
            raise ValidationError(f"colligation has d = {S.d}, tuple has {T.d} operators")
        return _colligation_series(S, T, rep.row_norm)[0]
    if mode == "free" and S.commutative:
        raise ValidationError("free evaluation needs a noncommutative series")
    return _series_sum(S, T)


def eval_at_contraction(S, T) -> np.ndarray:
    """``S(T) = sum_n S_n (x) T^n`` for one strict contraction ``T``."""
    T = T if isinstance(T, OperatorTuple) else OperatorTuple((T,))
    if T.d != 1:
        raise ValidationError("eval_at_contraction takes a single operator")
    if isinstance(S, FormalSeries) and S.d != 1:
        raise ValidationError("eval_at_contraction takes a one-variable series")
    return eval_at_row_tuple(S, T, "free")


def eval_tensored(U: Colligation, eta) -> np.ndarray:
    """``D + C (I - pi(eta) A)^{-1} pi(eta) B`` with ``pi(eta) = I (x) eta``.

    ``U`` must be a tensored colligation whose state space is ``C^{n0} (x) C^m``
    where ``m`` is the size of ``eta``.
    """
    eta = as_matrix(eta, "eta")
    m = eta.shape[0]
    if U.n % m:
        raise ValidationError(f"state dimension {U.n} is not a multiple of {m}")
    if op_norm(eta) >= 1 - STRICT_MARGIN:
        raise StrictnessError(f"argument is not a strict contraction (norm {op_norm(eta):.15g})", op_norm(eta))
    pi = np.kron(np.eye(U.n // m), eta)
    L = np.eye(U.n) - pi @ U.A
    return U.D + U.C @ np.linalg.solve(L, pi @ U.B)


def certify(S, degree: int | None = None) -> tuple[bool, str]:
    """Return ``(certified, reason)`` for the Schur-class hypothesis."""
    if isinstance(S, Colligation):
        if S.flavor in ("coisometric", "unitary"):
            return S.coisometry_defect() <= FLAVOR_TOL, f"{S.flavor} colligation"
        return op_norm(S.matrix) <= 1 + FLAVOR_TOL, "contractive colligation"
    if isinstance(S, FormalSeries):
        if S.commutative:
            nc = FormalSeries(S.d, S.coeff_rows, S.coeff_cols, _symmetrize(S), False)
        else:
            nc = S
        N = degree if degree is not None else max(nc.degree + 2, 4)
        norm = op_norm(mult_operator(nc, N))
        return norm <= 1 + FLAVOR_TOL, f"truncated multiplier norm {norm:.12g} at N={N}"
    return False, f"unsupported function type {type(S).__name__}"


def _symmetrize(S: FormalSeries) -> dict:
    """Spread each multi-index coefficient evenly over its words (the symmetric lift)."""
    terms = {}
    for w, c in S.terms.items():
        perms = set(itertools.permutations(w))
        for p in perms:
            terms[p] = c / len(perms)
    return terms


class VonNeumannResult(NamedTuple):
    norm: float
    passed: bool


def von_neumann_check(S, T: OperatorTuple, mode: str = "free", degree: int | None = None) -> VonNeumannResult:
    """``|S(T)| <= 1`` for a certified Schur-class ``S`` at a strict row contraction."""
    ok, reason = certify(S, degree)
    if not ok:
        raise UncertifiedError(f"function is not certified Schur class ({reason})")
    val = eval_at_row_tuple(S, T, mode)
    norm = op_norm(val)
    return VonNeumannResult(norm, norm <= 1 + VN_SLACK)
