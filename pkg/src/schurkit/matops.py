"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` complex arrays. Everything here is a pure
function; nothing is cached or mutated in place.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

DEFAULT_TOL = 1e-9
HERMITIAN_RTOL = 1e-12


class ValidationError(ValueError):
    """Input fails a structural precondition (shape, symmetry, finiteness)."""


class NotPositiveError(ValueError):
    """A matrix expected to be positive semidefinite is indefinite."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class GramMismatchError(ValueError):
    """Domain and range vectors do not have matching Gram matrices."""

    def __init__(self, message: str, deviation: float):
        super().__init__(message)
        self.deviation = deviation


class DefectPaddingRequired(ValueError):
    """The requested completion needs extra dimensions that were not granted."""

    def __init__(self, message: str, rows: int, cols: int):
        super().__init__(message)
        self.rows = rows
        self.cols = cols


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-d complex array, rejecting NaN/Inf."""
    A = np.asarray(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError(f"{name} has non-finite entries")
    return A


def hermitian_deviation(M: np.ndarray) -> float:
    """Max |M - M*| relative to max(1, max |M|)."""
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    return float(np.max(np.abs(M - M.conj().T))) / scale if M.size else 0.0


def _require_hermitian(M, name="matrix") -> np.ndarray:
    A = as_matrix(M, name)
    if A.shape[0] != A.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {A.shape}")
    dev = hermitian_deviation(A)
    if dev > HERMITIAN_RTOL:
        raise ValidationError(
            f"{name} is not Hermitian: relative |M - M*| = {dev:.3e} exceeds {HERMITIAN_RTOL:g}"
        )
    return (A + A.conj().T) / 2


@dataclass(frozen=True)
class PsdReport:
    is_psd: bool
    min_eigenvalue: float
    tolerance_used: float

    def __bool__(self) -> bool:
        return self.is_psd


def psd_check(M, tol: float = DEFAULT_TOL) -> PsdReport:
    """Certify positive semidefiniteness of a Hermitian matrix.

    ``M`` passes when every eigenvalue is at least ``-tol * max(1, lambda_max)``.
    The absolute threshold actually applied is returned as ``tolerance_used``.
    """
    A = _require_hermitian(M)
    if A.shape[0] == 0:
        return PsdReport(True, 0.0, tol)
    w = np.linalg.eigvalsh(A)
    threshold = tol * max(1.0, float(w[-1]))
    lo = float(w[0])
    return PsdReport(lo >= -threshold, lo, threshold)


def psd_factor(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return ``H`` with ``M = H H*`` and minimal numerical rank.

    Eigenvalues at or below ``tol * lambda_max`` are discarded, so the number of
    columns of ``H`` is the numerical rank of ``M``. Raises
    :class:`NotPositiveError` if ``M`` fails :func:`psd_check`.
    """
    A = _require_hermitian(M)
    n = A.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    w, Q = np.linalg.eigh(A)
    threshold = tol * max(1.0, float(w[-1]))
    if w[0] < -threshold:
        raise NotPositiveError(
            f"matrix is indefinite: min eigenvalue {w[0]:.3e} < -{threshold:.3e}", float(w[0])
        )
    # eigh returns ascending order; flip so columns come largest first
    w, Q = w[::-1], Q[:, ::-1]
    keep = w > tol * max(float(w[0]), 0.0)
    if w[0] <= 0:
        keep[:] = False
    return Q[:, keep] * np.sqrt(w[keep])


def numerical_rank(M, tol: float = DEFAULT_TOL) -> int:
    """Rank using the same threshold rule as :func:`psd_factor` (singular values)."""
    A = as_matrix(M)
    if A.size == 0:
        return 0
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > tol * s[0])) if s[0] > 0 else 0


def orth_range(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the numerical range of ``M`` (columns)."""
    A = as_matrix(M)
    if A.size == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s[0] == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    return U[:, s > tol * s[0]]


def orth_complement(Q: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the columns of ``Q``."""
    n, r = Q.shape
    if r == 0:
        return np.eye(n, dtype=complex)
    if r >= n:
        return np.zeros((n, 0), dtype=complex)
    U, _, _ = np.linalg.svd(Q, full_matrices=True)
    return U[:, r:]


def polar_unitary(M: np.ndarray) -> np.ndarray:
    """Closest matrix with orthonormal columns (unitary factor of the polar decomposition)."""
    if M.size == 0:
        return M.astype(complex)
    U, _, Vh = np.linalg.svd(M, full_matrices=False)
    return U @ Vh


class IsometrySolution(NamedTuple):
    V: np.ndarray
    residual: float
    domain_basis: np.ndarray
    range_basis: np.ndarray
    gram_deviation: float
    rank: int


def solve_isometry(domain_vecs, range_vecs, tol: float = DEFAULT_TOL, rank_tol: float = 1e-12) -> IsometrySolution:
    """Find the partial isometry sending each domain column to its range column.

    The Gram matrices of the two column families must agree within
    ``tol * max(1, max|Gram|)``. The domain span is orthonormalized by an SVD
    (singular values above ``rank_tol * sigma_max`` are kept), the matching
    range frame is aligned to it and snapped to orthonormal columns. ``V``
    acts as zero off the domain span.
    """
    Dm = as_matrix(domain_vecs, "domain_vecs")
    Rm = as_matrix(range_vecs, "range_vecs")
    if Dm.shape[1] != Rm.shape[1]:
        raise ValidationError(
            f"domain and range need the same number of columns ({Dm.shape[1]} vs {Rm.shape[1]})"
        )
    a, b = Dm.shape[0], Rm.shape[0]
    Gd = Dm.conj().T @ Dm
    Gr = Rm.conj().T @ Rm
    scale = max(1.0, float(np.max(np.abs(Gd))) if Gd.size else 1.0)
    dev = float(np.max(np.abs(Gd - Gr))) if Gd.size else 0.0
    if dev > tol * scale:
        raise GramMismatchError(
            f"Gram matrices differ by {dev:.3e} (allowed {tol * scale:.3e}); "
            "no isometry maps the domain vectors onto the range vectors",
            dev,
        )
    if Dm.size == 0 or not np.any(Dm):
        empty = np.zeros((b, a), dtype=complex)
        return IsometrySolution(empty, 0.0, np.zeros((a, 0), complex), np.zeros((b, 0), complex), dev, 0)
    U, s, Vh = np.linalg.svd(Dm, full_matrices=False)
    keep = s > rank_tol * s[0]
    Ed = U[:, keep]
    Er = polar_unitary(Rm @ Vh[keep].conj().T / s[keep])
    V = Er @ Ed.conj().T
    residual = float(np.max(np.linalg.norm(V @ Dm - Rm, axis=0)))
    return IsometrySolution(V, residual, Ed, Er, dev, int(keep.sum()))


class Completion(NamedTuple):
    U: np.ndarray
    pad_rows: int
    pad_cols: int


def complete_to_unitary(
    V,
    domain_basis=None,
    mode: str = "coisometric",
    pad: bool = True,
) -> Completion:
    """Extend a partial isometry to a coisometry or a unitary.

    ``V`` is ``b x a`` and isometric on the span of the orthonormal columns of
    ``domain_basis`` (all of ``C^a`` when omitted). The extension maps the
    orthogonal complement of that span onto the complement of its image.

    ``mode="coisometric"`` returns ``U`` (``b x a``) with ``U U* = I``; this needs
    ``a >= b``. ``mode="unitary"`` additionally asks ``U* U = I``; when
    ``a != b`` the smaller side is padded with fresh dimensions (appended last)
    if ``pad`` is true. Any impossible request raises
    :class:`DefectPaddingRequired`.
    """
    Vm = as_matrix(V, "V")
    b, a = Vm.shape
    Qd = np.eye(a, dtype=complex) if domain_basis is None else as_matrix(domain_basis, "domain_basis")
    if Qd.shape[0] != a:
        raise ValidationError(f"domain_basis has {Qd.shape[0]} rows, V has {a} columns")
    r = Qd.shape[1]
    if r:
        ortho = np.linalg.norm(Qd.conj().T @ Qd - np.eye(r))
        if ortho > 1e-10:
            raise ValidationError(f"domain_basis is not orthonormal (deviation {ortho:.3e})")
    Qr = Vm @ Qd
    iso = np.linalg.norm(Qr.conj().T @ Qr - np.eye(r)) if r else 0.0
    if iso > 1e-10:
        raise ValidationError(f"V is not isometric on its domain (deviation {iso:.3e})")
    if mode not in ("coisometric", "unitary"):
        raise ValidationError(f"unknown completion mode {mode!r}")

    pad_rows = pad_cols = 0
    if mode == "coisometric" and a < b:
        raise DefectPaddingRequired(
            f"a coisometry C^{a} -> C^{b} does not exist; {b - a} input dimensions are missing",
            0,
            b - a,
        )
    if mode == "unitary" and a != b:
        if not pad:
            raise DefectPaddingRequired(
                f"unitary completion of a {b}x{a} map needs defect padding", max(a - b, 0), max(b - a, 0)
            )
        pad_rows, pad_cols = max(a - b, 0), max(b - a, 0)
        Vm = np.pad(Vm, ((0, pad_rows), (0, pad_cols)))
        Qd = np.pad(Qd, ((0, pad_cols), (0, 0)))
        Qr = np.pad(Qr, ((0, pad_rows), (0, 0)))
        b, a = Vm.shape

    Pd = orth_complement(Qd)
    Pr = orth_complement(Qr)
    m = Pr.shape[1]
    # map the first m complement directions of the domain onto the range complement
    U = Qr @ Qd.conj().T + Pr @ Pd[:, :m].conj().T
    return Completion(U, pad_rows, pad_cols)


def coisometry_defect(U: np.ndarray) -> float:
    """Frobenius norm of ``U U* - I``."""
    return float(np.linalg.norm(U @ U.conj().T - np.eye(U.shape[0])))


def isometry_defect(U: np.ndarray) -> float:
    """Frobenius norm of ``U* U - I``."""
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[1])))


def op_norm(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


class RankDecision(NamedTuple):
    rank: int
    smallest_kept: float
    largest_dropped: float


def rank_decision(M, tol: float = DEFAULT_TOL) -> RankDecision:
    """Describe the eigenvalue cut :func:`psd_factor` makes, relative to ``lambda_max``."""
    A = _require_hermitian(M)
    if A.shape[0] == 0:
        return RankDecision(0, 0.0, 0.0)
    w = np.linalg.eigvalsh(A)[::-1]
    top = float(w[0])
    if top <= 0:
        return RankDecision(0, 0.0, 0.0)
    rel = w / top
    keep = rel > tol
    kept, dropped = rel[keep], rel[~keep]
    return RankDecision(
        int(keep.sum()),
        float(kept.min()) if kept.size else 0.0,
        float(dropped.max()) if dropped.size else 0.0,
    )
