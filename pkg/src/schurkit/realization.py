"""Colligations, their transfer functions, and lurking-isometry synthesis.

A colligation ``U = [A B; C D]`` maps ``X + U_in`` to ``X^d + Y`` with
``A`` and ``B`` stacked as ``d`` blocks. Its transfer function is

    S(z) = D + C (I - Z(z) A)^{-1} Z(z) B,   Z(z) = [z_1 I ... z_d I],

read as a function on the disk (``d = 1``), on the ball, or as a formal
series in noncommuting variables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import freeseries as fs
from .kernels import DomainError, KernelSample, debranges_kernel, kolmogorov, positivity_check
from .matops import (
    DEFAULT_TOL,
    DefectPaddingRequired,
    GramMismatchError,
    RankDecision,
    ValidationError,
    as_matrix,
    coisometry_defect,
    complete_to_unitary,
    isometry_defect,
    op_norm,
    rank_decision,
    solve_isometry,
)

FLAVOR_TOL = 1e-9
FLAVORS = ("contractive", "coisometric", "unitary")


class ResolventError(ArithmeticError):
    """``I - Z(z) A`` is numerically singular at the requested point."""

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition


class NotSchurError(ValueError):
    """Sample data violates the kernel positivity every Schur-class function satisfies."""

    def __init__(self, message: str, deviation: float):
        super().__init__(message)
        self.deviation = deviation


@dataclass(frozen=True)
class Colligation:
    """System matrix ``[A B; C D]`` with ``A`` of shape ``(d n, n)`` and ``B`` of shape ``(d n, p)``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    d: int = 1
    flavor: str = "coisometric"

    def __post_init__(self):
        D = as_matrix(self.D, "D")
        q, p = D.shape
        A = np.asarray(self.A, dtype=complex)
        B = np.asarray(self.B, dtype=complex)
        C = np.asarray(self.C, dtype=complex)
        n = A.shape[1] if A.ndim == 2 else 0
        A = A.reshape(self.d * n, n)
        B = B.reshape(self.d * n, p)
        C = C.reshape(q, n)
        for name, M in (("A", A), ("B", B), ("C", C)):
            if not np.all(np.isfinite(M)):
                raise ValidationError(f"{name} has non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        if self.flavor not in FLAVORS:
            raise ValidationError(f"unknown flavor {self.flavor!r}")
        U = self.matrix
        if self.flavor in ("coisometric", "unitary"):
            dev = coisometry_defect(U)
            if dev > FLAVOR_TOL:
                raise ValidationError(f"colligation claimed {self.flavor} but |UU* - I|_F = {dev:.3e}")
        if self.flavor == "unitary":
            dev = isometry_defect(U)
            if dev > FLAVOR_TOL:
                raise ValidationError(f"colligation claimed unitary but |U*U - I|_F = {dev:.3e}")
        if self.flavor == "contractive" and op_norm(U) > 1 + FLAVOR_TOL:
            raise ValidationError(f"colligation claimed contractive but |U| = {op_norm(U):.12g}")

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def p(self) -> int:
        return self.D.shape[1]

    @property
    def q(self) -> int:
        return self.D.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.A, self.B], [self.C, self.D]])

    def A_block(self, j: int) -> np.ndarray:
        n = self.n
        return self.A[(j - 1) * n:j * n]

    def B_block(self, j: int) -> np.ndarray:
        n = self.n
        return self.B[(j - 1) * n:j * n]

    @classmethod
    def from_matrix(cls, U, d: int, n: int, p: int, flavor: str = "coisometric") -> "Colligation":
        U = as_matrix(U, "U")
        if U.shape[1] != n + p:
            raise ValidationError(f"U has {U.shape[1]} columns, expected n + p = {n + p}")
        dn = d * n
        return cls(U[:dn, :n], U[:dn, n:], U[dn:, :n], U[dn:, n:], d, flavor)

    def coisometry_defect(self) -> float:
        return coisometry_defect(self.matrix)

    def __call__(self, z) -> np.ndarray:
        return eval_ball(self, z) if self.d > 1 else eval_disk(self, z)


def _resolvent_apply(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """``(I - M)^{-1} rhs`` by a linear solve, refusing near-singular systems."""
    n = M.shape[0]
    if n == 0:
        return rhs
    L = np.eye(n) - M
    cond = np.linalg.cond(L)
    if not np.isfinite(cond) or cond > 1e13:
        raise ResolventError(f"I - Z(z)A is singular (condition number {cond:.3e})", float(cond))
    return np.linalg.solve(L, rhs)


def eval_disk(U: Colligation, z) -> np.ndarray:
    """``D + z C (I - z A)^{-1} B``."""
    if U.d != 1:
        raise ValidationError(f"eval_disk needs d = 1, colligation has d = {U.d}")
    zs = np.asarray(z, dtype=complex).reshape(-1)
    if zs.size != 1:
        raise ValidationError(f"eval_disk takes a scalar point, got {zs.size} coordinates")
    z = complex(zs[0])
    if not abs(z) < 1:
        raise DomainError(f"point {z} is not in the open unit disk")
    if U.n == 0:
        return U.D.copy()
    return U.D + z * (U.C @ _resolvent_apply(z * U.A, U.B))


def _Z_times(U: Colligation, z: np.ndarray, M: np.ndarray) -> np.ndarray:
    n = U.n
    return sum(z[j] * M[j * n:(j + 1) * n] for j in range(U.d))


def eval_ball(U: Colligation, z) -> np.ndarray:
    """``D + C (I - Z(z) A)^{-1} Z(z) B`` at a point of the open unit ball."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.shape != (U.d,):
        raise ValidationError(f"point has {z.size} coordinates, colligation has d = {U.d}")
    if not np.linalg.norm(z) < 1:
        raise DomainError(f"point {z} is not in the open unit ball")
    if U.n == 0:
        return U.D.copy()
    return U.D + U.C @ _resolvent_apply(_Z_times(U, z, U.A), _Z_times(U, z, U.B))


def free_transfer_coeffs(U: Colligation, N: int) -> fs.FormalSeries:
    """Coefficients ``s_0 = D`` and ``s_{v j} = C A^v B_j`` for words of length at most ``N``."""
    terms = {(): U.D}
    if U.n == 0:
        return fs.FormalSeries(U.d, U.q, U.p, terms)
    level = {(): U.C}  # word v -> C A^v
    for length in range(1, N + 1):
        nxt = {}
        for v, CAv in level.items():
            for j in range(1, U.d + 1):
                terms[v + (j,)] = CAv @ U.B_block(j)
                if length < N:
                    nxt[v + (j,)] = CAv @ U.A_block(j)
        level = nxt
    return fs.FormalSeries(U.d, U.q, U.p, terms)


def observability_factor(U: Colligation, z) -> np.ndarray:
    """``H(z) = C (I - Z(z) A)^{-1}``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = U.n
    if n == 0:
        return np.zeros((U.q, 0), dtype=complex)
    L = np.eye(n) - _Z_times(U, z, U.A)
    return np.linalg.solve(L.T, U.C.T).T


def kernel_identity_check(U: Colligation, points: Sequence) -> float:
    """Max deviation of ``I - S(z)S(w)* = H(z) (1 - <z, w>) H(w)*`` over all point pairs.

    Holds exactly for coisometric colligations; for other inputs the
    deviation is only reported.
    """
    pts = [np.atleast_1d(np.asarray(z, dtype=complex)) for z in points]
    S = [eval_ball(U, z) if U.d > 1 else eval_disk(U, z[0]) for z in pts]
    H = [observability_factor(U, z) for z in pts]
    Iq = np.eye(U.q)
    worst = 0.0
    for i, z in enumerate(pts):
        for j, w in enumerate(pts):
            lhs = Iq - S[i] @ S[j].conj().T
            rhs = (1 - np.vdot(w, z)) * (H[i] @ H[j].conj().T)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


# ---------------------------------------------------------------------------
# lurking isometry synthesis


@dataclass(frozen=True)
class RealizationResult:
    colligation: Colligation
    fit_residual: float
    heldout_residual: float | None = None
    rank: RankDecision | None = None
    gram_deviation: float = 0.0
    isometry_residual: float = 0.0
    notes: tuple = field(default_factory=tuple)

    @property
    def state_dim(self) -> int:
        return self.colligation.n


def _synthesize(R, Dcols, d: int, n: int, p: int, q: int, tol: float, mode: str):
    """Solve ``U R = D`` for a partial isometry and complete it.

    ``R`` lives in ``X + U_in`` (``n + p`` rows), ``D`` in ``X^d + Y``.
    """
    try:
        sol = solve_isometry(R, Dcols, tol)
    except GramMismatchError as exc:
        raise NotSchurError(
            f"not in Schur class at these samples: lurking isometry Gram mismatch {exc.deviation:.3e}",
            exc.deviation,
        ) from exc
    notes = []
    if mode == "unitary":
        # square system needs n' + p = d n' + q after adding s state dimensions
        excess = n + p - d * n - q
        if d == 1:
            if excess != 0:
                raise DefectPaddingRequired(
                    f"no finite unitary colligation for a {q}x{p} function of one variable", 0, 0
                )
            s = 0
        else:
            if excess < 0 or excess % (d - 1):
                raise DefectPaddingRequired(
                    f"state padding cannot balance the {q}x{p} colligation (excess {excess}, d={d})", 0, 0
                )
            s = excess // (d - 1)
        R = _pad_state(R, n, s, 1)
        Dcols = _pad_state(Dcols, n, s, d)
        sol = solve_isometry(R, Dcols, tol)
        n = n + s
        if s:
            notes.append(f"state padded by {s} for unitary completion")
        comp = complete_to_unitary(sol.V, sol.domain_basis, "unitary", pad=False)
        U = Colligation.from_matrix(comp.U, d, n, p, "unitary")
        return U, sol, notes
    try:
        comp = complete_to_unitary(sol.V, sol.domain_basis, "coisometric")
        U = Colligation.from_matrix(comp.U, d, n, p, "coisometric")
    except DefectPaddingRequired as exc:
        notes.append(f"coisometric completion impossible in finite dimensions ({exc}); returned contractive partial isometry")
        U = Colligation.from_matrix(sol.V, d, n, p, "contractive")
    return U, sol, notes


def _pad_state(M: np.ndarray, n: int, s: int, copies: int) -> np.ndarray:
    """Insert ``s`` zero rows after each of the ``copies`` leading state blocks."""
    if s == 0:
        return M
    parts = []
    for c in range(copies):
        parts.append(M[c * n:(c + 1) * n])
        parts.append(np.zeros((s, M.shape[1]), dtype=M.dtype))
    parts.append(M[copies * n:])
    return np.vstack(parts)


def _sample_synthesis(points, values, d: int, setting: str, tol: float, mode: str):
    values = [as_matrix(v, "S value") for v in values]
    if not values:
        raise ValidationError("at least one sample is required")
    q, p = values[0].shape
    K = debranges_kernel(values, points, setting)
    report = positivity_check(K, tol)
    if not report.is_psd:
        raise NotSchurError(
            f"not in Schur class at these samples: de Branges kernel has eigenvalue {report.min_eigenvalue:.3e}",
            -report.min_eigenvalue,
        )
    rank = rank_decision(K.gram(), tol)
    const = _constant_colligation(values, d, tol) if mode == "coisometric" else None
    if const is not None:
        return const, 0.0, 0.0, rank, ("samples are constant; realized with an empty state",)
    H = kolmogorov(K, tol)
    n = H[0].shape[1]
    Rcols, Dcols = [], []
    for z, Hi, Si in zip(K.points, H, values):
        zc = np.conj(np.atleast_1d(np.asarray(z, dtype=complex)))
        Hs, Ss = Hi.conj().T, Si.conj().T
        Rcols.append(np.vstack([Hs, Ss]))
        Dcols.append(np.vstack([*(zc[j] * Hs for j in range(d)), np.eye(q)]))
    R = np.hstack(Rcols)
    Dm = np.hstack(Dcols)
    # Kolmogorov truncation perturbs each Gram entry by at most 2 tol lambda_max
    gram_tol = 2 * tol * len(values) * q
    U, sol, notes = _synthesize(R, Dm, d, n, p, q, gram_tol, mode)
    return U, sol.gram_deviation, sol.residual, rank, tuple(notes)


def _constant_colligation(values, d: int, tol: float) -> Colligation | None:
    """The state-free colligation ``S = D`` when every sample equals the first one."""
    D = as_matrix(values[0])
    if any(float(np.max(np.abs(as_matrix(v) - D))) > tol for v in values[1:]):
        return None
    flavor = "coisometric" if coisometry_defect(D) <= FLAVOR_TOL else "contractive"
    q, p = D.shape
    return Colligation(np.zeros((0, 0)), np.zeros((0, p)), np.zeros((q, 0)), D, d, flavor)


def _residual(U: Colligation, points, values) -> float:
    return max(
        (op_norm(U(z) - as_matrix(v)) for z, v in zip(points, values)),
        default=0.0,
    )


def _heldout(U: Colligation, heldout) -> float | None:
    if heldout is None:
        return None
    pts, vals = heldout
    if callable(vals):
        vals = [vals(z) for z in pts]
    return _residual(U, pts, vals)


def lurking_isometry_disk(points, values, tol: float = DEFAULT_TOL, heldout=None,
                          mode: str = "coisometric") -> RealizationResult:
    """Realize sampled values ``S(z_i)`` on the disk by a colligation.

    ``heldout`` is ``(points, values)`` or ``(points, callable)`` used only to
    report ``heldout_residual``.
    """
    points = [complex(z) for z in points]
    U, gram_dev, iso_res, rank, notes = _sample_synthesis(points, values, 1, "disk", tol, mode)
    return RealizationResult(
        U, _residual(U, points, values), _heldout(U, heldout), rank, gram_dev, iso_res, notes,
    )


def lurking_isometry_ball(points, values, tol: float = DEFAULT_TOL, heldout=None,
                          mode: str = "coisometric") -> RealizationResult:
    """Ball analogue of :func:`lurking_isometry_disk`; points are ``d``-tuples."""
    pts = [np.atleast_1d(np.asarray(z, dtype=complex)) for z in points]
    d = pts[0].size
    U, gram_dev, iso_res, rank, notes = _sample_synthesis(pts, values, d, "ball", tol, mode)
    return RealizationResult(
        U, _residual(U, pts, values), _heldout(U, heldout), rank, gram_dev, iso_res, notes,
    )


def lurking_isometry_free(S: fs.FormalSeries, N: int, tol: float = DEFAULT_TOL,
                          mode: str = "coisometric") -> RealizationResult:
    """Realize the degree-``N`` part of a noncommutative series by a free colligation.

    The fit residual compares coefficients of length at most ``N``. If ``S``
    carries longer terms, those are used for ``heldout_residual``.
    """
    d, q, p = S.d, S.coeff_rows, S.coeff_cols
    St = S.truncate(N)
    K = fs.nc_debranges_coeffs(St, N)
    report = positivity_check(K, tol)
    if not report.is_psd:
        raise NotSchurError(
            f"not in Schur class: noncommutative de Branges kernel has eigenvalue {report.min_eigenvalue:.3e}",
            -report.min_eigenvalue,
        )
    rank = rank_decision(K.gram(), tol)
    if mode == "coisometric" and all(not w or not np.any(c) for w, c in St.terms.items()):
        U = _constant_colligation([St.coeff(())], d, tol)
        fit = free_transfer_coeffs(U, N).max_deviation(St)
        held = _free_heldout(U, S, N)
        return RealizationResult(U, fit, held, rank, 0.0, 0.0, ("series is constant; realized with an empty state",))
    H = dict(zip(K.points, kolmogorov(K, tol)))
    n = H[()].shape[1]
    Rcols, Dcols = [], []
    for beta in K.points:
        Hs = H[beta].conj().T
        Rcols.append(np.vstack([Hs, St.coeff(beta).conj().T]))
        Dc = np.zeros((d * n + q, q), dtype=complex)
        if beta:
            v, j = beta[:-1], beta[-1]
            Dc[(j - 1) * n:j * n] = H[v].conj().T
        else:
            Dc[d * n:] = np.eye(q)
        Dcols.append(Dc)
    R = np.hstack(Rcols)
    Dm = np.hstack(Dcols)
    gram_tol = 2 * tol * len(K.points) * q
    U, sol, notes = _synthesize(R, Dm, d, n, p, q, gram_tol, mode)
    fit = free_transfer_coeffs(U, N).max_deviation(St)
    held = _free_heldout(U, S, N)
    return RealizationResult(U, fit, held, rank, sol.gram_deviation, sol.residual, tuple(notes))


def _free_heldout(U: Colligation, S: fs.FormalSeries, N: int) -> float | None:
    if S.degree <= N:
        return None
    coeffs = free_transfer_coeffs(U, S.degree)
    return max(float(np.max(np.abs(coeffs.coeff(w) - S.coeff(w)))) for w in S.terms if len(w) > N)


# ---------------------------------------------------------------------------
# tensored realizations


@dataclass(frozen=True)
class TensoredRealization:
    """``U = U0 (x) I_m`` with the state representation ``pi(b) = I (x) b``."""

    colligation: Colligation
    base: Colligation
    m: int
    module_deviation: float

    def pi(self, b) -> np.ndarray:
        return np.kron(np.eye(self.base.n), as_matrix(b))


def module_map_deviation(U, d: int, n0: int, p0: int, q0: int, m: int) -> float:
    """Max over matrix units ``b`` of ``|U diag(I (x) b) - diag(I (x) b) U|``.

    ``U`` is the full system matrix of a colligation whose spaces are
    ``C^{n0} (x) C^m`` (state), ``C^{p0} (x) C^m`` and ``C^{q0} (x) C^m``.
    """
    U = as_matrix(U.matrix if isinstance(U, Colligation) else U)
    worst = 0.0
    for r in range(m):
        for s in range(m):
            b = np.zeros((m, m))
            b[r, s] = 1.0
            right = np.kron(np.eye(n0 + p0), b)
            left = np.kron(np.eye(d * n0 + q0), b)
            worst = max(worst, float(np.max(np.abs(U @ right - left @ U))))
    return worst


def tensored_realization(U0: Colligation, m: int) -> TensoredRealization:
    if m < 1:
        raise ValidationError("tensor multiplicity must be positive")
    Im = np.eye(m)
    U = Colligation(
        np.kron(U0.A, Im), np.kron(U0.B, Im), np.kron(U0.C, Im), np.kron(U0.D, Im),
        U0.d, U0.flavor,
    )
    dev = module_map_deviation(U, U0.d, U0.n, U0.p, U0.q, m)
    if dev > 1e-10:
        raise ValidationError(f"tensored colligation fails the module-map identity ({dev:.3e})")
    return TensoredRealization(U, U0, m, dev)
