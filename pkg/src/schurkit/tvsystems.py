"""Time-varying systems on a finite window ``[0, L)``.

Lower-triangular operators are stored as ``L x L`` matrices. The window shift
``U`` is the nilpotent lower shift (``U[k+1, k] = 1``) and the ``n``-th
diagonal of ``T`` is ``d_n[k] = T[k+n, k]``, so that ``T = sum_n U^n diag(d_n)``.
Systems start from rest, ``x(0) = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .matops import ValidationError, as_matrix, isometry_defect, numerical_rank, op_norm, orth_complement, DEFAULT_TOL

STRICT_MARGIN = 1e-12
UNITARY_TOL = 1e-10
NORM_SLACK = 1e-12
DEFECT_RANK_TOL = 1e-12


class NotContractiveError(ValueError):
    def __init__(self, message: str, norm: float):
        super().__init__(message)
        self.norm = norm


@dataclass(frozen=True)
class LowerTriWindow:
    T: np.ndarray

    def __post_init__(self):
        M = as_matrix(self.T, "T")
        if M.shape[0] != M.shape[1]:
            raise ValidationError(f"window must be square, got {M.shape}")
        upper = np.triu(M, 1)
        if np.any(upper != 0):
            i, j = np.argwhere(upper != 0)[0]
            raise ValidationError(f"entry T[{i}][{j}] above the diagonal is nonzero")
        object.__setattr__(self, "T", M)

    @property
    def L(self) -> int:
        return self.T.shape[0]


@dataclass(frozen=True)
class DiagonalExpansion:
    L: int
    diagonals: tuple

    def __post_init__(self):
        diags = tuple(np.asarray(d, dtype=complex).reshape(-1) for d in self.diagonals)
        if len(diags) != self.L:
            raise ValidationError(f"need {self.L} diagonals, got {len(diags)}")
        for n, d in enumerate(diags):
            if d.size != self.L - n:
                raise ValidationError(f"diagonal {n} needs {self.L - n} entries, got {d.size}")
        object.__setattr__(self, "diagonals", diags)


def diag_expand(T: LowerTriWindow) -> DiagonalExpansion:
    return DiagonalExpansion(T.L, tuple(np.diagonal(T.T, -n).copy() for n in range(T.L)))


def diag_assemble(E: DiagonalExpansion) -> LowerTriWindow:
    out = np.zeros((E.L, E.L), dtype=complex)
    for n, d in enumerate(E.diagonals):
        out += np.diag(d, -n)
    return LowerTriWindow(out)


def window_shift(L: int) -> np.ndarray:
    """The nilpotent lower shift on ``C^L``."""
    return np.eye(L, k=-1)


@dataclass(frozen=True)
class WeightedShiftArg:
    """``eta = D_eta U`` with diagonal weights of modulus below one."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex).reshape(-1)
        if w.size == 0:
            raise ValidationError("weights are empty")
        top = float(np.max(np.abs(w)))
        if top > 1 - STRICT_MARGIN:
            raise ValidationError(f"weighted shift is not strict: max |weight| = {top:.15g}")
        object.__setattr__(self, "weights", w)

    @property
    def L(self) -> int:
        return self.weights.size

    def matrix(self) -> np.ndarray:
        return np.diag(self.weights) @ window_shift(self.L)


def tv_point_eval(T: LowerTriWindow, eta: WeightedShiftArg) -> np.ndarray:
    """``sum_n eta^n diag(d_n)`` with each diagonal zero-padded at the end."""
    if eta.L != T.L:
        raise ValidationError(f"weights have length {eta.L}, window has length {T.L}")
    E = diag_expand(T)
    M = eta.matrix()
    out = np.zeros((T.L, T.L), dtype=complex)
    power = np.eye(T.L, dtype=complex)
    for n, d in enumerate(E.diagonals):
        out += power @ np.diag(np.concatenate([d, np.zeros(n)]))
        power = power @ M
    return out


@dataclass(frozen=True)
class TVSystem:
    """System matrices ``U(k) = [[A(k), B(k)], [C(k), D(k)]]`` for ``k < L``.

    ``U(k)`` maps ``C^{state_dims[k]} + C`` to ``C^{state_dims[k+1]} + C``.
    """

    L: int
    state_dims: tuple
    U_seq: tuple
    conservative: bool = False

    def __post_init__(self):
        dims = tuple(int(n) for n in self.state_dims)
        if len(dims) != self.L + 1 or any(n < 0 for n in dims):
            raise ValidationError(f"state_dims needs {self.L + 1} nonnegative entries")
        if len(self.U_seq) != self.L:
            raise ValidationError(f"U_seq needs {self.L} matrices, got {len(self.U_seq)}")
        mats = []
        for k, U in enumerate(self.U_seq):
            U = as_matrix(U, f"U_seq[{k}]")
            if U.shape != (dims[k + 1] + 1, dims[k] + 1):
                raise ValidationError(
                    f"U_seq[{k}] has shape {U.shape}, expected {(dims[k + 1] + 1, dims[k] + 1)}"
                )
            if self.conservative:
                if U.shape[0] != U.shape[1]:
                    raise ValidationError(f"U_seq[{k}] is not square, so it cannot be unitary")
                dev = isometry_defect(U)
                if dev > UNITARY_TOL:
                    raise ValidationError(f"U_seq[{k}] is not unitary (deviation {dev:.3e})")
            mats.append(U)
        object.__setattr__(self, "state_dims", dims)
        object.__setattr__(self, "U_seq", tuple(mats))

    def blocks(self, k: int):
        """``(A(k), B(k), C(k), D(k))``."""
        U, n = self.U_seq[k], self.state_dims[k]
        m = self.state_dims[k + 1]
        return U[:m, :n], U[:m, n:], U[m:, :n], U[m:, n:]

    def unitarity_defect(self) -> float:
        return max((isometry_defect(U) if U.shape[0] == U.shape[1] else np.inf for U in self.U_seq), default=0.0)


class Trajectory(NamedTuple):
    x: tuple
    y: np.ndarray


def simulate(sys: TVSystem, u) -> Trajectory:
    """Run ``x(k+1) = A x + B u``, ``y(k) = C x + D u`` from ``x(0) = 0``."""
    u = np.asarray(u, dtype=complex).reshape(-1)
    if u.size != sys.L:
        raise ValidationError(f"input has length {u.size}, window has length {sys.L}")
    x = np.zeros(sys.state_dims[0], dtype=complex)
    xs = [x]
    y = np.zeros(sys.L, dtype=complex)
    for k in range(sys.L):
        out = sys.U_seq[k] @ np.concatenate([x, u[k:k + 1]])
        x, y[k] = out[:-1], out[-1]
        xs.append(x)
    return Trajectory(tuple(xs), y)


@dataclass(frozen=True)
class AggregateColligation:
    """Block operators on the window; states ``x(0..L-1)`` are stacked in order."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    offsets: tuple


def aggregate_colligation(sys: TVSystem) -> AggregateColligation:
    """``A[i, j] = A(j) delta_{i, j+1}``, ``B[i, j] = B(j) delta_{i, j+1}``, ``C``, ``D`` block diagonal."""
    dims = sys.state_dims[: sys.L]
    offsets = tuple(int(x) for x in np.concatenate([[0], np.cumsum(dims)]))
    total = offsets[-1]
    A = np.zeros((total, total), dtype=complex)
    B = np.zeros((total, sys.L), dtype=complex)
    C = np.zeros((sys.L, total), dtype=complex)
    D = np.zeros((sys.L, sys.L), dtype=complex)
    for j in range(sys.L):
        Aj, Bj, Cj, Dj = sys.blocks(j)
        C[j, offsets[j]:offsets[j + 1]] = Cj[0]
        D[j, j] = Dj[0, 0]
        if j + 1 < sys.L:
            A[offsets[j + 1]:offsets[j + 2], offsets[j]:offsets[j + 1]] = Aj
            B[offsets[j + 1]:offsets[j + 2], j] = Bj[:, 0]
    return AggregateColligation(A, B, C, D, offsets)


def io_map(sys: TVSystem) -> LowerTriWindow:
    """``D + C (I - A)^{-1} B``; ``A`` is nilpotent, so the inverse is a finite sum."""
    agg = aggregate_colligation(sys)
    n = agg.A.shape[0]
    resolvent_B = agg.B.copy()
    term = agg.B
    for _ in range(sys.L):
        term = agg.A @ term
        if not np.any(term):
            break
        resolvent_B = resolvent_B + term
    T = agg.D + agg.C @ resolvent_B if n else agg.D.copy()
    return LowerTriWindow(np.tril(T))


def hankel_ranks(T: LowerTriWindow, tol: float = DEFAULT_TOL) -> tuple:
    """Numerical rank of ``T[k:, :k]`` at every cut ``k = 0..L``."""
    return tuple(numerical_rank(T.T[k:, :k], tol) if 0 < k < T.L else 0 for k in range(T.L + 1))


@dataclass(frozen=True)
class TVRealization:
    system: TVSystem
    residual: float
    hankel_ranks: tuple
    notes: tuple = field(default_factory=tuple)


def tv_realize(T: LowerTriWindow, tol: float = DEFAULT_TOL, conservative: bool = True) -> TVRealization:
    """Realize a lower-triangular window as the input-output map of a system.

    The conservative construction runs a lurking isometry cut by cut. With
    ``T_k = T[:k, :k]`` and ``X_k^* X_k = I - T_k^* T_k``, step ``k`` maps
    ``(X_k u_{<k}, u_k)`` to ``(X_{k+1} u_{<=k}, (T u)_k)``, which preserves
    norms. Each step is a unitary on a common state space whose dimension is
    the largest defect rank. With ``conservative=False`` the minimal system
    whose state at each cut spans the numerical range of the Hankel block is
    returned instead.
    """
    ranks = hankel_ranks(T, tol)
    if not conservative:
        sys = _minimal_realization(T, tol)
        return TVRealization(sys, _residual(T, sys), ranks, ("minimal, not conservative",))
    norm = op_norm(T.T)
    if norm > 1 + NORM_SLACK:
        raise NotContractiveError(f"window is not a contraction (norm {norm:.15g})", norm)
    sys, notes = _conservative_realization(T)
    return TVRealization(sys, _residual(T, sys), ranks, tuple(notes))


def _residual(T: LowerTriWindow, sys: TVSystem) -> float:
    return float(np.linalg.norm(T.T - io_map(sys).T))


def _defect_ranks(T: np.ndarray) -> list:
    L = T.shape[0]
    out = []
    for k in range(L + 1):
        Tk = T[:k, :k]
        w = np.linalg.eigvalsh(np.eye(k) - Tk.conj().T @ Tk) if k else np.zeros(0)
        out.append(int(np.sum(w > DEFECT_RANK_TOL)))
    return out


def _conservative_realization(T: LowerTriWindow):
    L, Tm = T.L, T.T
    M = max(_defect_ranks(Tm))
    notes = [f"constant state dimension {M} (largest defect rank)"]
    X = np.zeros((M, 0), dtype=complex)
    U_seq = []
    for k in range(L):
        Y = np.zeros((M + 1, k + 1), dtype=complex)
        Y[:M, :k] = X
        Y[M, k] = 1.0
        t = Tm[k, : k + 1]
        c = _output_row(Y, t)
        Q = orth_complement(c.conj().reshape(-1, 1))
        U = np.vstack([Q.conj().T, c.reshape(1, -1)])
        U_seq.append(U)
        X = Q.conj().T @ Y
    return TVSystem(L, (M,) * (L + 1), tuple(U_seq), conservative=True), notes


def _output_row(Y: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Unit row ``c`` with ``c Y = t``: the minimal solution plus a left null direction of ``Y``."""
    c0 = np.linalg.lstsq(Y.T, t, rcond=None)[0]
    size = float(np.linalg.norm(c0))
    # rounding in a unit-norm c0 would otherwise inject a sqrt(eps)-sized null component
    if 1 - size ** 2 <= NORM_SLACK:
        return c0 / size
    Uy = np.linalg.svd(Y, full_matrices=True)[0]
    # the last left singular vector is orthogonal to the range of Y
    v = Uy[:, -1].conj()
    c = c0 + np.sqrt(1 - size ** 2) * v
    return c / np.linalg.norm(c)


def _minimal_realization(T: LowerTriWindow, tol: float) -> TVSystem:
    L, Tm = T.L, T.T
    R = []
    for k in range(L + 1):
        H = Tm[k:, :k]
        if H.size == 0 or not np.any(H):
            R.append(np.zeros((0, k), dtype=complex))
            continue
        _, s, Vh = np.linalg.svd(H, full_matrices=False)
        R.append(Vh[s > tol * s[0]])
    U_seq = []
    for k in range(L):
        A = R[k + 1][:, :k] @ R[k].conj().T
        B = R[k + 1][:, k:k + 1]
        C = Tm[k:k + 1, :k] @ R[k].conj().T
        D = Tm[k:k + 1, k:k + 1]
        U_seq.append(np.block([[A, B], [C, D]]))
    return TVSystem(L, tuple(r.shape[0] for r in R), tuple(U_seq), conservative=False)


def toeplitz_window(coeffs: Sequence, L: int) -> LowerTriWindow:
    """Lower-triangular Toeplitz window with ``T[i, j] = coeffs[i - j]``."""
    c = np.zeros(L, dtype=complex)
    vals = np.asarray(coeffs, dtype=complex).reshape(-1)[:L]
    c[: vals.size] = vals
    i, j = np.indices((L, L))
    return LowerTriWindow(np.where(i >= j, c[np.clip(i - j, 0, L - 1)], 0))
