"""Positive kernels on finite point sets.

Covers the Szego kernels of the disk and ball, de Branges-Rovnyak kernels
``K_S(z, w) = (I - S(z) S(w)*) k(z, w)``, Aronszajn positivity and the
Kolmogorov factorization, and completely positive kernels whose values are
linear maps on the full matrix algebra ``M_k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .matops import (
    DEFAULT_TOL,
    NotPositiveError,
    PsdReport,
    ValidationError,
    as_matrix,
    psd_check,
    psd_factor,
)

HERMITIAN_ABS = 1e-12


class DomainError(ValueError):
    """A point lies on or outside the boundary of its domain."""


def _disk_point(z) -> complex:
    z = complex(z)
    if not abs(z) < 1:
        raise DomainError(f"point {z} is not in the open unit disk")
    return z


def _ball_point(z) -> np.ndarray:
    v = np.atleast_1d(np.asarray(z, dtype=complex))
    if v.ndim != 1:
        raise DomainError(f"ball point must be a 1-d tuple, got shape {v.shape}")
    if not np.linalg.norm(v) < 1:
        raise DomainError(f"point {v} is not in the open unit ball (norm {np.linalg.norm(v):.6g})")
    return v


def szego_disk(z, w) -> complex:
    """``1 / (1 - z conj(w))`` for ``z, w`` in the open unit disk."""
    z, w = _disk_point(z), _disk_point(w)
    return 1.0 / (1.0 - z * w.conjugate())


def szego_ball(z, w) -> complex:
    """Drury-Arveson kernel ``1 / (1 - <z, w>)`` on the open unit ball."""
    z, w = _ball_point(z), _ball_point(w)
    if z.shape != w.shape:
        raise DomainError(f"points live in different dimensions ({z.size} vs {w.size})")
    inner = sum(complex(a) * complex(b).conjugate() for a, b in zip(z, w))
    return 1.0 / (1.0 - inner)


@dataclass(frozen=True)
class KernelSample:
    """Kernel values ``blocks[i, j] = K(points[i], points[j])``.

    ``blocks`` has shape ``(N, N, q, q)``. ``setting`` is ``"disk"``, ``"ball"``
    or ``"abstract"`` (no domain check on the labels).
    """

    points: tuple
    blocks: np.ndarray
    setting: str = "disk"

    def __post_init__(self):
        blocks = np.asarray(self.blocks, dtype=complex)
        if blocks.ndim != 4 or blocks.shape[0] != blocks.shape[1] or blocks.shape[2] != blocks.shape[3]:
            raise ValidationError(f"blocks must have shape (N, N, q, q), got {blocks.shape}")
        if blocks.shape[0] != len(self.points):
            raise ValidationError(f"{len(self.points)} points but {blocks.shape[0]} block rows")
        if not np.all(np.isfinite(blocks)):
            raise ValidationError("kernel blocks contain non-finite values")
        if self.setting == "disk":
            pts = tuple(_disk_point(z) for z in self.points)
        elif self.setting == "ball":
            pts = tuple(tuple(_ball_point(z)) for z in self.points)
        elif self.setting == "abstract":
            pts = tuple(self.points)
        else:
            raise ValidationError(f"unknown setting {self.setting!r}")
        asym = np.max(np.abs(blocks - blocks.transpose(1, 0, 3, 2).conj())) if blocks.size else 0.0
        if asym > HERMITIAN_ABS * max(1.0, float(np.max(np.abs(blocks))) if blocks.size else 1.0):
            raise ValidationError(f"kernel is not Hermitian: max |K(i,j) - K(j,i)*| = {asym:.3e}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "blocks", blocks)

    @property
    def n_points(self) -> int:
        return self.blocks.shape[0]

    @property
    def block_dim(self) -> int:
        return self.blocks.shape[2]

    def gram(self) -> np.ndarray:
        """The ``(N q) x (N q)`` matrix ``[K(w_i, w_j)]``."""
        N, q = self.n_points, self.block_dim
        return self.blocks.transpose(0, 2, 1, 3).reshape(N * q, N * q)

    @classmethod
    def from_function(cls, K: Callable, points: Sequence, setting: str = "disk") -> "KernelSample":
        N = len(points)
        first = as_matrix(K(points[0], points[0])) if N else np.zeros((0, 0))
        q = first.shape[0]
        blocks = np.zeros((N, N, q, q), dtype=complex)
        for i in range(N):
            for j in range(N):
                blocks[i, j] = as_matrix(K(points[i], points[j]))
        return cls(tuple(points), blocks, setting)


def _szego(setting: str) -> Callable:
    if setting == "disk":
        return szego_disk
    if setting == "ball":
        return szego_ball
    raise ValidationError(f"unknown setting {setting!r}")


def debranges_kernel(S, points: Sequence, setting: str = "disk") -> KernelSample:
    """Sample ``K_S(z_i, z_j) = (I - S(z_i) S(z_j)*) k(z_i, z_j)``.

    ``S`` is either a callable returning a matrix, or a sequence of the values
    ``S(z_i)`` aligned with ``points``.
    """
    points = list(points)
    if callable(S):
        values = [as_matrix(S(z), "S value") for z in points]
    else:
        values = [as_matrix(v, "S value") for v in S]
        if len(values) != len(points):
            raise ValidationError(f"{len(values)} S values for {len(points)} points")
    if values:
        q = values[0].shape[0]
        for v in values:
            if v.shape[0] != q or v.shape[1] != values[0].shape[1]:
                raise ValidationError(
                    f"S values have inconsistent shapes ({values[0].shape} vs {v.shape})"
                )
    k = _szego(setting)
    N = len(points)
    q = values[0].shape[0] if values else 0
    blocks = np.zeros((N, N, q, q), dtype=complex)
    Iq = np.eye(q)
    for i in range(N):
        for j in range(N):
            blocks[i, j] = (Iq - values[i] @ values[j].conj().T) * k(points[i], points[j])
    blocks = (blocks + blocks.transpose(1, 0, 3, 2).conj()) / 2
    return KernelSample(tuple(points), blocks, setting)


def positivity_check(K: KernelSample, tol: float = DEFAULT_TOL) -> PsdReport:
    """Aronszajn positivity of the sampled kernel (PSD test of its Gram matrix)."""
    return psd_check(K.gram(), tol)


def kolmogorov(K: KernelSample, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Factors ``H_i`` (``q x r`` each) with ``K(w_i, w_j) = H_i H_j*``."""
    F = psd_factor(K.gram(), tol)
    q = K.block_dim
    return [F[i * q:(i + 1) * q] for i in range(K.n_points)]


# ---------------------------------------------------------------------------
# completely positive kernels over M_k


def matrix_unit(k: int, r: int, s: int) -> np.ndarray:
    E = np.zeros((k, k), dtype=complex)
    E[r, s] = 1.0
    return E


def _units(k: int):
    return [(r, s) for r in range(k) for s in range(k)]


@dataclass(frozen=True)
class CPKernelSample:
    """Values of a kernel ``KK(w_i, w_j)[a]`` linear in ``a`` in ``M_k``, acting on ``C^m``.

    ``choi_blocks`` is the ``(N k^2 m) x (N k^2 m)`` matrix whose block at
    ``((i, mu), (j, nu))`` is ``KK(w_i, w_j)[E_mu* E_nu]``; matrix units
    ``E_mu = E_{r s}`` are enumerated row-major.
    """

    points: tuple
    alg_dim: int
    rep_dim: int
    choi_blocks: np.ndarray

    def __post_init__(self):
        G = as_matrix(self.choi_blocks, "choi_blocks")
        N, k, m = len(self.points), self.alg_dim, self.rep_dim
        size = N * k * k * m
        if G.shape != (size, size):
            raise ValidationError(f"choi_blocks must be {size}x{size}, got {G.shape}")
        asym = float(np.max(np.abs(G - G.conj().T))) if G.size else 0.0
        if asym > HERMITIAN_ABS * max(1.0, float(np.max(np.abs(G))) if G.size else 1.0):
            raise ValidationError(f"choi_blocks is not Hermitian (max deviation {asym:.3e})")
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "choi_blocks", G)

    @property
    def n_points(self) -> int:
        return len(self.points)

    def block(self, i: int, mu: int, j: int, nu: int) -> np.ndarray:
        k2, m = self.alg_dim ** 2, self.rep_dim
        a = (i * k2 + mu) * m
        b = (j * k2 + nu) * m
        return self.choi_blocks[a:a + m, b:b + m]

    def unit_value(self, i: int, j: int, s: int, t: int) -> np.ndarray:
        """``KK(w_i, w_j)[E_{st}]``, read off via ``E_{rs}* E_{rt} = E_{st}`` with ``r = 0``."""
        k = self.alg_dim
        return self.block(i, 0 * k + s, j, 0 * k + t)

    def value(self, i: int, j: int, a) -> np.ndarray:
        """``KK(w_i, w_j)[a]`` for an arbitrary ``a`` in ``M_k`` (by linearity)."""
        a = as_matrix(a, "a")
        k = self.alg_dim
        out = np.zeros((self.rep_dim, self.rep_dim), dtype=complex)
        for s in range(k):
            for t in range(k):
                if a[s, t] != 0:
                    out += a[s, t] * self.unit_value(i, j, s, t)
        return out

    def linearity_deviation(self) -> float:
        """Max deviation of the stored blocks from what linearity in ``a`` forces.

        ``E_{rs}* E_{r't}`` equals ``E_{st}`` when ``r = r'`` and vanishes
        otherwise, so every block is either zero or a copy of a unit value.
        """
        k = self.alg_dim
        dev = 0.0
        units = _units(k)
        for i in range(self.n_points):
            for j in range(self.n_points):
                for mu, (r, s) in enumerate(units):
                    for nu, (r2, t) in enumerate(units):
                        expected = self.unit_value(i, j, s, t) if r == r2 else 0.0
                        dev = max(dev, float(np.max(np.abs(self.block(i, mu, j, nu) - expected))))
        return dev

    def reduced_choi(self) -> np.ndarray:
        """The ``(N k m)``-square matrix ``[KK(w_i, w_j)[E_{st}]]`` indexed by ``(i, s)``, ``(j, t)``.

        For one point this is the Choi matrix of ``a -> KK(w, w)[a]``.
        """
        N, k, m = self.n_points, self.alg_dim, self.rep_dim
        out = np.zeros((N * k * m, N * k * m), dtype=complex)
        for i in range(N):
            for s in range(k):
                for j in range(N):
                    for t in range(k):
                        a = (i * k + s) * m
                        b = (j * k + t) * m
                        out[a:a + m, b:b + m] = self.unit_value(i, j, s, t)
        return out

    @classmethod
    def from_function(cls, KK: Callable, points: Sequence, alg_dim: int, rep_dim: int) -> "CPKernelSample":
        """Assemble from ``KK(p, p2, a) -> m x m`` evaluated on products of matrix units."""
        points = tuple(points)
        N, k, m = len(points), alg_dim, rep_dim
        k2 = k * k
        # values on single units; the products E_mu* E_nu are units or zero
        unit_vals = {}
        for i in range(N):
            for j in range(N):
                for s in range(k):
                    for t in range(k):
                        unit_vals[i, j, s, t] = as_matrix(KK(points[i], points[j], matrix_unit(k, s, t)))
        G = np.zeros((N * k2 * m, N * k2 * m), dtype=complex)
        units = _units(k)
        for i in range(N):
            for j in range(N):
                for mu, (r, s) in enumerate(units):
                    for nu, (r2, t) in enumerate(units):
                        if r != r2:
                            continue
                        a = (i * k2 + mu) * m
                        b = (j * k2 + nu) * m
                        G[a:a + m, b:b + m] = unit_vals[i, j, s, t]
        return cls(points, k, m, G)


@dataclass(frozen=True)
class CPDecomposition:
    """``KK(w_i, w_j)[a] = H_maps[i] @ pi(a) @ H_maps[j]*`` with ``pi`` a *-representation."""

    hilbert_dim: int
    H_maps: list
    pi: dict = field(repr=False)  # (r, s) -> pi(E_{rs})
    homomorphism_residual: float = 0.0
    reconstruction_residual: float = 0.0

    def rep(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        out = np.zeros((self.hilbert_dim, self.hilbert_dim), dtype=complex)
        for (r, s), P in self.pi.items():
            if a[r, s] != 0:
                out += a[r, s] * P
        return out


def cp_positivity_check(K: CPKernelSample, tol: float = DEFAULT_TOL) -> PsdReport:
    """Complete positivity: PSD test of the full ``(N k^2 m)``-square block matrix."""
    return psd_check(K.choi_blocks, tol)


def _homomorphism_residual(pi: dict, k: int) -> float:
    res = 0.0
    for (r, s), P in pi.items():
        res = max(res, float(np.max(np.abs(P.conj().T - pi[s, r]))) if P.size else 0.0)
        for (r2, s2), P2 in pi.items():
            target = pi[r, s2] if s == r2 else 0.0
            res = max(res, float(np.max(np.abs(P @ P2 - target))) if P.size else 0.0)
    return res


def cp_kolmogorov(K: CPKernelSample, tol: float = DEFAULT_TOL) -> CPDecomposition:
    """Finite-dimensional GNS construction for a completely positive kernel.

    Formal vectors ``E_mu . k_{w_i} e_t`` have Gram matrix ``choi_blocks``;
    factoring it gives coordinates in ``C^h``. The algebra acts by left
    multiplication on the ``E_mu`` label, and ``H(w_i)* e = 1 . k_{w_i} e``.
    """
    N, k, m = K.n_points, K.alg_dim, K.rep_dim
    k2 = k * k
    F = psd_factor(K.choi_blocks, tol)
    W = F.conj().T  # columns are the formal vectors, W* W = choi_blocks
    h = W.shape[0]
    units = _units(k)
    index = {u: n for n, u in enumerate(units)}

    def col(i, mu, t):
        return (i * k2 + mu) * m + t

    Wpinv = np.linalg.pinv(W, rcond=1e-12) if h else np.zeros((W.shape[1], 0))
    pi = {}
    well_defined = 0.0
    for (r, s) in units:
        # E_rs E_{s' t} = delta_{s s'} E_{r t}
        P = np.zeros((W.shape[1], W.shape[1]), dtype=complex)
        for i in range(N):
            for (s2, t2) in units:
                if s2 != s:
                    continue
                src, dst = index[s2, t2], index[r, t2]
                for e in range(m):
                    P[col(i, dst, e), col(i, src, e)] = 1.0
        image = W @ P
        rep = image @ Wpinv
        well_defined = max(well_defined, float(np.max(np.abs(rep @ W - image))) if image.size else 0.0)
        pi[r, s] = rep

    H_maps = []
    for i in range(N):
        Hstar = np.zeros((h, m), dtype=complex)
        for r in range(k):
            mu = index[r, r]
            Hstar += W[:, col(i, mu, 0):col(i, mu, 0) + m]
        H_maps.append(Hstar.conj().T)

    hom = max(_homomorphism_residual(pi, k), well_defined)
    recon = 0.0
    for i in range(N):
        for j in range(N):
            for (s, t) in units:
                approx = H_maps[i] @ pi[s, t] @ H_maps[j].conj().T
                recon = max(recon, float(np.max(np.abs(approx - K.unit_value(i, j, s, t)))))
    scale = max(1.0, float(np.max(np.abs(K.choi_blocks))) if K.choi_blocks.size else 1.0)
    if hom > 1e-9 * scale:
        raise ValueError(
            f"GNS representation is not a *-homomorphism (residual {hom:.3e}); "
            "tolerance too loose or kernel values inconsistent"
        )
    return CPDecomposition(h, H_maps, pi, hom, recon)


def modulemap_reduction_check(K: CPKernelSample, pi_E: Callable | dict, tol: float = DEFAULT_TOL):
    """Test ``KK(w, w')[a* a'] = pi_E(a)* KK(w, w')[1] pi_E(a')`` on all unit pairs.

    Returns ``(holds, max_deviation, verdicts)`` where ``verdicts`` is
    ``(cp_verdict, aronszajn_verdict_of_K0)`` when the identity holds and
    ``None`` otherwise.
    """
    N, k, m = K.n_points, K.alg_dim, K.rep_dim
    units = _units(k)
    if callable(pi_E):
        rep = {u: as_matrix(pi_E(matrix_unit(k, *u))) for u in units}
    else:
        rep = {u: as_matrix(v) for u, v in pi_E.items()}
    K0 = np.zeros((N, N, m, m), dtype=complex)
    for i in range(N):
        for j in range(N):
            K0[i, j] = sum(K.unit_value(i, j, s, s) for s in range(k))
    dev = 0.0
    for i in range(N):
        for j in range(N):
            for mu, (r, s) in enumerate(units):
                for nu, (r2, t) in enumerate(units):
                    lhs = K.block(i, mu, j, nu)
                    rhs = rep[r, s].conj().T @ K0[i, j] @ rep[r2, t]
                    dev = max(dev, float(np.max(np.abs(lhs - rhs))))
    scale = max(1.0, float(np.max(np.abs(K.choi_blocks))))
    holds = dev <= max(tol, 1e-10) * scale
    verdicts = None
    if holds:
        K0 = (K0 + K0.transpose(1, 0, 3, 2).conj()) / 2
        ks = KernelSample(tuple(range(N)), K0, "abstract")
        verdicts = (cp_positivity_check(K, tol).is_psd, positivity_check(ks, tol).is_psd)
    return holds, dev, verdicts
