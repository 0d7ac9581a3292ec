import numpy as np
import pytest
from hypothesis import given, strategies as st

from schurkit.kernels import (
    CPKernelSample,
    DomainError,
    KernelSample,
    cp_kolmogorov,
    cp_positivity_check,
    debranges_kernel,
    kolmogorov,
    matrix_unit,
    modulemap_reduction_check,
    positivity_check,
    szego_ball,
    szego_disk,
)
from schurkit.matops import ValidationError
from schurkit.sampling import random_ball_points, random_coisometric_colligation, random_disk_points, random_matrix

seeds = st.integers(0, 2**32 - 1)


def test_szego_disk_values():
    assert szego_disk(0, 0.7j) == 1
    assert szego_disk(0.5, 0.5) == pytest.approx(4 / 3)
    assert szego_disk(0.5j, 0.5j) == pytest.approx(4 / 3)
    with pytest.raises(DomainError):
        szego_disk(1.0, 0)


def test_szego_ball_values(rng):
    assert szego_ball([0, 0], [0, 0]) == 1
    assert szego_ball([0.5, 0.5], [0.5, 0.5]) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        szego_ball([0.8, 0.8], [0, 0])
    pts = random_disk_points(rng, 20)
    dev = max(abs(szego_ball([z], [w]) - szego_disk(z, w)) for z in pts for w in pts)
    assert dev == 0


def test_szego_ball_is_linear_in_first_argument():
    z, w = np.array([0.3, 0.2j]), np.array([0.1, 0.4])
    expected = 1 / (1 - (z[0] * np.conj(w[0]) + z[1] * np.conj(w[1])))
    assert szego_ball(z, w) == pytest.approx(expected)


def test_debranges_constant_and_identity(rng):
    pts = random_disk_points(rng, 5)
    K = debranges_kernel(lambda z: np.array([[0.6]]), pts)
    for i, z in enumerate(pts):
        for j, w in enumerate(pts):
            assert K.blocks[i, j, 0, 0] == pytest.approx(0.64 * szego_disk(z, w))
    K = debranges_kernel(lambda z: np.array([[2.0]]), [0])
    rep = positivity_check(K)
    assert not rep.is_psd and rep.min_eigenvalue == pytest.approx(-3.0)
    K = debranges_kernel(lambda z: np.array([[z]]), pts)
    assert np.allclose(K.blocks, 1)


def test_debranges_shape_mismatch():
    with pytest.raises(ValidationError):
        debranges_kernel([np.eye(2), np.eye(3)], [0, 0.1])


def test_positivity_examples():
    K = KernelSample.from_function(lambda z, w: szego_disk(z, w), [0, 0.5])
    assert np.allclose(K.gram(), [[1, 1], [1, 4 / 3]])
    assert positivity_check(K).is_psd
    K = KernelSample.from_function(lambda z, w: 1.0, [0, 0.2, -0.3j])
    assert positivity_check(K).is_psd


def test_kernel_sample_validation():
    with pytest.raises(ValidationError, match="Hermitian"):
        KernelSample((0, 0.5), np.array([[1, 2], [0, 1]]).reshape(2, 2, 1, 1))
    with pytest.raises(DomainError):
        KernelSample((1.2,), np.ones((1, 1, 1, 1)))


def test_kolmogorov_examples():
    K = KernelSample.from_function(lambda z, w: 1.0, [0, 0.2, -0.3j])
    H = kolmogorov(K)
    assert all(h.shape == (1, 1) for h in H)
    assert all(abs(abs(h[0, 0]) - 1) < 1e-12 for h in H)
    assert np.allclose([h[0, 0] for h in H], H[0][0, 0])
    K = KernelSample.from_function(szego_disk, [0, 0.5])
    H = kolmogorov(K)
    assert H[0].shape == (1, 2)
    recon = np.vstack(H) @ np.vstack(H).conj().T
    assert np.max(np.abs(recon - K.gram())) <= 1e-12


@given(seeds, st.integers(1, 2))
def test_coisometric_colligations_give_psd_kernels(seed, d):
    rng = np.random.default_rng(seed)
    U = random_coisometric_colligation(rng, d=d)
    pts = random_disk_points(rng, 12) if d == 1 else random_ball_points(rng, 12, d)
    K = debranges_kernel(U, pts, "disk" if d == 1 else "ball")
    assert np.max(np.abs(K.blocks - K.blocks.transpose(1, 0, 3, 2).conj())) <= 1e-12
    assert positivity_check(K, 1e-8).is_psd
    H = kolmogorov(K)
    F = np.vstack(H)
    assert np.linalg.norm(F @ F.conj().T - K.gram()) <= 1e-9 * np.linalg.norm(K.gram())


def identity_kernel(k=2):
    return CPKernelSample.from_function(lambda p, q, a: a, [0], k, k)


def test_cp_identity_and_transpose():
    K = identity_kernel()
    assert np.allclose(np.linalg.eigvalsh(K.reduced_choi()), [0, 0, 0, 2], atol=1e-14)
    assert cp_positivity_check(K).is_psd
    T = CPKernelSample.from_function(lambda p, q, a: a.T, [0], 2, 2)
    rep = cp_positivity_check(T)
    assert not rep.is_psd and rep.min_eigenvalue == pytest.approx(-1.0)
    assert np.linalg.eigvalsh(T.reduced_choi())[0] == pytest.approx(-1.0)


def test_cp_scalar_algebra_collapse(rng):
    pts = random_disk_points(rng, 4)
    K = KernelSample.from_function(szego_disk, pts)
    C = CPKernelSample.from_function(lambda p, q, a: a[0, 0] * szego_disk(p, q), pts, 1, 1)
    r1, r2 = positivity_check(K), cp_positivity_check(C)
    assert r1.is_psd == r2.is_psd
    assert abs(r1.min_eigenvalue - r2.min_eigenvalue) <= 1e-12
    dec = cp_kolmogorov(C)
    H = kolmogorov(K)
    for i in range(len(pts)):
        for j in range(len(pts)):
            assert np.allclose(dec.H_maps[i] @ dec.H_maps[j].conj().T, H[i] @ H[j].conj().T, atol=1e-12)


def test_cp_kolmogorov_identity_and_trace():
    dec = cp_kolmogorov(identity_kernel())
    assert dec.reconstruction_residual <= 1e-10
    assert dec.homomorphism_residual <= 1e-9
    K = CPKernelSample.from_function(lambda p, q, a: np.trace(a) * np.eye(3), [0], 2, 3)
    dec = cp_kolmogorov(K)
    assert dec.reconstruction_residual <= 1e-8
    E12 = matrix_unit(2, 0, 1)
    assert np.allclose(dec.H_maps[0] @ dec.rep(E12) @ dec.H_maps[0].conj().T, 0, atol=1e-10)


def stinespring_kernel(rng, N, k, m, h):
    V = [random_matrix(rng, k * h, m) for _ in range(N)]
    return CPKernelSample.from_function(
        lambda p, q, a: V[p].conj().T @ np.kron(a, np.eye(h)) @ V[q], range(N), k, m
    )


@given(seeds, st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(1, 3))
def test_cp_kolmogorov_on_stinespring_kernels(seed, N, k, m, h):
    K = stinespring_kernel(np.random.default_rng(seed), N, k, m, h)
    assert K.linearity_deviation() == 0
    assert cp_positivity_check(K).is_psd
    dec = cp_kolmogorov(K)
    assert dec.reconstruction_residual <= 1e-8
    assert dec.homomorphism_residual <= 1e-9


def test_cp_sample_rejects_non_hermitian():
    G = np.zeros((4, 4))
    G[0, 1] = 1
    with pytest.raises(ValidationError):
        CPKernelSample((0,), 2, 1, G)


def test_modulemap_examples(rng):
    pi = lambda a: a
    holds, dev, verdicts = modulemap_reduction_check(identity_kernel(), pi)
    assert holds and dev == 0 and verdicts == (True, True)
    T = CPKernelSample.from_function(lambda p, q, a: a.T, [0], 2, 2)
    holds, dev, verdicts = modulemap_reduction_check(T, pi)
    assert not holds and dev > 0.5 and verdicts is None


@given(seeds, st.integers(1, 3), st.integers(1, 3), st.integers(1, 2), st.booleans())
def test_modulemap_verdicts_agree(seed, N, k, r, indefinite):
    rng = np.random.default_rng(seed)
    X = random_matrix(rng, N * r, N * r)
    G = X @ X.conj().T
    if indefinite:
        G = G - 0.5 * np.linalg.eigvalsh(G)[-1] * np.eye(N * r)
    K = CPKernelSample.from_function(
        lambda i, j, a: np.kron(a, G[i * r:(i + 1) * r, j * r:(j + 1) * r]), range(N), k, k * r
    )
    holds, dev, verdicts = modulemap_reduction_check(K, lambda a: np.kron(a, np.eye(r)))
    assert holds and dev <= 1e-10
    assert verdicts[0] == verdicts[1]
