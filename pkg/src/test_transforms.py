import numpy as np
import pytest

from grid import BoundaryKind, BcSpec
from transforms import (
    TransformFamily, TransformKind, laplacian_eigenvalues, transform_matrix,
    parseval_weights, forward, inverse, forward_nd, inverse_nd, kinds_for_grid,
    eigenvalue_sum,
)

D = BoundaryKind.DIRICHLET_ZERO
N = BoundaryKind.NEUMANN_ZERO
P = BoundaryKind.PERIODIC


def second_difference(m, low, high):
    """Ma trận 2f_i - f_{i-1} - f_{i+1} dựng tay cho từng loại biên"""
    L = 2.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
    if low == P:
        L[0, -1] = L[-1, 0] = -1.0
        return L
    if low == N:
        L[0, 0] = 1.0
    if high == N:
        L[-1, -1] = 1.0
    return L


KINDS = [
    TransformKind(TransformFamily.SINE_I, 9),
    TransformKind(TransformFamily.COSINE_EVEN, 8),
    TransformKind(TransformFamily.FOURIER_REAL, 8),
    TransformKind(TransformFamily.FOURIER_REAL, 7),
    TransformKind.for_faces(D, N, 7),
    TransformKind.for_faces(N, D, 6),
]


def test_for_faces_picks_family():
    assert TransformKind.for_faces(D, D, 5).family == TransformFamily.SINE_I
    assert TransformKind.for_faces(N, N, 5).family == TransformFamily.COSINE_EVEN
    assert TransformKind.for_faces(P, P, 5).family == TransformFamily.FOURIER_REAL
    assert TransformKind.for_faces(D, N, 5).family == TransformFamily.EIGEN_BASIS


def test_kind_rejects_short_axis():
    with pytest.raises(ValueError):
        TransformKind(TransformFamily.SINE_I, 3)


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: f"{k.family.value}-{k.m}")
def test_forward_matches_direct_sum(kind):
    x = np.random.default_rng(1).standard_normal(kind.m)
    assert np.allclose(forward(kind, x), transform_matrix(kind) @ x, atol=1e-12)


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: f"{k.family.value}-{k.m}")
def test_inverse_undoes_forward(kind):
    x = np.random.default_rng(2).standard_normal(kind.m)
    assert np.allclose(inverse(kind, forward(kind, x)), x, atol=1e-12)


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: f"{k.family.value}-{k.m}")
def test_basis_diagonalizes_second_difference(kind):
    """Cột k của ma trận ngược là vector riêng với trị riêng λ_k"""
    L = second_difference(kind.m, *kind.faces)
    lam = laplacian_eigenvalues(kind).lam
    for k in range(kind.m):
        e = np.zeros(kind.m)
        e[k] = 1.0
        v = inverse(kind, e)
        assert np.allclose(L @ v, lam[k] * v, atol=1e-10)


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: f"{k.family.value}-{k.m}")
def test_parseval(kind):
    x = np.random.default_rng(3).standard_normal(kind.m)
    c = forward(kind, x)
    assert np.sum(parseval_weights(kind) * c ** 2) == pytest.approx(np.sum(x ** 2), rel=1e-12)


def test_zero_modes():
    assert laplacian_eigenvalues(TransformKind(TransformFamily.SINE_I, 8)).zero_modes == 0
    assert laplacian_eigenvalues(TransformKind(TransformFamily.COSINE_EVEN, 8)).zero_modes == 1
    assert laplacian_eigenvalues(TransformKind(TransformFamily.FOURIER_REAL, 8)).zero_modes == 1
    assert laplacian_eigenvalues(TransformKind.for_faces(D, N, 8)).zero_modes == 0


def test_eigenvalues_non_negative():
    for kind in KINDS:
        assert np.all(laplacian_eigenvalues(kind).lam >= 0.0)


@pytest.mark.parametrize("name", ["dirichlet", "neumann", "periodic", "mixed"])
def test_nd_round_trip(name):
    dims = (6, 8, 5)
    bc = BcSpec.from_name(name, 3)
    kinds = kinds_for_grid(dims, bc)
    x = np.random.default_rng(4).standard_normal(dims)
    assert np.allclose(inverse_nd(forward_nd(x, kinds), kinds), x, atol=1e-12)


def test_eigenvalue_sum_diagonalizes_laplacian_2d():
    """Σλ là trị riêng của Laplacian 2D dựng bằng tích Kronecker"""
    dims = (6, 7)
    bc = BcSpec.from_name("mixed", 2)
    kinds = kinds_for_grid(dims, bc)
    L0 = second_difference(6, N, N)
    L1 = second_difference(7, D, D)
    L = np.kron(np.eye(7), L0) + np.kron(L1, np.eye(6))
    lam = eigenvalue_sum(kinds)
    rng = np.random.default_rng(5)
    c = rng.standard_normal(dims)
    v = inverse_nd(c, kinds)
    expected = inverse_nd(lam * c, kinds)
    assert np.allclose(L @ v.ravel(order='F'), expected.ravel(order='F'), atol=1e-10)
