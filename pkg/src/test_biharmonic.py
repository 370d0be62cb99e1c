import numpy as np
import pytest

from grid import BcSpec, BoundaryKind, Mask, ScalarField, make_grid
from biharmonic import (
    biharmonic_array, apply_biharmonic, build_rhs, embed, restrict, matvec, pad,
)

D = BoundaryKind.DIRICHLET_ZERO
N = BoundaryKind.NEUMANN_ZERO
P = BoundaryKind.PERIODIC


def second_difference(m, low, high):
    L = 2.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)
    if low == P:
        L[0, -1] = L[-1, 0] = -1.0
        return L
    if low == N:
        L[0, 0] = 1.0
    if high == N:
        L[-1, -1] = 1.0
    return L


def dense_biharmonic(dims, bc):
    """B = L² với L là Laplacian Kronecker, thứ tự tuyến tính trục 0 nhanh nhất"""
    L = np.zeros((int(np.prod(dims)),) * 2)
    for axis, (low, high) in enumerate(bc.faces):
        term = np.ones((1, 1))
        for a in reversed(range(len(dims))):
            block = second_difference(dims[a], low, high) if a == axis else np.eye(dims[a])
            term = np.kron(term, block)
        L += term
    return L @ L


BCS_2D = ["dirichlet", "neumann", "periodic", "mixed"]


@pytest.mark.parametrize("name", BCS_2D)
def test_operator_matches_dense_2d(name):
    dims = (6, 7)
    bc = BcSpec.from_name(name, 2)
    x = np.random.default_rng(10).standard_normal(dims)
    B = dense_biharmonic(dims, bc)
    expected = (B @ x.ravel(order='F')).reshape(dims, order='F')
    assert np.allclose(biharmonic_array(x, bc), expected, atol=1e-10)


@pytest.mark.parametrize("name", ["dirichlet", "neumann", "periodic"])
def test_operator_matches_dense_3d(name):
    dims = (4, 5, 6)
    bc = BcSpec.from_name(name, 3)
    x = np.random.default_rng(11).standard_normal(dims)
    B = dense_biharmonic(dims, bc)
    expected = (B @ x.ravel(order='F')).reshape(dims, order='F')
    assert np.allclose(biharmonic_array(x, bc), expected, atol=1e-10)


def test_thirteen_point_stencil():
    """Xung đơn vị ở giữa lưới cho các hệ số 20, -8, 2, 1"""
    x = np.zeros((9, 9))
    x[4, 4] = 1.0
    out = biharmonic_array(x, BcSpec.from_name("dirichlet", 2))
    assert out[4, 4] == 20.0
    assert out[3, 4] == out[5, 4] == out[4, 3] == out[4, 5] == -8.0
    assert out[3, 3] == out[5, 5] == out[3, 5] == out[5, 3] == 2.0
    assert out[2, 4] == out[6, 4] == out[4, 2] == out[4, 6] == 1.0
    assert np.count_nonzero(out) == 13


def test_mixed_faces_on_one_axis():
    """Dirichlet một mặt, Neumann mặt kia"""
    dims = (6, 5)
    bc = BcSpec(((D, N), (N, N)))
    x = np.random.default_rng(12).standard_normal(dims)
    B = dense_biharmonic(dims, BcSpec(((D, N), (N, N))))
    expected = (B @ x.ravel(order='F')).reshape(dims, order='F')
    assert np.allclose(biharmonic_array(x, bc), expected, atol=1e-10)


def test_pad_shape():
    grid = make_grid([(0, 1)] * 2, (5, 6))
    padded = pad(ScalarField.zeros(grid), BcSpec.from_name("neumann", 2))
    assert padded.values.shape == (9, 10)
    assert padded.interior.shape == (5, 6)


def _mask(grid):
    x, y = grid.coords()
    return Mask(grid, (x - 0.5) ** 2 + (y - 0.5) ** 2 <= 0.1)


@pytest.mark.parametrize("name", BCS_2D)
def test_reduced_system_symmetric_positive(name):
    grid = make_grid([(0, 1)] * 2, (8, 8))
    mask = _mask(grid)
    bc = BcSpec.from_name(name, 2)
    n = mask.n_unknown
    A = np.column_stack([matvec(np.eye(n)[:, j], mask, bc) for j in range(n)])
    assert np.allclose(A, A.T, atol=1e-12)
    assert np.linalg.eigvalsh(A).min() > 0


def test_matvec_is_submatrix_of_dense():
    grid = make_grid([(0, 1)] * 2, (7, 6))
    mask = _mask(grid)
    bc = BcSpec.from_name("mixed", 2)
    B = dense_biharmonic(grid.dims, bc)
    idx = mask.unknown_index
    u = np.random.default_rng(13).standard_normal(idx.size)
    assert np.allclose(matvec(u, mask, bc), B[np.ix_(idx, idx)] @ u, atol=1e-10)


def test_build_rhs():
    grid = make_grid([(0, 1)] * 2, (7, 7))
    mask = _mask(grid)
    bc = BcSpec.from_name("dirichlet", 2)
    f = np.random.default_rng(14).standard_normal(grid.dims)
    known = ScalarField(grid, np.where(mask.known, f, 0.0))
    B = dense_biharmonic(grid.dims, bc)
    idx = mask.unknown_index
    kn = np.flatnonzero(mask.known.ravel(order='F'))
    expected = -B[np.ix_(idx, kn)] @ f.ravel(order='F')[kn]
    assert np.allclose(build_rhs(known, mask, bc), expected, atol=1e-10)


def test_build_rhs_rejects_values_at_unknown_nodes():
    grid = make_grid([(0, 1)] * 2, (7, 7))
    mask = _mask(grid)
    with pytest.raises(ValueError):
        build_rhs(ScalarField(grid, np.ones(grid.dims)), mask, BcSpec.from_name("dirichlet", 2))


def test_embed_restrict():
    grid = make_grid([(0, 1)] * 2, (5, 5))
    mask = _mask(grid)
    u = np.arange(mask.n_unknown, dtype=float) + 1.0
    full = embed(u, mask)
    assert np.all(full[mask.known] == 0.0)
    assert np.array_equal(restrict(full, mask), u)
    with pytest.raises(ValueError):
        embed(np.ones(mask.n_unknown + 1), mask)


def test_apply_biharmonic_of_constant_neumann_is_zero():
    grid = make_grid([(0, 1)] * 2, (6, 6))
    out = apply_biharmonic(ScalarField(grid, np.full(grid.dims, 3.0)), BcSpec.from_name("neumann", 2))
    assert np.allclose(out.values, 0.0)
