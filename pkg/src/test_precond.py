import numpy as np
import pytest

from grid import BcSpec, BoundaryKind, Mask, make_grid
from precond import full_grid_solve, apply_precond, precond_is_spd_check
from test_biharmonic import dense_biharmonic


def _mask(grid):
    x, y = grid.coords()
    return Mask(grid, np.abs(x - 0.4) + np.abs(y - 0.5) <= 0.3)


def test_full_grid_solve_dirichlet_inverts_operator():
    dims = (7, 6)
    bc = BcSpec.from_name("dirichlet", 2)
    v = np.random.default_rng(20).standard_normal(dims)
    x = full_grid_solve(v, bc)
    B = dense_biharmonic(dims, bc)
    assert np.allclose(B @ x.ravel(order='F'), v.ravel(order='F'), atol=1e-9)


@pytest.mark.parametrize("name", ["neumann", "periodic"])
def test_full_grid_solve_drops_constant_mode(name):
    """Không có Dirichlet: nghiệm khớp với v trừ đi trung bình, và có trung bình 0"""
    dims = (8, 6)
    bc = BcSpec.from_name(name, 2)
    v = np.random.default_rng(21).standard_normal(dims)
    x = full_grid_solve(v, bc)
    B = dense_biharmonic(dims, bc)
    assert np.allclose(B @ x.ravel(order='F'), (v - v.mean()).ravel(order='F'), atol=1e-9)
    assert abs(x.mean()) < 1e-10


def test_full_grid_solve_3d_mixed_faces():
    dims = (5, 6, 4)
    bc = BcSpec(((BoundaryKind.DIRICHLET_ZERO, BoundaryKind.NEUMANN_ZERO),
                 (BoundaryKind.PERIODIC, BoundaryKind.PERIODIC),
                 (BoundaryKind.NEUMANN_ZERO, BoundaryKind.NEUMANN_ZERO)))
    v = np.random.default_rng(22).standard_normal(dims)
    x = full_grid_solve(v, bc)
    B = dense_biharmonic(dims, bc)
    assert np.allclose(B @ x.ravel(order='F'), v.ravel(order='F'), atol=1e-9)


def test_apply_precond_matches_dense():
    grid = make_grid([(0, 1)] * 2, (8, 7))
    mask = _mask(grid)
    bc = BcSpec.from_name("dirichlet", 2)
    B_inv = np.linalg.inv(dense_biharmonic(grid.dims, bc))
    idx = mask.unknown_index
    b = np.random.default_rng(23).standard_normal(idx.size)
    assert np.allclose(apply_precond(b, mask, bc), B_inv[np.ix_(idx, idx)] @ b, atol=1e-9)


@pytest.mark.parametrize("name", ["dirichlet", "neumann", "periodic", "mixed"])
def test_precond_is_spd(name):
    grid = make_grid([(0, 1)] * 2, (10, 9))
    result = precond_is_spd_check(_mask(grid), BcSpec.from_name(name, 2), trials=20, seed=3)
    assert result, result.detail
    assert result.trials == 20


def test_precond_spd_check_zero_trials():
    grid = make_grid([(0, 1)] * 2, (6, 6))
    assert precond_is_spd_check(_mask(grid), BcSpec.from_name("neumann", 2), trials=0)
