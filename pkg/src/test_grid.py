import math

import numpy as np
import pytest

from grid import (
    Grid, ScalarField, Mask, BcSpec, BoundaryKind, LevelSet, Side,
    make_grid, sample, mask_from_levelset, interface_band, fill_ghosts,
)
from levelset import signed_distance_circle


def test_make_grid_spacing():
    """Bước lưới: (hi - lo)/(n - 1), hoặc (hi - lo)/n trên trục tuần hoàn"""
    grid = make_grid([(0.0, 1.0), (0.0, 2.0)], (5, 8), periodic=(False, True))
    assert grid.spacing == pytest.approx((0.25, 0.25))
    assert grid.axis_coords(1)[-1] == pytest.approx(1.75)
    assert grid.axis_coords(0)[-1] == pytest.approx(1.0)
    assert grid.dims == (5, 8)
    assert grid.size == 40
    assert grid.h == pytest.approx(0.25)


@pytest.mark.parametrize("dims", [(3, 8), (8, 2), (4,), (4, 4, 4, 4)])
def test_grid_rejects_bad_dims(dims):
    with pytest.raises(ValueError):
        Grid(dims, (0.0,) * len(dims), (1.0,) * len(dims))


def test_grid_rejects_degenerate_extent():
    with pytest.raises(ValueError):
        make_grid([(1.0, 1.0), (0.0, 1.0)], (8, 8))


def test_linear_index_axis0_fastest():
    """Trục 0 chạy nhanh nhất trong thứ tự tuyến tính"""
    grid = make_grid([(0, 1)] * 3, (4, 5, 6))
    assert grid.linear_index((1, 0, 0)) == 1
    assert grid.linear_index((0, 1, 0)) == 4
    assert grid.linear_index((0, 0, 1)) == 20
    for k in (0, 7, 33, 119):
        assert grid.linear_index(grid.multi_index(k)) == k


def test_scalar_field_flat_order_and_readonly():
    grid = make_grid([(0, 1)] * 2, (4, 5))
    values = np.arange(20, dtype=float).reshape((4, 5), order='F')
    field = ScalarField(grid, values)
    assert np.array_equal(field.flat(), np.arange(20, dtype=float))
    with pytest.raises(ValueError):
        field.values[0, 0] = 1.0


def test_scalar_field_rejects_non_finite():
    grid = make_grid([(0, 1)] * 2, (4, 4))
    values = np.zeros((4, 4))
    values[2, 1] = np.nan
    with pytest.raises(ValueError, match="nút 6"):
        ScalarField(grid, values)


def test_sample_where_and_non_finite():
    grid = make_grid([(-1, 1)] * 2, (5, 5))
    r = np.sqrt(sum(c ** 2 for c in grid.coords()))
    field = sample(grid, lambda x, y: 1.0 / np.sqrt(x ** 2 + y ** 2), where=r > 0)
    assert field.values[2, 2] == 0.0
    assert field.values[0, 0] == pytest.approx(1.0 / math.sqrt(2.0))
    with pytest.raises(ValueError, match="không hữu hạn"):
        sample(grid, lambda x, y: 1.0 / np.sqrt(x ** 2 + y ** 2))


def test_mask_from_levelset_sides():
    """φ = 0 luôn thuộc phía đã biết"""
    grid = make_grid([(-1, 1)] * 2, (9, 9))
    phi = LevelSet(sample(grid, lambda x, y: x))
    inside = mask_from_levelset(phi, Side.INSIDE_KNOWN)
    outside = mask_from_levelset(phi, Side.OUTSIDE_KNOWN)
    assert inside.n_known == 5 * 9
    assert outside.n_known == 5 * 9
    assert np.all(inside.known[4, :]) and np.all(outside.known[4, :])
    assert np.all(np.diff(inside.unknown_index) > 0)


def test_mask_from_levelset_trivial():
    grid = make_grid([(-1, 1)] * 2, (6, 6))
    with pytest.raises(ValueError):
        mask_from_levelset(LevelSet(sample(grid, lambda x, y: x * 0 - 1.0)))
    with pytest.raises(ValueError):
        mask_from_levelset(LevelSet(sample(grid, lambda x, y: x * 0 + 1.0)))


def test_mask_from_unknown_index():
    grid = make_grid([(0, 1)] * 2, (4, 4))
    mask = Mask.from_unknown_index(grid, [3, 5, 10])
    assert mask.n_unknown == 3
    assert mask.unknown_index.tolist() == [3, 5, 10]
    assert mask.complement().n_unknown == 13


def test_interface_band():
    grid = make_grid([(-1, 1)] * 2, (21, 21))
    phi = LevelSet(sample(grid, signed_distance_circle((0, 0), 0.5)))
    band = interface_band(phi, 2)
    assert np.all(np.abs(phi.values[band.known]) <= 2 * grid.h + 1e-15)
    assert band.n_known > 0


def test_bcspec_periodic_pairing():
    with pytest.raises(ValueError):
        BcSpec(((BoundaryKind.PERIODIC, BoundaryKind.NEUMANN_ZERO),
                (BoundaryKind.DIRICHLET_ZERO, BoundaryKind.DIRICHLET_ZERO)))


def test_bcspec_from_name():
    mixed = BcSpec.from_name("mixed", 2)
    assert mixed.axis(0) == (BoundaryKind.NEUMANN_ZERO, BoundaryKind.NEUMANN_ZERO)
    assert mixed.axis(1) == (BoundaryKind.DIRICHLET_ZERO, BoundaryKind.DIRICHLET_ZERO)
    assert mixed.has_dirichlet
    assert not BcSpec.from_name("neumann", 3).has_dirichlet
    with pytest.raises(ValueError):
        BcSpec.from_name("robin", 2)


@pytest.mark.parametrize("kind, expected_low, expected_high", [
    (BoundaryKind.DIRICHLET_ZERO, [-1.0, 0.0], [0.0, -4.0]),
    (BoundaryKind.NEUMANN_ZERO, [2.0, 1.0], [4.0, 3.0]),
    (BoundaryKind.PERIODIC, [3.0, 4.0], [1.0, 2.0]),
])
def test_fill_ghosts_rules(kind, expected_low, expected_high):
    """Hai lớp ghost mỗi mặt cho f = (1, 2, 3, 4)"""
    padded = np.zeros(8)
    padded[2:6] = [1.0, 2.0, 3.0, 4.0]
    fill_ghosts(padded, 0, kind, kind)
    assert padded[:2].tolist() == expected_low
    assert padded[6:].tolist() == expected_high
