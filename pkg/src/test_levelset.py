import math

import numpy as np
import pytest

from grid import LevelSet, ScalarField, Mask, make_grid, sample
from levelset import (
    signed_distance_circle, signed_distance_peanut, signed_distance_annulus,
    advect, reinitialize, gradient_magnitude, curvature, band_error,
    estimated_orders, zero_crossings, contour_area,
)


def _circle(n=41, radius=0.5, half_width=1.0):
    grid = make_grid([(-half_width, half_width)] * 2, (n, n))
    return LevelSet(sample(grid, signed_distance_circle((0.0, 0.0), radius)))


def test_analytic_level_sets():
    peanut = signed_distance_peanut()
    assert peanut(np.array(0.8), np.array(0.0)) == pytest.approx(-1.0)
    assert peanut(np.array(2.8), np.array(0.0)) == pytest.approx(1.0)
    annulus = signed_distance_annulus()
    assert annulus(np.array(0.75), np.array(0.0)) == pytest.approx(-0.25)
    assert annulus(np.array(0.0), np.array(0.0)) == pytest.approx(0.5)
    assert annulus(np.array(0.0), np.array(1.5)) == pytest.approx(0.5)


def test_advect_zero_velocity_is_identity():
    phi = _circle()
    out = advect(phi, ScalarField.zeros(phi.grid), 0.1)
    assert np.array_equal(out.values, phi.values)


def test_advect_constant_speed_shifts_distance():
    """V = 1 trên hàm khoảng cách: φ giảm đúng dt gần mặt phân cách"""
    phi = _circle()
    dt = 0.5 * phi.grid.h
    out = advect(phi, ScalarField(phi.grid, np.ones(phi.grid.dims)), dt)
    near = np.abs(phi.values) < 0.1
    assert np.allclose(out.values[near], phi.values[near] - dt, atol=0.1 * dt)


def test_advect_cfl_violation():
    phi = _circle()
    with pytest.raises(ValueError, match="CFL"):
        advect(phi, ScalarField(phi.grid, np.ones(phi.grid.dims)), phi.grid.h)


def test_reinitialize_restores_unit_gradient():
    phi = _circle(n=81)
    distorted = LevelSet(ScalarField(phi.grid, 3.0 * phi.values))
    out = reinitialize(distorted, 60)
    band = np.abs(phi.values) < 0.15
    assert np.max(np.abs(gradient_magnitude(out)[band] - 1.0)) < 0.15
    # mặt không bị dịch quá một ô lưới
    assert np.max(np.abs(out.values[band] - phi.values[band])) < phi.grid.h


def test_reinitialize_rejects_zero_iterations():
    with pytest.raises(ValueError):
        reinitialize(_circle(), 0)


def test_curvature_of_circle():
    phi = _circle(n=81, radius=0.5)
    kappa = curvature(phi).values
    near = np.abs(phi.values) < phi.grid.h
    assert np.allclose(kappa[near], 2.0, rtol=0.05)


def test_curvature_is_clamped():
    phi = _circle(n=41)
    assert np.max(np.abs(curvature(phi).values)) <= 1.0 / phi.grid.h + 1e-12


def test_band_error_and_restriction():
    phi = _circle()
    ref = ScalarField.zeros(phi.grid)
    f = ScalarField(phi.grid, np.where(phi.values > 0, 1.0, 0.5))
    assert band_error(f, ref, phi, 2) == 1.0
    assert band_error(f, ref, phi, 2, Mask(phi.grid, phi.values <= 0)) == 0.5
    assert band_error(f, f, phi, 2) == 0.0


def test_band_error_empty_band():
    grid = make_grid([(-1, 1)] * 2, (11, 11))
    phi = LevelSet(sample(grid, lambda x, y: x * 0 + 5.0))
    f = ScalarField.zeros(grid)
    with pytest.raises(ValueError):
        band_error(f, f, phi, 1)


def test_estimated_orders():
    assert estimated_orders([1e-2, 2.5e-3, 6.25e-4]) == pytest.approx([2.0, 2.0])
    with pytest.raises(ValueError):
        estimated_orders([1e-2])
    with pytest.raises(ValueError):
        estimated_orders([1e-2, 0.0])


def test_zero_crossings_positions():
    grid = make_grid([(0, 1)] * 2, (5, 5))
    phi = LevelSet(sample(grid, lambda x, y: x - 0.3))
    crossings = zero_crossings(phi)
    assert len(crossings) == 5
    assert np.all(crossings.axis == 0)
    assert np.allclose(crossings.theta, 0.2)
    x0 = np.array([grid.node_coords(k)[0] for k in crossings.node])
    assert np.allclose(x0 + crossings.theta * grid.spacing[0], 0.3)


def test_contour_area_of_circle():
    phi = _circle(n=201, radius=0.5)
    assert contour_area(phi) == pytest.approx(math.pi * 0.25, rel=0.02)
