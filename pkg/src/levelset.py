import logging
from dataclasses import dataclass

import numpy as np

from config import BAND_CELLS
from grid import LevelSet, ScalarField, interface_band

# Cấu hình logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.INFO
)
logger = logging.getLogger(__name__)

# Level set CFL limit for explicit Euler advection
MAX_CFL = 0.9
GRADIENT_FLOOR = 1e-12


def signed_distance_circle(center, radius):
    """Signed distance to a circle (sphere in 3D), negative inside"""
    center = tuple(float(c) for c in center)

    def fn(*x):
        r = np.sqrt(sum((xa - ca) ** 2 for xa, ca in zip(x, center)))
        return r - radius
    return fn


def signed_distance_peanut(separation=0.8, radius=1.0):
    """Union of two discs (balls) centred at (±separation, 0[, 0])"""
    def fn(*x):
        rest = sum(xa ** 2 for xa in x[1:])
        d_left = np.sqrt((x[0] + separation) ** 2 + rest)
        d_right = np.sqrt((x[0] - separation) ** 2 + rest)
        return np.minimum(d_left, d_right) - radius
    return fn


def signed_distance_annulus(inner=0.5, outer=1.0):
    """Negative in inner < r < outer"""
    def fn(*x):
        r = np.sqrt(sum(xa ** 2 for xa in x))
        return np.maximum(inner - r, r - outer)
    return fn


def _one_sided(values, spacing):
    """Backward and forward differences per axis; edges use linear extrapolation"""
    padded = np.pad(values, 1, mode='reflect', reflect_type='odd')
    nd = values.ndim
    core = tuple(slice(1, -1) for _ in range(nd))
    minus, plus = [], []
    for axis, h in enumerate(spacing):
        lo = list(core)
        hi = list(core)
        lo[axis] = slice(0, -2)
        hi[axis] = slice(2, None)
        minus.append((values - padded[tuple(lo)]) / h)
        plus.append((padded[tuple(hi)] - values) / h)
    return minus, plus


def godunov_norm(values, spacing, positive):
    """
    Godunov upwind |∇φ|. `positive` marks nodes whose speed is positive
    (information flows outward along ∇φ).
    """
    minus, plus = _one_sided(values, spacing)
    pos = np.zeros_like(values)
    neg = np.zeros_like(values)
    for dm, dp in zip(minus, plus):
        pos += np.maximum(np.maximum(dm, 0.0) ** 2, np.minimum(dp, 0.0) ** 2)
        neg += np.maximum(np.minimum(dm, 0.0) ** 2, np.maximum(dp, 0.0) ** 2)
    return np.sqrt(np.where(positive, pos, neg))


def advect(phi, Vn, dt):
    """
    One explicit Euler step of φ_t + V_n |∇φ| = 0 with Godunov upwinding.
    """
    if phi.grid != Vn.grid:
        raise ValueError("phi and Vn live on different grids")
    vn = Vn.values
    vmax = float(np.abs(vn).max())
    if vmax == 0.0:
        return LevelSet(ScalarField(phi.grid, phi.values))
    ratio = dt * vmax / phi.grid.min_spacing
    if ratio > MAX_CFL:
        raise ValueError(f"CFL violated: dt*max|Vn|/h = {ratio:.3f} > {MAX_CFL}")

    values = phi.values
    grad_pos = godunov_norm(values, phi.grid.spacing, np.ones(values.shape, dtype=bool))
    grad_neg = godunov_norm(values, phi.grid.spacing, np.zeros(values.shape, dtype=bool))
    update = np.maximum(vn, 0.0) * grad_pos + np.minimum(vn, 0.0) * grad_neg
    return LevelSet(ScalarField(phi.grid, values - dt * update))


def reinitialize(phi, iterations, dtau=None):
    """
    Pseudo-time iteration of φ_τ + S(φ0)(|∇φ| - 1) = 0 towards a signed distance.
    S(φ0) = φ0 / sqrt(φ0² + h²), Δτ = 0.5 h.
    """
    if iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {iterations}")
    grid = phi.grid
    h = grid.min_spacing
    if dtau is None:
        dtau = 0.5 * h
    phi0 = phi.values
    sign = phi0 / np.sqrt(phi0 ** 2 + h ** 2)
    positive = sign > 0
    values = phi0.copy()
    for _ in range(iterations):
        grad = godunov_norm(values, grid.spacing, positive)
        values = values - dtau * sign * (grad - 1.0)
    logger.debug(f"Reinitialized over {iterations} iterations")
    return LevelSet(ScalarField(grid, values))


def gradient_magnitude(phi):
    """Central-difference |∇φ|"""
    grads = np.gradient(phi.values, *phi.grid.spacing)
    return np.sqrt(sum(g ** 2 for g in grads))


def curvature(phi):
    """κ = ∇·(∇φ/|∇φ|), central differences, clamped to ±1/h"""
    spacing = phi.grid.spacing
    grads = np.gradient(phi.values, *spacing)
    norm = np.maximum(np.sqrt(sum(g ** 2 for g in grads)), GRADIENT_FLOOR)
    kappa = np.zeros(phi.grid.dims)
    for axis, g in enumerate(grads):
        kappa += np.gradient(g / norm, spacing[axis], axis=axis)
    limit = 1.0 / phi.grid.min_spacing
    return ScalarField(phi.grid, np.clip(kappa, -limit, limit))


def band_error(f, f_ref, phi, cells=BAND_CELLS, restrict_to=None):
    """
    Max |f - f_ref| over nodes with |φ| <= cells * h, optionally intersected
    with `restrict_to` (a Mask whose marked nodes are kept).
    """
    if f.grid != f_ref.grid or f.grid != phi.grid:
        raise ValueError("f, f_ref and phi must share one grid")
    selected = interface_band(phi, cells).known
    if restrict_to is not None:
        selected = selected & restrict_to.known
    if not selected.any():
        raise ValueError(f"Empty error band ({cells} cells)")
    return float(np.abs(f.values - f_ref.values)[selected].max())


def estimated_orders(errors):
    """order_i = log2(e_i / e_{i+1}) over a 2x refinement ladder"""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.size < 2:
        raise ValueError("Need at least two errors to estimate an order")
    if np.any(~(errors > 0)):
        raise ValueError(f"Errors must be positive: {errors.tolist()}")
    return np.log2(errors[:-1] / errors[1:]).tolist()


@dataclass(frozen=True)
class Crossings:
    """Grid arms cut by the zero set: node, neighbour, axis, fraction from node"""
    node: np.ndarray
    neighbour: np.ndarray
    axis: np.ndarray
    theta: np.ndarray

    def __len__(self):
        return int(self.node.size)


def zero_crossings(phi):
    """
    Arms (k, k + e_a) where φ changes sign, with θ = φ_k / (φ_k - φ_nb) the
    linearly interpolated position of the crossing measured from node k.
    """
    grid = phi.grid
    values = phi.values
    linear = np.arange(grid.size).reshape(grid.dims, order='F')
    nodes, nbs, axes, thetas = [], [], [], []
    for axis in range(grid.ndim):
        a = np.take(values, np.arange(grid.dims[axis] - 1), axis=axis)
        b = np.take(values, np.arange(1, grid.dims[axis]), axis=axis)
        cut = ((a < 0) & (b >= 0)) | ((a >= 0) & (b < 0))
        ka = np.take(linear, np.arange(grid.dims[axis] - 1), axis=axis)[cut]
        kb = np.take(linear, np.arange(1, grid.dims[axis]), axis=axis)[cut]
        fa, fb = a[cut], b[cut]
        nodes.append(ka)
        nbs.append(kb)
        axes.append(np.full(ka.size, axis))
        thetas.append(fa / (fa - fb))
    return Crossings(np.concatenate(nodes), np.concatenate(nbs),
                     np.concatenate(axes), np.concatenate(thetas))


def contour_area(phi):
    """Area (volume in 3D) of {φ < 0} by node counting"""
    return float(np.count_nonzero(phi.values < 0)) * phi.grid.cell_volume
