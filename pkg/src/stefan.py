import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.sparse.linalg import spsolve
from tqdm import tqdm

from config import REINIT_ITERATIONS, STEFAN_EXTENSION_TOL, HEAT_TOL, STEFAN_DIR
from grid import Grid, ScalarField, LevelSet, Mask, BcSpec, BoundaryKind, make_grid, sample
from levelset import advect, reinitialize, curvature, zero_crossings
from solver import extend, SolverError
from extrapolation import normals
from field_io import write_field

# Cấu hình logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.INFO
)
logger = logging.getLogger(__name__)

# Interface arms shorter than this fraction of h pin the node to the interface value
MIN_ARM = 1e-3
# Advection substeps keep dt_sub * max|Vn| / h at or below this ratio
ADVECT_CFL = 0.5


@dataclass(frozen=True)
class SeedShape:
    """Initial solid seed r = radius + amplitude * cos(mode * θ)"""
    radius: float = 0.1
    amplitude: float = 0.02
    mode: int = 4
    center: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"Seed radius must be positive, got {self.radius}")
        if abs(self.amplitude) >= self.radius:
            raise ValueError("Seed amplitude must be smaller than its radius")

    @property
    def max_radius(self):
        return self.radius + abs(self.amplitude)

    def level_set(self):
        cx, cy = self.center

        def fn(x, y):
            dx, dy = x - cx, y - cy
            r = np.sqrt(dx ** 2 + dy ** 2)
            return r - (self.radius + self.amplitude * np.cos(self.mode * np.arctan2(dy, dx)))
        return fn


def default_grid(n=200, half_width=2.0):
    return make_grid([(-half_width, half_width)] * 2, (n, n))


@dataclass(frozen=True)
class StefanParams:
    """Class tham số bài toán Stefan"""
    grid: Grid = field(default_factory=default_grid)
    sigma: float = 0.001
    beta: float = 2.0
    dt: float = 5e-4
    t_end: float = 0.4
    seed_shape: SeedShape = field(default_factory=SeedShape)
    diagonal_gradients: bool = False
    reinit_iterations: int = REINIT_ITERATIONS
    extension_tol: float = STEFAN_EXTENSION_TOL

    def __post_init__(self):
        if self.grid.ndim != 2:
            raise ValueError("The Stefan solver runs on 2D grids")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.dt <= 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.t_end < self.dt:
            raise ValueError(f"t_end ({self.t_end}) must be >= dt ({self.dt})")
        if self.reinit_iterations < 1:
            raise ValueError("reinit_iterations must be >= 1")
        if self.diagonal_gradients and not np.isclose(self.grid.spacing[0], self.grid.spacing[1]):
            raise ValueError("Diagonal gradients need equal spacing on both axes")

    @property
    def n_steps(self):
        return max(1, int(round(self.t_end / self.dt)))


@dataclass(frozen=True)
class StefanState:
    """Temperature, level set and time; one temperature per node"""
    T: ScalarField
    phi: LevelSet
    t: float = 0.0
    step: int = 0

    @property
    def solid(self):
        return self.phi.values < 0

    @property
    def solid_node_count(self):
        return int(np.count_nonzero(self.solid))


def init_state(params):
    """Solid seed at T = 0 in an undercooled liquid at T = -1/β"""
    grid = params.grid
    seed = params.seed_shape
    lo = grid.origin
    hi = grid.extent
    for axis, c in enumerate(seed.center):
        if c - seed.max_radius <= lo[axis] + grid.spacing[axis] or c + seed.max_radius >= hi[axis] - grid.spacing[axis]:
            raise ValueError(f"Seed of radius {seed.max_radius} touches the domain boundary on axis {axis}")

    phi = LevelSet(sample(grid, seed.level_set()))
    if seed.amplitude != 0:
        phi = reinitialize(phi, params.reinit_iterations)
    if not (phi.values < 0).any():
        raise ValueError("Seed contains no grid node; refine the grid or enlarge the seed")
    T = np.where(phi.values < 0, 0.0, -1.0 / params.beta)
    logger.info(f"Stefan init: {int(np.count_nonzero(phi.values < 0))} solid nodes, liquid T = {-1.0 / params.beta}")
    return StefanState(ScalarField(grid, T), phi)


@dataclass
class Arm:
    """Stencil arm from every node towards node + offset (mirrored at the domain edge)"""
    neighbour: np.ndarray
    cross: np.ndarray
    length: np.ndarray
    t_gamma: np.ndarray


def _arm(grid, phi_flat, kappa_flat, sigma, offset):
    dims = grid.dims
    idx = np.indices(dims)
    target = []
    for axis, o in enumerate(offset):
        j = idx[axis] + o
        j = np.where((j < 0) | (j >= dims[axis]), idx[axis] - o, j)
        target.append(j)
    nb = np.ravel_multi_index(tuple(target), dims, order='F').ravel(order='F')

    phi_p = phi_flat
    phi_n = phi_flat[nb]
    cross = (phi_p < 0) != (phi_n < 0)
    with np.errstate(divide='ignore', invalid='ignore'):
        theta = np.where(cross, phi_p / (phi_p - phi_n), 1.0)
    theta = np.clip(theta, 0.0, 1.0)
    kappa_gamma = (1.0 - theta) * kappa_flat + theta * kappa_flat[nb]
    step = math.sqrt(sum((o * h) ** 2 for o, h in zip(offset, grid.spacing)))
    return Arm(nb, cross, theta * step, np.where(cross, -sigma * kappa_gamma, 0.0))


def _unit(ndim, axis, sign):
    o = [0] * ndim
    o[axis] = sign
    return tuple(o)


def heat_step(state, params):
    """
    One implicit Euler step of T_t = ∇²T in each phase. Arms crossing the
    interface end at the crossing point with Dirichlet value -σκ
    (Shortley–Weller); domain edges are insulated.
    """
    grid = state.T.grid
    n = grid.size
    dt = params.dt
    phi = state.phi.values.ravel(order='F')
    kappa = curvature(state.phi).flat()
    T_old = state.T.flat()

    diag = np.ones(n)
    rhs = T_old.copy()
    rows, cols, vals = [], [], []
    pinned = np.zeros(n, dtype=bool)
    lin = np.arange(n)

    for axis in range(grid.ndim):
        h = grid.spacing[axis]
        minus = _arm(grid, phi, kappa, params.sigma, _unit(grid.ndim, axis, -1))
        plus = _arm(grid, phi, kappa, params.sigma, _unit(grid.ndim, axis, 1))
        pinned |= (minus.cross & (minus.length < MIN_ARM * h)) | (plus.cross & (plus.length < MIN_ARM * h))
        hl = np.maximum(minus.length, MIN_ARM * h)
        hr = np.maximum(plus.length, MIN_ARM * h)
        c_l = 2.0 / (hl * (hl + hr))
        c_r = 2.0 / (hr * (hl + hr))
        diag += dt * (c_l + c_r)
        for arm, c in ((minus, c_l), (plus, c_r)):
            rhs += np.where(arm.cross, dt * c * arm.t_gamma, 0.0)
            keep = ~arm.cross
            rows.append(lin[keep])
            cols.append(arm.neighbour[keep])
            vals.append(-dt * c[keep])

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    if pinned.any():
        keep = ~pinned[rows]
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        diag[pinned] = 1.0
        rhs[pinned] = -params.sigma * kappa[pinned]

    A = sparse.coo_matrix((np.concatenate([vals, diag]),
                           (np.concatenate([rows, lin]), np.concatenate([cols, lin]))),
                          shape=(n, n)).tocsr()
    T_new = spsolve(A, rhs)
    norm_rhs = np.linalg.norm(rhs)
    residual = np.linalg.norm(A @ T_new - rhs) / (norm_rhs if norm_rhs > 0 else 1.0)
    if not np.all(np.isfinite(T_new)) or residual > HEAT_TOL:
        raise SolverError(f"Heat solve failed at t = {state.t:.4g}: relative residual {residual:.2e}")
    logger.debug(f"Heat step: {int(pinned.sum())} pinned nodes, residual {residual:.2e}")
    return ScalarField(grid, T_new.reshape(grid.dims, order='F'))


def _one_sided_derivative(T_flat, minus, plus):
    """
    d/ds at each node from the points (-hl, 0, +hr) of its own phase. The
    end of an arm cut by the interface carries the interface temperature.
    """
    f_l = np.where(minus.cross, minus.t_gamma, T_flat[minus.neighbour])
    f_r = np.where(plus.cross, plus.t_gamma, T_flat[plus.neighbour])
    hl = minus.length
    hr = plus.length
    scale = np.maximum(hl, hr)
    tiny_l = hl < MIN_ARM * scale
    tiny_r = hr < MIN_ARM * scale
    with np.errstate(divide='ignore', invalid='ignore'):
        three_point = (-hr / (hl * (hl + hr)) * f_l
                       + (hr - hl) / (hl * hr) * T_flat
                       + hl / (hr * (hl + hr)) * f_r)
        forward = (f_r - T_flat) / hr
        backward = (T_flat - f_l) / hl
    d = np.where(tiny_l, forward, np.where(tiny_r, backward, three_point))
    return np.where(tiny_l & tiny_r, 0.0, d)


def phase_gradients(state, params):
    """
    ∇T at every node using only points of the node's own phase (plus
    interface points). Returns an array of shape (ndim, n) in linear order.
    """
    grid = state.T.grid
    phi = state.phi.values.ravel(order='F')
    kappa = curvature(state.phi).flat()
    T = state.T.flat()
    nd = grid.ndim
    grads = np.zeros((nd, grid.size))
    for axis in range(nd):
        minus = _arm(grid, phi, kappa, params.sigma, _unit(nd, axis, -1))
        plus = _arm(grid, phi, kappa, params.sigma, _unit(nd, axis, 1))
        grads[axis] = _one_sided_derivative(T, minus, plus)

    if params.diagonal_gradients:
        # η = (x + y)/√2, ζ = (y - x)/√2; rotate back and average with the x-y estimate
        d_eta = _one_sided_derivative(T, _arm(grid, phi, kappa, params.sigma, (-1, -1)),
                                      _arm(grid, phi, kappa, params.sigma, (1, 1)))
        d_zeta = _one_sided_derivative(T, _arm(grid, phi, kappa, params.sigma, (1, -1)),
                                       _arm(grid, phi, kappa, params.sigma, (-1, 1)))
        gx = (d_eta - d_zeta) / math.sqrt(2.0)
        gy = (d_eta + d_zeta) / math.sqrt(2.0)
        grads[0] = 0.5 * (grads[0] + gx)
        grads[1] = 0.5 * (grads[1] + gy)
    return grads


def interface_velocity(state, params=None):
    """
    V_n = -(∇T_l - ∇T_s)·n. Solid gradients are extended outwards and liquid
    gradients inwards with biharmonic extensions under Neumann boundaries.
    """
    if params is None:
        params = StefanParams(grid=state.T.grid)
    grid = state.T.grid
    solid = state.phi.values < 0
    bc = BcSpec.uniform(BoundaryKind.NEUMANN_ZERO, grid.ndim)
    grads = phase_gradients(state, params)
    n = normals(state.phi)
    maxit = 10 * max(grid.dims)

    jump = np.zeros(grid.dims)
    for axis in range(grid.ndim):
        g = grads[axis].reshape(grid.dims, order='F')
        extended = {}
        for name, known in (("solid", solid), ("liquid", ~solid)):
            mask = Mask(grid, known)
            if mask.n_unknown == 0:
                extended[name] = g
                continue
            if mask.n_known == 0:
                extended[name] = np.zeros(grid.dims)
                continue
            seeded = ScalarField(grid, np.where(known, g, 0.0))
            result, stats = extend(seeded, mask, bc, tol=params.extension_tol, maxit=maxit)
            extended[name] = result.values
        jump += (extended["liquid"] - extended["solid"]) * n[axis]
    return ScalarField(grid, -jump)


def _advect_substepped(phi, vn, dt):
    """Explicit level set step split into substeps that respect the CFL limit"""
    vmax = float(np.abs(vn.values).max())
    h = phi.grid.min_spacing
    substeps = max(1, math.ceil(dt * vmax / (ADVECT_CFL * h)))
    for _ in range(substeps):
        phi = advect(phi, vn, dt / substeps)
    return phi, substeps


def interface_temperature_error(state, params):
    """Max |T - (-σκ)| at linearly interpolated zero crossings of φ"""
    crossings = zero_crossings(state.phi)
    if len(crossings) == 0:
        raise ValueError("The level set has no zero crossing")
    T = state.T.flat()
    kappa = curvature(state.phi).flat()
    th = crossings.theta
    T_gamma = (1 - th) * T[crossings.node] + th * T[crossings.neighbour]
    k_gamma = (1 - th) * kappa[crossings.node] + th * kappa[crossings.neighbour]
    return float(np.abs(T_gamma + params.sigma * k_gamma).max())


def run(params, snapshot_every=1, out_dir=None, progress=True):
    """
    Time loop: heat step, interface velocity, advection, reinitialization.
    Snapshots go to `out_dir` in the field dump format with an index CSV.

    Returns:
        list of (t, phi, T) snapshots
    """
    if snapshot_every < 1:
        raise ValueError(f"snapshot_every must be >= 1, got {snapshot_every}")
    out_dir = Path(out_dir) if out_dir is not None else None
    state = init_state(params)
    snapshots = []
    index_rows = []
    n_steps = params.n_steps

    for step in tqdm(range(1, n_steps + 1), desc="Stefan", disable=not progress):
        t_next = step * params.dt
        try:
            T = heat_step(state, params)
            heated = StefanState(T, state.phi, state.t, state.step)
            vn = interface_velocity(heated, params)
            phi, substeps = _advect_substepped(state.phi, vn, params.dt)
            phi = reinitialize(phi, params.reinit_iterations)
        except (SolverError, ValueError) as e:
            logger.error(f"Stefan run aborted at t = {t_next:.4g}: {str(e)}")
            raise SolverError(f"Stefan run failed at t = {t_next:.4g}: {str(e)}") from e

        state = StefanState(T, phi, t_next, step)
        max_vn = float(np.abs(vn.values).max())
        if substeps > 1:
            logger.debug(f"Step {step}: {substeps} advection substeps (max|Vn| = {max_vn:.3g})")

        if step % snapshot_every == 0 or step == n_steps:
            snapshots.append((state.t, state.phi, state.T))
            filename = f"phi_{step:05d}.txt"
            if out_dir is not None:
                write_field(out_dir / filename, state.phi.field)
                write_field(out_dir / f"T_{step:05d}.txt", state.T)
            index_rows.append({
                'step': step,
                't': state.t,
                'filename': filename,
                'solid_node_count': state.solid_node_count,
                'max_abs_vn': max_vn,
            })

    if out_dir is not None:
        index_file = out_dir / "index.csv"
        pd.DataFrame(index_rows).to_csv(index_file, index=False)
        logger.info(f"Saved {len(index_rows)} Stefan snapshots to {out_dir}")
    return snapshots


def default_output_dir(params):
    return STEFAN_DIR / f"sigma{params.sigma:g}_beta{params.beta:g}_n{params.grid.dims[0]}"
