import logging
from enum import Enum

import numpy as np

from config import EXTRAP_BAND_CELLS, EXTRAP_CFL
from grid import ScalarField
from solver import SolverError

# Cấu hình logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.INFO
)
logger = logging.getLogger(__name__)

GRADIENT_FLOOR = 1e-12
STALL_TOL = 1e-8


class ExtrapolationOrder(str, Enum):
    CONSTANT = "constant"
    LINEAR = "linear"
    QUADRATIC = "quadratic"


class PseudoTimeScheme(str, Enum):
    EULER = "euler"
    RK3 = "rk3"


def normals(phi):
    """
    Unit normals n = ∇φ / |∇φ| from central differences.
    Returns an array of shape (ndim, *dims).
    """
    grads = np.array(np.gradient(phi.values, *phi.grid.spacing))
    norm = np.maximum(np.sqrt((grads ** 2).sum(axis=0)), GRADIENT_FLOOR)
    return grads / norm


def _take(q, axis, start, stop):
    sl = [slice(None)] * q.ndim
    sl[axis] = slice(start, stop)
    return q[tuple(sl)]


def _neighbour(arr, axis, offset, fill):
    """arr shifted so that out[i] = arr[i + offset]; out-of-grid entries get `fill`"""
    out = np.full(arr.shape, fill, dtype=arr.dtype)
    m = arr.shape[axis]
    if offset > 0:
        dst = [slice(None)] * arr.ndim
        dst[axis] = slice(0, m - offset)
        out[tuple(dst)] = _take(arr, axis, offset, m)
    else:
        dst = [slice(None)] * arr.ndim
        dst[axis] = slice(-offset, m)
        out[tuple(dst)] = _take(arr, axis, 0, m + offset)
    return out


def _edge_index(shape, axis):
    idx_shape = [1] * len(shape)
    idx_shape[axis] = shape[axis]
    return np.arange(shape[axis]).reshape(idx_shape)


def directional_derivative(q, valid, n, spacing):
    """
    n·∇q from central differences, defined only where the whole stencil is
    valid. On the domain edge the missing neighbour is replaced by a
    second-order one-sided difference into the grid. Nodes next to an
    invalid node get no derivative and are left to the extrapolation.

    Returns:
        (derivative, valid mask of the derivative)
    """
    total = np.zeros(q.shape)
    ok = valid.copy()
    for axis, h in enumerate(spacing):
        m = q.shape[axis]
        idx = _edge_index(q.shape, axis)
        at_low = idx == 0
        at_high = idx == m - 1
        vm1 = _neighbour(valid, axis, -1, False)
        vp1 = _neighbour(valid, axis, 1, False)
        vm2 = _neighbour(valid, axis, -2, False)
        vp2 = _neighbour(valid, axis, 2, False)
        qm1 = _neighbour(q, axis, -1, 0.0)
        qp1 = _neighbour(q, axis, 1, 0.0)
        qm2 = _neighbour(q, axis, -2, 0.0)
        qp2 = _neighbour(q, axis, 2, 0.0)

        central = vm1 & vp1
        low_edge = at_low & vp1 & vp2
        high_edge = at_high & vm1 & vm2
        d = np.where(central, (qp1 - qm1) / (2.0 * h), 0.0)
        d = np.where(low_edge, (-3.0 * q + 4.0 * qp1 - qp2) / (2.0 * h), d)
        d = np.where(high_edge, (3.0 * q - 4.0 * qm1 + qm2) / (2.0 * h), d)
        total += n[axis] * d
        ok &= central | low_edge | high_edge
    return np.where(ok, total, 0.0), ok


def _upwind_rate(q, n, spacing, upwind_order):
    """n·∇q with upwind differences chosen per axis by the sign of n_a"""
    rate = np.zeros(q.shape)
    for axis, h in enumerate(spacing):
        m = q.shape[axis]
        idx = _edge_index(q.shape, axis)

        qm1 = _neighbour(q, axis, -1, 0.0)
        qp1 = _neighbour(q, axis, 1, 0.0)
        dm = np.where(idx >= 1, (q - qm1) / h, 0.0)
        dp = np.where(idx <= m - 2, (qp1 - q) / h, 0.0)
        if upwind_order == 2:
            qm2 = _neighbour(q, axis, -2, 0.0)
            qp2 = _neighbour(q, axis, 2, 0.0)
            dm = np.where(idx >= 2, (3.0 * q - 4.0 * qm1 + qm2) / (2.0 * h), dm)
            dp = np.where(idx <= m - 3, (-3.0 * q + 4.0 * qp1 - qp2) / (2.0 * h), dp)
        rate += np.maximum(n[axis], 0.0) * dm + np.minimum(n[axis], 0.0) * dp
    return rate


def _march(q, valid, update, n, spacing, steps, cfl, upwind_order, source=None,
           scheme=PseudoTimeScheme.EULER):
    """
    Advect q along n to steady state on `update` nodes:
    q_τ = -(n·∇q - source). Other nodes are frozen.
    """
    h = min(spacing)
    dtau = cfl * h if upwind_order == 1 else cfl * h / len(spacing)
    q = np.where(update, 0.0, q)
    data = q[valid]
    scale = float(np.ptp(data)) if data.size else 0.0
    if scale == 0.0:
        scale = max(float(np.abs(data).max()) if data.size else 0.0, 1.0)
    src = 0.0 if source is None else source

    def euler(v):
        return v + dtau * np.where(update, -(_upwind_rate(v, n, spacing, upwind_order) - src), 0.0)

    step = 0
    for step in range(1, steps + 1):
        if scheme == PseudoTimeScheme.RK3:
            q1 = euler(q)
            q2 = 0.75 * q + 0.25 * euler(q1)
            q_next = q / 3.0 + 2.0 / 3.0 * euler(q2)
        else:
            q_next = euler(q)
        change = float(np.abs(q_next - q).max())
        if not np.isfinite(change):
            raise SolverError(f"Non-finite extrapolation update at pseudo-step {step}")
        q = q_next
        if change < STALL_TOL * scale:
            break
    logger.debug(f"Extrapolation stage ({scheme.value}, upwind order {upwind_order}) "
                 f"stopped after {step} pseudo-steps")
    return q


def extrapolate(f, phi, order=ExtrapolationOrder.CONSTANT, steps=None, cfl=EXTRAP_CFL,
                band_cells=EXTRAP_BAND_CELLS, upwind_order=None, scheme=PseudoTimeScheme.EULER):
    """
    Extrapolate f from {φ <= 0} into {φ > 0} by pseudo-time advection along
    the normal. Linear and quadratic orders first extrapolate the normal
    derivatives and feed them back as source terms.

    Stages march with forward Euler and first-order upwinding, except the
    value stage of the quadratic cascade, which upwinds to second order.
    `upwind_order` forces one order on every stage; `scheme="rk3"` swaps
    forward Euler for three-stage TVD Runge-Kutta.

    Only nodes with φ > 0 and |φ| <= band_cells * h are updated; nodes
    beyond the band keep their input values.
    """
    order = ExtrapolationOrder(order)
    scheme = PseudoTimeScheme(scheme)
    if f.grid != phi.grid:
        raise ValueError("f and phi live on different grids")
    if steps is None:
        steps = 4 * max(f.grid.dims)
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if not 0 < cfl <= 0.5:
        raise ValueError(f"cfl must lie in (0, 0.5], got {cfl}")
    if upwind_order is not None and upwind_order not in (1, 2):
        raise ValueError(f"upwind_order must be 1 or 2, got {upwind_order}")

    grid = f.grid
    spacing = grid.spacing
    n = normals(phi)
    band = np.abs(phi.values) <= band_cells * grid.h
    known = phi.values <= 0
    derivative_order = upwind_order or 1
    value_order = upwind_order or (2 if order == ExtrapolationOrder.QUADRATIC else 1)

    def stage(q, valid, source, p):
        return _march(q, valid, ~valid & band, n, spacing, steps, cfl, p, source, scheme)

    values = f.values
    if order == ExtrapolationOrder.CONSTANT:
        out = stage(values, known, None, value_order)
    elif order == ExtrapolationOrder.LINEAR:
        g, g_valid = directional_derivative(values, known, n, spacing)
        g_ext = stage(g, g_valid, None, derivative_order)
        out = stage(values, known, g_ext, value_order)
    else:
        g, g_valid = directional_derivative(values, known, n, spacing)
        gg, gg_valid = directional_derivative(g, g_valid, n, spacing)
        gg_ext = stage(gg, gg_valid, None, derivative_order)
        g_ext = stage(g, g_valid, gg_ext, derivative_order)
        out = stage(values, known, g_ext, value_order)

    result = np.where(known | ~band, values, out)
    logger.debug(f"Extrapolated ({order.value}, {scheme.value}) over "
                 f"{int(np.count_nonzero(band & ~known))} band nodes")
    return ScalarField(grid, result)
