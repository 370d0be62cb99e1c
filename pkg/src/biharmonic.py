import logging
from dataclasses import dataclass

import numpy as np

from grid import ScalarField, fill_ghosts

# Cấu hình logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.INFO
)
logger = logging.getLogger(__name__)

GHOST_LAYERS = 2


@dataclass(frozen=True)
class PaddedField:
    """Giá trị trên lưới mở rộng dims + 4 (hai lớp ghost mỗi mặt)"""
    values: np.ndarray
    layers: int = GHOST_LAYERS

    @property
    def interior(self):
        g = self.layers
        return self.values[tuple(slice(g, -g) for _ in range(self.values.ndim))]


def _check_bc(shape, bc):
    if len(shape) != bc.ndim:
        raise ValueError(f"BcSpec có {bc.ndim} trục nhưng trường có {len(shape)} trục")


def pad_array(values, bc, layers=GHOST_LAYERS):
    """Đệm mảng theo luật biên, lần lượt từng trục để các góc nhất quán"""
    values = np.asarray(values, dtype=np.float64)
    _check_bc(values.shape, bc)
    padded = np.zeros(tuple(n + 2 * layers for n in values.shape))
    padded[tuple(slice(layers, -layers) for _ in values.shape)] = values
    for axis, (low, high) in enumerate(bc.faces):
        fill_ghosts(padded, axis, low, high, layers)
    return padded


def pad(field, bc):
    """Đệm ScalarField với hai lớp ghost mỗi mặt"""
    return PaddedField(pad_array(field.values, bc))


def _laplacian(p):
    """Laplacian không thứ nguyên 2d·f - Σ láng giềng, bỏ đi một lớp ở mỗi mặt"""
    nd = p.ndim
    core = tuple(slice(1, -1) for _ in range(nd))
    out = 2.0 * nd * p[core]
    for axis in range(nd):
        lo = list(core)
        hi = list(core)
        lo[axis] = slice(0, -2)
        hi[axis] = slice(2, None)
        out -= p[tuple(lo)] + p[tuple(hi)]
    return out


def biharmonic_array(values, bc):
    """
    Áp dụng toán tử biharmonic (Laplacian của Laplacian) lên mảng có shape
    dims. Trong 2D đây chính là stencil 13 điểm (20, -8, 2, 1).
    """
    return _laplacian(_laplacian(pad_array(values, bc)))


def apply_biharmonic(field, bc):
    return ScalarField(field.grid, biharmonic_array(field.values, bc))


def build_rhs(known, mask, bc):
    """
    Vế phải b = -B f_known, lấy tại các nút chưa biết.
    `known` phải bằng 0 tại mọi nút chưa biết.
    """
    if known.grid != mask.grid:
        raise ValueError("Trường và mask không cùng lưới")
    flat = known.flat()
    bad = np.flatnonzero(flat[mask.unknown_index] != 0.0)
    if bad.size:
        k = int(mask.unknown_index[bad[0]])
        raise ValueError(f"Nút chưa biết {k} {known.grid.multi_index(k)} có giá trị khác 0: {flat[k]}")
    b = -biharmonic_array(known.values, bc).ravel(order='F')[mask.unknown_index]
    logger.debug(f"Vế phải: {b.size} ẩn, |b|_inf = {np.abs(b).max() if b.size else 0.0:.3e}")
    return b


def embed(u, mask):
    """Đặt vector trên các nút chưa biết vào lưới đầy đủ, 0 tại nút đã biết"""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (mask.n_unknown,):
        raise ValueError(f"Độ dài vector {u.shape} không khớp với {mask.n_unknown} ẩn")
    full = np.zeros(mask.grid.size)
    full[mask.unknown_index] = u
    return full.reshape(mask.grid.dims, order='F')


def restrict(values, mask):
    """Lấy giá trị của mảng đầy đủ tại các nút chưa biết"""
    return np.asarray(values).ravel(order='F')[mask.unknown_index]


def matvec(u, mask, bc):
    """Tích ma trận-vector ma trận tự do của hệ biharmonic thu hẹp trên các ẩn"""
    return restrict(biharmonic_array(embed(u, mask), bc), mask)
