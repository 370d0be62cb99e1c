import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

# Cấu hình logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.INFO
)
logger = logging.getLogger(__name__)

# Stencil 13 điểm cần ít nhất 4 nút mỗi trục (cộng 2 lớp ghost mỗi mặt)
MIN_NODES = 4


class BoundaryKind(str, Enum):
    """Loại điều kiện biên trên một mặt của miền chữ nhật"""
    DIRICHLET_ZERO = "dirichlet"
    NEUMANN_ZERO = "neumann"
    PERIODIC = "periodic"


class Side(str, Enum):
    """Phía của mặt phân cách mà giá trị trường đã biết"""
    INSIDE_KNOWN = "inside"
    OUTSIDE_KNOWN = "outside"


def _index(ndim, axis, idx):
    """Tạo tuple chỉ số chọn `idx` trên trục `axis`"""
    sl = [slice(None)] * ndim
    sl[axis] = idx
    return tuple(sl)


@dataclass(frozen=True)
class Grid:
    """
    Lưới nút chữ nhật 2D/3D. Nút có chỉ số (i0, i1, ...) nằm tại
    origin + index * spacing. Mảng giá trị có shape == dims, trục 0 là x.
    """
    dims: Tuple[int, ...]
    origin: Tuple[float, ...]
    spacing: Tuple[float, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.dims)
        origin = tuple(float(o) for o in self.origin)
        spacing = tuple(float(h) for h in self.spacing)
        if len(dims) not in (2, 3):
            raise ValueError(f"Lưới phải có 2 hoặc 3 chiều, nhận được {len(dims)}")
        if len(origin) != len(dims) or len(spacing) != len(dims):
            raise ValueError("dims, origin và spacing phải có cùng số chiều")
        for axis, n in enumerate(dims):
            if n < MIN_NODES:
                raise ValueError(f"Trục {axis} có {n} nút, cần ít nhất {MIN_NODES}")
        for axis, h in enumerate(spacing):
            if not np.isfinite(h) or h <= 0:
                raise ValueError(f"Bước lưới trục {axis} phải dương, nhận được {h}")
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'origin', origin)
        object.__setattr__(self, 'spacing', spacing)

    @property
    def ndim(self):
        return len(self.dims)

    @property
    def size(self):
        return int(np.prod(self.dims))

    @property
    def extent(self):
        """Tọa độ nút cuối cùng trên mỗi trục"""
        return tuple(o + (n - 1) * h for o, n, h in zip(self.origin, self.dims, self.spacing))

    @property
    def h(self):
        """Bước lưới lớn nhất, dùng để đo bề rộng dải"""
        return max(self.spacing)

    @property
    def min_spacing(self):
        return min(self.spacing)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def axis_coords(self, axis):
        return self.origin[axis] + np.arange(self.dims[axis]) * self.spacing[axis]

    def coords(self):
        """Tọa độ của tất cả các nút (meshgrid kiểu 'ij')"""
        return np.meshgrid(*[self.axis_coords(a) for a in range(self.ndim)], indexing='ij')

    def linear_index(self, multi_index):
        """Chỉ số tuyến tính theo quy ước trục 0 chạy nhanh nhất"""
        return int(np.ravel_multi_index(tuple(multi_index), self.dims, order='F'))

    def multi_index(self, k):
        return tuple(int(i) for i in np.unravel_index(int(k), self.dims, order='F'))

    def node_coords(self, k):
        idx = self.multi_index(k)
        return tuple(self.origin[a] + idx[a] * self.spacing[a] for a in range(self.ndim))


@dataclass(frozen=True)
class ScalarField:
    """Giá trị thực tại mọi nút của lưới; bất biến sau khi tạo"""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1 and values.size == self.grid.size and self.grid.ndim > 1:
            values = values.reshape(self.grid.dims, order='F')
        if values.shape != self.grid.dims:
            raise ValueError(f"Kích thước giá trị {values.shape} không khớp với lưới {self.grid.dims}")
        bad = ~np.isfinite(values)
        if bad.any():
            k = int(np.flatnonzero(bad.ravel(order='F'))[0])
            raise ValueError(f"Giá trị không hữu hạn tại nút {k} {self.grid.multi_index(k)}")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.dims))

    def flat(self):
        """Giá trị theo thứ tự tuyến tính (trục 0 chạy nhanh nhất)"""
        return self.values.ravel(order='F')

    def with_values(self, values):
        return ScalarField(self.grid, values)


@dataclass(frozen=True)
class Mask:
    """
    Phân hoạch các nút thành đã biết (known) và cần mở rộng (unknown).
    unknown_index là danh sách tăng dần các chỉ số tuyến tính của nút unknown.
    """
    grid: Grid
    known: np.ndarray
    unknown_index: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        known = np.array(self.known, dtype=bool)
        if known.ndim == 1 and known.size == self.grid.size:
            known = known.reshape(self.grid.dims, order='F')
        if known.shape != self.grid.dims:
            raise ValueError(f"Kích thước mask {known.shape} không khớp với lưới {self.grid.dims}")
        known.setflags(write=False)
        unknown_index = np.flatnonzero(~known.ravel(order='F')).astype(np.int64)
        unknown_index.setflags(write=False)
        object.__setattr__(self, 'known', known)
        object.__setattr__(self, 'unknown_index', unknown_index)

    @classmethod
    def from_known(cls, grid, known):
        return cls(grid, known)

    @classmethod
    def from_unknown_index(cls, grid, unknown_index):
        known = np.ones(grid.size, dtype=bool)
        known[np.asarray(unknown_index, dtype=np.int64)] = False
        return cls(grid, known)

    @property
    def n_unknown(self):
        return int(self.unknown_index.size)

    @property
    def n_known(self):
        return self.grid.size - self.n_unknown

    @property
    def unknown(self):
        return ~self.known

    @property
    def is_nontrivial(self):
        return self.n_known > 0 and self.n_unknown > 0

    def require_nontrivial(self):
        if self.n_known == 0:
            raise ValueError("Mask không có nút đã biết nào")
        if self.n_unknown == 0:
            raise ValueError("Mask không có nút cần mở rộng nào")

    def complement(self):
        return Mask(self.grid, ~self.known)

    def intersect(self, other):
        if other.grid != self.grid:
            raise ValueError("Hai mask không cùng lưới")
        return Mask(self.grid, self.known & other.known)

    def marked_index(self):
        """Chỉ số tuyến tính của các nút được đánh dấu (known = True)"""
        return np.flatnonzero(self.known.ravel(order='F'))


@dataclass(frozen=True)
class BcSpec:
    """Điều kiện biên cho từng trục: cặp (mặt thấp, mặt cao)"""
    faces: Tuple[Tuple[BoundaryKind, BoundaryKind], ...]

    def __post_init__(self):
        faces = tuple((BoundaryKind(lo), BoundaryKind(hi)) for lo, hi in self.faces)
        for axis, (lo, hi) in enumerate(faces):
            if (lo == BoundaryKind.PERIODIC) != (hi == BoundaryKind.PERIODIC):
                raise ValueError(f"Trục {axis}: biên tuần hoàn phải áp dụng cho cả hai mặt")
        object.__setattr__(self, 'faces', faces)

    @classmethod
    def uniform(cls, kind, ndim):
        kind = BoundaryKind(kind)
        return cls(tuple((kind, kind) for _ in range(ndim)))

    @classmethod
    def from_name(cls, name, ndim):
        """
        dirichlet | neumann | periodic | mixed.
        mixed: Neumann trên trục 0 (hai cạnh bên), Dirichlet trên các trục còn lại.
        """
        name = name.lower()
        if name == "mixed":
            faces = [(BoundaryKind.NEUMANN_ZERO, BoundaryKind.NEUMANN_ZERO)]
            faces += [(BoundaryKind.DIRICHLET_ZERO, BoundaryKind.DIRICHLET_ZERO)] * (ndim - 1)
            return cls(tuple(faces))
        try:
            return cls.uniform(BoundaryKind(name), ndim)
        except ValueError:
            raise ValueError(f"Điều kiện biên không hợp lệ: {name}")

    @property
    def ndim(self):
        return len(self.faces)

    @property
    def has_dirichlet(self):
        return any(BoundaryKind.DIRICHLET_ZERO in pair for pair in self.faces)

    def axis(self, a):
        return self.faces[a]

    def describe(self):
        return ",".join(f"{lo.value}/{hi.value}" for lo, hi in self.faces)


@dataclass(frozen=True)
class LevelSet:
    """Hàm level set φ: φ < 0 trong Ω (trường đã biết), φ > 0 trong D\\Ω"""
    field: ScalarField

    @classmethod
    def from_function(cls, grid, fn):
        return cls(sample(grid, fn))

    @classmethod
    def from_values(cls, grid, values):
        return cls(ScalarField(grid, values))

    @property
    def grid(self):
        return self.field.grid

    @property
    def values(self):
        return self.field.values

    def negated(self):
        return LevelSet(ScalarField(self.grid, -self.values))

    def has_interface(self):
        v = self.values
        return bool((v.min() < 0 < v.max()) or np.any(v == 0))


def make_grid(extents, dims, periodic=None):
    """
    Tạo lưới từ khoảng [lo, hi] và số nút trên mỗi trục.
    Bước lưới: (hi - lo) / (dims - 1) trên trục thường, (hi - lo) / dims trên trục tuần hoàn.

    Args:
        extents: danh sách (lo, hi) cho từng trục
        dims: số nút trên từng trục (>= 4)
        periodic: trục nào tuần hoàn; khi đó nút hi trùng với nút lo
            nên bước lưới là (hi - lo) / dims

    Returns:
        Grid
    """
    extents = [tuple(map(float, e)) for e in extents]
    dims = [int(n) for n in dims]
    if len(extents) != len(dims):
        raise ValueError("extents và dims phải có cùng số chiều")
    if periodic is None:
        periodic = [False] * len(dims)
    spacing = []
    for axis, ((lo, hi), n) in enumerate(zip(extents, dims)):
        if not (np.isfinite(lo) and np.isfinite(hi)) or hi <= lo:
            raise ValueError(f"Trục {axis}: khoảng [{lo}, {hi}] suy biến")
        if n < MIN_NODES:
            raise ValueError(f"Trục {axis} có {n} nút, cần ít nhất {MIN_NODES}")
        spacing.append((hi - lo) / n if periodic[axis] else (hi - lo) / (n - 1))
    return Grid(tuple(dims), tuple(lo for lo, _ in extents), tuple(spacing))


def sample(grid, fn, where=None):
    """
    Lấy mẫu hàm fn(x, y[, z]) tại các nút. fn nhận mảng tọa độ (vector hóa).
    Nếu có `where`, chỉ các nút được chọn được đánh giá, còn lại bằng 0.
    """
    coords = grid.coords()
    with np.errstate(all='ignore'):
        values = np.broadcast_to(np.asarray(fn(*coords), dtype=np.float64), grid.dims).copy()
    if where is not None:
        selected = where.known if isinstance(where, Mask) else np.asarray(where, dtype=bool)
        values[~selected] = 0.0
    bad = ~np.isfinite(values)
    if bad.any():
        k = int(np.flatnonzero(bad.ravel(order='F'))[0])
        raise ValueError(f"Hàm cho giá trị không hữu hạn tại nút {k}, tọa độ {grid.node_coords(k)}")
    return ScalarField(grid, values)


def mask_from_levelset(phi, side=Side.INSIDE_KNOWN):
    """
    Xác định nút đã biết từ dấu của φ. Nút có φ = 0 luôn được xem là đã biết.
    """
    side = Side(side)
    v = phi.values
    known = (v <= 0) if side == Side.INSIDE_KNOWN else (v >= 0)
    mask = Mask(phi.grid, known)
    if mask.n_known == 0:
        raise ValueError("Không có nút đã biết nào ở phía được chọn của mặt phân cách")
    if mask.n_unknown == 0:
        raise ValueError("Tất cả các nút đều đã biết, không có gì để mở rộng")
    logger.debug(f"Mask: {mask.n_known} nút đã biết, {mask.n_unknown} nút cần mở rộng")
    return mask


def interface_band(phi, cells):
    """Đánh dấu (known = True) các nút có |φ| <= cells * max(spacing)"""
    if cells < 0:
        raise ValueError(f"Bề rộng dải phải không âm, nhận được {cells}")
    width = cells * phi.grid.h
    return Mask(phi.grid, np.abs(phi.values) <= width)


def fill_ghosts(padded, axis, low, high, layers=2):
    """
    Điền các lớp ghost trên trục `axis` của mảng đã đệm theo luật biên.

    - DirichletZero: nút biên ảo nằm ở lớp ghost trong cùng (giá trị 0),
      các lớp ngoài là phản xạ lẻ qua nút đó.
    - NeumannZero: phản xạ chẵn qua nửa ô (ghost_1 = f_0, ghost_2 = f_1).
    - Periodic: quấn vòng.
    Các lớp được điền tại chỗ; trả về chính mảng đó.
    """
    g = layers
    nd = padded.ndim
    m = padded.shape[axis] - 2 * g
    if m < g:
        raise ValueError(f"Trục {axis} quá ngắn cho {g} lớp ghost")
    low = BoundaryKind(low)
    high = BoundaryKind(high)

    if low == BoundaryKind.DIRICHLET_ZERO:
        padded[_index(nd, axis, g - 1)] = 0.0
        for j in range(1, g):
            padded[_index(nd, axis, g - 1 - j)] = -padded[_index(nd, axis, g - 1 + j)]
    elif low == BoundaryKind.NEUMANN_ZERO:
        for j in range(g):
            padded[_index(nd, axis, g - 1 - j)] = padded[_index(nd, axis, g + j)]
    else:
        for j in range(g):
            padded[_index(nd, axis, g - 1 - j)] = padded[_index(nd, axis, g + m - 1 - j)]

    if high == BoundaryKind.DIRICHLET_ZERO:
        padded[_index(nd, axis, g + m)] = 0.0
        for j in range(1, g):
            padded[_index(nd, axis, g + m + j)] = -padded[_index(nd, axis, g + m - j)]
    elif high == BoundaryKind.NEUMANN_ZERO:
        for j in range(g):
            padded[_index(nd, axis, g + m + j)] = padded[_index(nd, axis, g + m - 1 - j)]
    else:
        for j in range(g):
            padded[_index(nd, axis, g + m + j)] = padded[_index(nd, axis, g + j)]
    return padded
