import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.spatial import cKDTree

from config import DEFAULT_SEED
from grid import (
    Grid, ScalarField, Mask, BcSpec, BoundaryKind, LevelSet, Side,
    make_grid, sample, mask_from_levelset,
)
from levelset import signed_distance_peanut, signed_distance_annulus

# Cấu hình logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.INFO
)
logger = logging.getLogger(__name__)

EXAMPLES = (1, 2, 3, 4, 5)

# Số mẫu trên một chu kỳ của đường cong hình sin và số bước Newton
CURVE_SAMPLES = 20000
NEWTON_STEPS = 4


@dataclass
class BenchmarkCase:
    """
    Class mô tả một bài kiểm tra mở rộng: lưới, φ giải tích, trường tham chiếu,
    trường đã biết (0 tại nút chưa biết), mask, điều kiện biên và các vùng đo sai số.
    """
    name: str
    grid: Grid
    phi: LevelSet
    reference: ScalarField
    known: ScalarField
    mask: Mask
    bc: BcSpec
    # nhãn vùng -> Mask giới hạn (None = toàn bộ dải)
    regions: Dict[str, Optional[Mask]] = field(default_factory=lambda: {"": None})

    @property
    def label(self):
        return "x".join(str(n) for n in self.grid.dims)


def _periodic_axes(bc):
    return tuple(lo == BoundaryKind.PERIODIC for lo, _ in bc.faces)


def _assemble(name, grid, phi_fn, ref_fn, bc, where=None, regions=None):
    phi = LevelSet(sample(grid, phi_fn))
    reference = sample(grid, ref_fn, where=where)
    mask = mask_from_levelset(phi, Side.INSIDE_KNOWN)
    known = ScalarField(grid, np.where(mask.known, reference.values, 0.0))
    logger.debug(f"{name} {grid.dims}: {mask.n_known} nút đã biết, {mask.n_unknown} ẩn, biên {bc.describe()}")
    return BenchmarkCase(name, grid, phi, reference, known, mask, bc, regions or {"": None})


def example1(n, bc_name="dirichlet"):
    """Hạt đậu 2D trên [-π, π]², f = cos(x) sin(y)"""
    bc = BcSpec.from_name(bc_name, 2)
    grid = make_grid([(-math.pi, math.pi)] * 2, (n, n), periodic=_periodic_axes(bc))
    return _assemble("example1", grid, signed_distance_peanut(),
                     lambda x, y: np.cos(x) * np.sin(y), bc)


def example2(n, bc_name="periodic"):
    """Hạt đậu 3D trên [-π, π]³, f = cos(x) sin(y) sin(π/4 - z)"""
    bc = BcSpec.from_name(bc_name, 3)
    grid = make_grid([(-math.pi, math.pi)] * 3, (n, n, n), periodic=_periodic_axes(bc))
    return _assemble("example2", grid, signed_distance_peanut(),
                     lambda x, y, z: np.cos(x) * np.sin(y) * np.sin(math.pi / 4 - z), bc)


def _annulus_reference(x, y):
    return y / np.log(1.0 + np.sqrt(x ** 2 + y ** 2))


def example3(n, bc_name="neumann", half_grid=False):
    """
    Hình vành khăn 1/2 < r < 1 trên [-2, 2]², f = y / log(1 + r).
    half_grid: chỉ giải nửa x > 0, bắt đầu cách trục đối xứng nửa ô,
    với Neumann trên mặt x thấp.
    """
    if half_grid and n % 2:
        raise ValueError(f"Lưới nửa miền cần n chẵn, nhận được {n}")
    bc = BcSpec.from_name(bc_name, 2)
    full = make_grid([(-2.0, 2.0)] * 2, (n, n), periodic=_periodic_axes(bc))
    if half_grid:
        if bc.faces[0][0] != BoundaryKind.NEUMANN_ZERO:
            raise ValueError("Lưới nửa miền cần Neumann trên trục x")
        h = full.spacing[0]
        grid = Grid((n - n // 2, n), (full.origin[0] + (n // 2) * h, full.origin[1]), full.spacing)
    else:
        grid = full
    r = np.sqrt(sum(c ** 2 for c in grid.coords()))
    regions = {
        "outside": Mask(grid, r >= 0.75),
        "inside": Mask(grid, r < 0.75),
    }
    return _assemble("example3", grid, signed_distance_annulus(), _annulus_reference, bc,
                     where=r > 0, regions=regions)


@dataclass(frozen=True)
class SineInterface:
    """x_Γ(y) = center + Σ a_k sin(2πky + ω_k)"""
    amplitudes: tuple
    phases: tuple
    center: float = 1.5

    @classmethod
    def random(cls, terms, seed=DEFAULT_SEED):
        rng = np.random.default_rng(seed)
        amplitudes = rng.uniform(-0.05, 0.05, size=terms)
        phases = rng.uniform(0.0, 2.0 * math.pi, size=terms)
        return cls(tuple(amplitudes.tolist()), tuple(phases.tolist()))

    def _terms(self):
        return [(2 * math.pi * (k + 1), a, w) for k, (a, w) in enumerate(zip(self.amplitudes, self.phases))]

    def position(self, y):
        return self.center + sum(a * np.sin(k * y + w) for k, a, w in self._terms())

    def slope(self, y):
        return sum(a * k * np.cos(k * y + w) for k, a, w in self._terms())

    def bend(self, y):
        return sum(-a * k ** 2 * np.sin(k * y + w) for k, a, w in self._terms())

    def level_set(self, periodic=True, samples=CURVE_SAMPLES):
        """
        Khoảng cách có dấu tới đường cong, âm bên trái. Điểm gần nhất lấy từ
        cKDTree trên các mẫu của đường cong rồi tinh chỉnh bằng Newton theo y.
        periodic: đường cong lặp lại theo chu kỳ 1 theo y; ngược lại chỉ xét
        đoạn y ∈ [0, 1].
        """
        if periodic:
            s = np.linspace(-1.0, 2.0, 3 * samples, endpoint=False)
            s_lo, s_hi = -1.0, 2.0
        else:
            s = np.linspace(0.0, 1.0, samples + 1)
            s_lo, s_hi = 0.0, 1.0
        tree = cKDTree(np.column_stack([self.position(s), s]))

        def fn(x, y):
            points = np.column_stack([np.ravel(x), np.ravel(y)])
            _, nearest = tree.query(points)
            px, py = points[:, 0], points[:, 1]
            t = s[nearest]
            for _ in range(NEWTON_STEPS):
                dx = px - self.position(t)
                dy = py - t
                x1 = self.slope(t)
                grad = -dx * x1 - dy
                hess = x1 ** 2 - dx * self.bend(t) + 1.0
                step = np.where(hess > 0, grad / np.where(hess > 0, hess, 1.0), 0.0)
                t = np.clip(t - step, s_lo, s_hi)
            dist = np.hypot(px - self.position(t), py - t)
            sign = np.sign(px - self.position(py))
            return (sign * dist).reshape(np.shape(x))
        return fn


def example4(n, terms=10, variant="periodic", seed=DEFAULT_SEED):
    """
    Miền [0, 3] x [0, 1], lưới 3n x n, mặt phân cách hình sin ngẫu nhiên.
    periodic: tuần hoàn trên/dưới, f = x + cos(2π(y - 1/4))/5;
    channel: Neumann trên/dưới, f = x + cos(πy)/5. Hai cạnh bên luôn Neumann.
    φ là khoảng cách thật tới đường cong nên dải sai số rộng đúng 4 ô.
    """
    interface = SineInterface.random(terms, seed)
    if variant == "periodic":
        bc = BcSpec(((BoundaryKind.NEUMANN_ZERO, BoundaryKind.NEUMANN_ZERO),
                     (BoundaryKind.PERIODIC, BoundaryKind.PERIODIC)))
        reference = lambda x, y: x + np.cos(2 * math.pi * (y - 0.25)) / 5
    elif variant == "channel":
        bc = BcSpec.uniform(BoundaryKind.NEUMANN_ZERO, 2)
        reference = lambda x, y: x + np.cos(math.pi * y) / 5
    else:
        raise ValueError(f"Biến thể không hợp lệ: {variant}")
    grid = make_grid([(0.0, 3.0), (0.0, 1.0)], (3 * n, n), periodic=_periodic_axes(bc))
    level_set = interface.level_set(periodic=variant == "periodic")
    return _assemble(f"example4_{variant}_{terms}", grid, level_set, reference, bc)


def build_case(example, n, bc_name=None, **kwargs):
    """Dựng ví dụ 1-4 theo số thứ tự"""
    builders = {1: example1, 2: example2, 3: example3}
    if example in builders:
        return builders[example](n, bc_name or _DEFAULT_BC[example], **kwargs)
    if example == 4:
        return example4(n, **kwargs)
    raise ValueError(f"Không có ví dụ mở rộng số {example}")


_DEFAULT_BC = {1: "dirichlet", 2: "periodic", 3: "neumann"}

DEFAULT_GRIDS = {
    1: [128, 256, 512],
    2: [32, 64],
    3: [128, 256, 512],
    4: [64, 128, 256],
    5: [200],
}
