import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Tuple

import numpy as np
import scipy.fft as sfft
from scipy.linalg import eigh

from config import LEVEX_THREADS
from grid import BoundaryKind, fill_ghosts, MIN_NODES

# Cấu hình logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.INFO
)
logger = logging.getLogger(__name__)


class TransformFamily(str, Enum):
    """Họ biến đổi chéo hóa toán tử sai phân cấp hai 1D"""
    SINE_I = "sine_i"            # Dirichlet hai mặt
    COSINE_EVEN = "cosine_even"  # Neumann hai mặt (phản xạ nửa ô)
    FOURIER_REAL = "fourier_real"  # tuần hoàn (biến đổi Hartley)
    EIGEN_BASIS = "eigen_basis"  # Dirichlet/Neumann khác nhau trên hai mặt


_FAMILY_FACES = {
    TransformFamily.SINE_I: (BoundaryKind.DIRICHLET_ZERO, BoundaryKind.DIRICHLET_ZERO),
    TransformFamily.COSINE_EVEN: (BoundaryKind.NEUMANN_ZERO, BoundaryKind.NEUMANN_ZERO),
    TransformFamily.FOURIER_REAL: (BoundaryKind.PERIODIC, BoundaryKind.PERIODIC),
}


@dataclass(frozen=True)
class TransformKind:
    """Loại biến đổi cùng độ dài m của trục"""
    family: TransformFamily
    m: int
    faces: Tuple[BoundaryKind, BoundaryKind] = None

    def __post_init__(self):
        family = TransformFamily(self.family)
        if int(self.m) < MIN_NODES:
            raise ValueError(f"Độ dài biến đổi phải >= {MIN_NODES}, nhận được {self.m}")
        faces = self.faces
        if faces is None:
            if family == TransformFamily.EIGEN_BASIS:
                raise ValueError("EigenBasis cần chỉ rõ điều kiện biên hai mặt")
            faces = _FAMILY_FACES[family]
        faces = (BoundaryKind(faces[0]), BoundaryKind(faces[1]))
        object.__setattr__(self, 'family', family)
        object.__setattr__(self, 'm', int(self.m))
        object.__setattr__(self, 'faces', faces)

    @classmethod
    def for_faces(cls, low, high, m):
        """Chọn họ biến đổi phù hợp với cặp điều kiện biên của một trục"""
        low, high = BoundaryKind(low), BoundaryKind(high)
        for family, faces in _FAMILY_FACES.items():
            if faces == (low, high):
                return cls(family, m)
        return cls(TransformFamily.EIGEN_BASIS, m, (low, high))


@dataclass(frozen=True)
class EigenTable:
    """Trị riêng của toán tử sai phân cấp hai không thứ nguyên, theo thứ tự hệ số"""
    kind: TransformKind
    lam: np.ndarray = field(repr=False)

    @property
    def zero_modes(self):
        return int(np.count_nonzero(self.lam == 0.0))


def second_difference_matrix(kind):
    """
    Ma trận dày m x m của toán tử 2f_i - f_{i-1} - f_{i+1}, các nút ghost lấy
    theo đúng luật phản xạ của điều kiện biên.
    """
    m = kind.m
    L = np.empty((m, m))
    padded = np.zeros(m + 2)
    for j in range(m):
        padded[:] = 0.0
        padded[1 + j] = 1.0
        fill_ghosts(padded, 0, kind.faces[0], kind.faces[1], layers=1)
        L[:, j] = 2.0 * padded[1:-1] - padded[:-2] - padded[2:]
    return L


@lru_cache(maxsize=256)
def _eigen_basis(kind):
    lam, vecs = eigh(second_difference_matrix(kind))
    lam = np.clip(lam, 0.0, None)
    vecs.setflags(write=False)
    lam.setflags(write=False)
    return lam, vecs


@lru_cache(maxsize=256)
def laplacian_eigenvalues(kind):
    """Bảng trị riêng λ_k tương ứng với hệ số thứ k của forward()"""
    m = kind.m
    if kind.family == TransformFamily.SINE_I:
        lam = 2.0 * (1.0 - np.cos(np.arange(1, m + 1) * np.pi / (m + 1)))
    elif kind.family == TransformFamily.COSINE_EVEN:
        lam = 2.0 * (1.0 - np.cos(np.arange(m) * np.pi / m))
    elif kind.family == TransformFamily.FOURIER_REAL:
        lam = 2.0 * (1.0 - np.cos(2.0 * np.pi * np.arange(m) / m))
    else:
        lam = np.array(_eigen_basis(kind)[0])
    lam.setflags(write=False)
    return EigenTable(kind, lam)


def transform_matrix(kind):
    """Ma trận T của phép forward (forward(x) = T @ x), dùng làm oracle tổng trực tiếp"""
    m = kind.m
    n = np.arange(m)
    if kind.family == TransformFamily.SINE_I:
        return 2.0 * np.sin(np.pi * np.outer(n + 1, n + 1) / (m + 1))
    if kind.family == TransformFamily.COSINE_EVEN:
        return 2.0 * np.cos(np.pi * np.outer(n, 2 * n + 1) / (2 * m))
    if kind.family == TransformFamily.FOURIER_REAL:
        arg = 2.0 * np.pi * np.outer(n, n) / m
        return np.cos(arg) + np.sin(arg)
    return np.array(_eigen_basis(kind)[1].T)


def parseval_weights(kind):
    """Trọng số w sao cho Σ w_k c_k² = Σ x_n² với c = forward(x)"""
    m = kind.m
    if kind.family == TransformFamily.SINE_I:
        return np.full(m, 1.0 / (2 * (m + 1)))
    if kind.family == TransformFamily.COSINE_EVEN:
        w = np.full(m, 1.0 / (2 * m))
        w[0] = 1.0 / (4 * m)
        return w
    if kind.family == TransformFamily.FOURIER_REAL:
        return np.full(m, 1.0 / m)
    return np.ones(m)


def _check_length(kind, x, axis):
    if x.shape[axis] != kind.m:
        raise ValueError(f"Độ dài {x.shape[axis]} không khớp với biến đổi độ dài {kind.m}")


def forward_axis(kind, x, axis=0, workers=LEVEX_THREADS):
    """Biến đổi xuôi dọc theo một trục. Không chuẩn hóa; hằng số nằm ở inverse."""
    x = np.asarray(x, dtype=np.float64)
    _check_length(kind, x, axis)
    if kind.family == TransformFamily.SINE_I:
        return sfft.dst(x, type=1, axis=axis, workers=workers)
    if kind.family == TransformFamily.COSINE_EVEN:
        return sfft.dct(x, type=2, axis=axis, workers=workers)
    if kind.family == TransformFamily.FOURIER_REAL:
        X = sfft.fft(x, axis=axis, workers=workers)
        return X.real - X.imag
    vecs = _eigen_basis(kind)[1]
    return np.moveaxis(np.tensordot(vecs.T, x, axes=([1], [axis])), 0, axis)


def inverse_axis(kind, c, axis=0, workers=LEVEX_THREADS):
    """Biến đổi ngược dọc theo một trục; inverse_axis(forward_axis(x)) = x"""
    c = np.asarray(c, dtype=np.float64)
    _check_length(kind, c, axis)
    if kind.family == TransformFamily.SINE_I:
        return sfft.idst(c, type=1, axis=axis, workers=workers)
    if kind.family == TransformFamily.COSINE_EVEN:
        return sfft.idct(c, type=2, axis=axis, workers=workers)
    if kind.family == TransformFamily.FOURIER_REAL:
        # Hartley tự nghịch đảo, chia cho m
        X = sfft.fft(c, axis=axis, workers=workers)
        return (X.real - X.imag) / kind.m
    vecs = _eigen_basis(kind)[1]
    return np.moveaxis(np.tensordot(vecs, c, axes=([1], [axis])), 0, axis)


def forward(kind, x):
    """Biến đổi xuôi 1D của vector độ dài m"""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("forward() nhận vector 1D; dùng forward_nd cho mảng nhiều chiều")
    return forward_axis(kind, x, 0)


def inverse(kind, c):
    """Biến đổi ngược 1D của vector độ dài m"""
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 1:
        raise ValueError("inverse() nhận vector 1D; dùng inverse_nd cho mảng nhiều chiều")
    return inverse_axis(kind, c, 0)


def kinds_for_grid(dims, bc):
    """Danh sách TransformKind cho từng trục của lưới theo BcSpec"""
    if len(dims) != bc.ndim:
        raise ValueError(f"BcSpec có {bc.ndim} trục nhưng lưới có {len(dims)} trục")
    return tuple(TransformKind.for_faces(lo, hi, m) for (lo, hi), m in zip(bc.faces, dims))


def forward_nd(values, kinds, workers=LEVEX_THREADS):
    """Áp dụng biến đổi xuôi lần lượt trên mọi trục"""
    out = np.asarray(values, dtype=np.float64)
    for axis, kind in enumerate(kinds):
        out = forward_axis(kind, out, axis, workers)
    return out


def inverse_nd(coeffs, kinds, workers=LEVEX_THREADS):
    out = np.asarray(coeffs, dtype=np.float64)
    for axis, kind in enumerate(kinds):
        out = inverse_axis(kind, out, axis, workers)
    return out


@lru_cache(maxsize=64)
def eigenvalue_sum(kinds):
    """Σ_trục λ trên lưới hệ số (broadcast), trị riêng của Laplacian nhiều chiều"""
    total = np.zeros(tuple(k.m for k in kinds))
    for axis, kind in enumerate(kinds):
        shape = [1] * len(kinds)
        shape[axis] = kind.m
        total = total + laplacian_eigenvalues(kind).lam.reshape(shape)
    total.setflags(write=False)
    return total
