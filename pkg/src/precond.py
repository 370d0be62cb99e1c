import logging
from dataclasses import dataclass

import numpy as np

from config import LEVEX_THREADS
from biharmonic import embed, restrict
from transforms import kinds_for_grid, forward_nd, inverse_nd, eigenvalue_sum

# Cấu hình logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.INFO
)
logger = logging.getLogger(__name__)


def full_grid_solve(values, bc, workers=LEVEX_THREADS):
    """
    Giải đúng L² x = values trên toàn bộ hình chữ nhật bằng chéo hóa kép.
    Hệ số của mode hằng (trị riêng 0) được đặt bằng 0.
    """
    values = np.asarray(values, dtype=np.float64)
    kinds = kinds_for_grid(values.shape, bc)
    coeffs = forward_nd(values, kinds, workers)
    denom = eigenvalue_sum(kinds) ** 2
    coeffs = np.divide(coeffs, denom, out=np.zeros_like(coeffs), where=denom > 0)
    return inverse_nd(coeffs, kinds, workers)


def apply_precond(b, mask, bc, workers=LEVEX_THREADS):
    """
    Tiền điều kiện Poisson nhanh: nhúng b vào lưới đầy đủ (0 tại nút đã biết),
    giải bình phương Laplacian trên hình chữ nhật, rồi thu hẹp lại.
    """
    return restrict(full_grid_solve(embed(b, mask), bc, workers), mask)


@dataclass(frozen=True)
class SpdCheckResult:
    """Class kết quả kiểm tra tính đối xứng và xác định dương của tiền điều kiện"""
    passed: bool
    trials: int
    detail: str = ""

    def __bool__(self):
        return self.passed


def precond_is_spd_check(mask, bc, trials=20, seed=0, rtol=1e-12):
    """
    Kiểm tra ngẫu nhiên: <Mu, v> = <u, Mv> và <Mu, u> > 0 trên `trials` cặp.
    trials = 0 luôn đạt.
    """
    rng = np.random.default_rng(seed)
    n = mask.n_unknown
    for t in range(trials):
        u = rng.standard_normal(n)
        v = rng.standard_normal(n)
        Mu = apply_precond(u, mask, bc)
        Mv = apply_precond(v, mask, bc)
        lhs = float(Mu @ v)
        rhs = float(u @ Mv)
        scale = max(np.linalg.norm(Mu) * np.linalg.norm(v), np.linalg.norm(u) * np.linalg.norm(Mv), 1e-300)
        if abs(lhs - rhs) > rtol * scale:
            detail = f"lần thử {t}: <Mu,v> = {lhs:.17g}, <u,Mv> = {rhs:.17g}"
            logger.warning(f"Tiền điều kiện không đối xứng ({bc.describe()}): {detail}")
            return SpdCheckResult(False, t + 1, detail)
        energy = float(Mu @ u)
        if not energy > 0:
            detail = f"lần thử {t}: <Mu,u> = {energy:.17g}"
            logger.warning(f"Tiền điều kiện không xác định dương ({bc.describe()}): {detail}")
            return SpdCheckResult(False, t + 1, detail)
    return SpdCheckResult(True, trials)
