import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigvalsh_tridiagonal, LinAlgError

from config import DEFAULT_TOL, DENSE_CAP, CONDITION_MAXIT
from grid import ScalarField
from biharmonic import build_rhs, matvec
from precond import apply_precond

# Cấu hình logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.INFO
)
logger = logging.getLogger(__name__)

# Số vòng lặp tối thiểu để ước lượng số điều kiện (trừ khi CG đã hội tụ)
MIN_CONDITION_ITERATIONS = 5


class SolverError(RuntimeError):
    """Lỗi số học: hệ suy biến, giá trị không hữu hạn, phương trình nhiệt không hội tụ"""
    pass


class Method(str, Enum):
    PCG_FAST_POISSON = "pcg_fast_poisson"
    PCG_PLAIN = "pcg_plain"
    DENSE = "dense"


@dataclass
class SolveStats:
    """Class thống kê của một lần giải"""
    iterations: int = 0
    relative_residual: float = 0.0
    residual_history: List[float] = field(default_factory=list)
    cg_alpha_beta: List[Tuple[float, float]] = field(default_factory=list)
    converged: bool = True
    method: str = ""

    def to_row(self):
        return {
            'method': self.method,
            'iterations': self.iterations,
            'relative_residual': self.relative_residual,
            'converged': self.converged,
        }


def pcg(apply_A, apply_M, b, tol=DEFAULT_TOL, maxit=100):
    """
    Gradient liên hợp có tiền điều kiện, x0 = 0.

    Dừng khi |b - Ax| / |b| <= tol (chuẩn Euclid) hoặc hết maxit vòng lặp.
    Hết maxit không phải là lỗi: trả về x hiện tại với converged = False.
    Các hệ số alpha, beta được lưu lại để ước lượng trị riêng (Lanczos).

    Returns:
        (x, SolveStats)
    """
    if tol <= 0:
        raise ValueError(f"tol phải dương, nhận được {tol}")
    if apply_M is None:
        def apply_M(r):
            return r

    b = np.asarray(b, dtype=np.float64)
    x = np.zeros_like(b)
    stats = SolveStats()
    norm_b = float(np.linalg.norm(b))
    if not np.isfinite(norm_b):
        raise SolverError("Vế phải có giá trị không hữu hạn")
    if norm_b == 0.0:
        return x, stats

    r = b.copy()
    z = apply_M(r)
    p = z.copy()
    rz = float(r @ z)
    alphas = []
    betas = []
    relres = 1.0

    for it in range(1, maxit + 1):
        Ap = apply_A(p)
        pAp = float(p @ Ap)
        if not np.isfinite(pAp) or pAp <= 0.0:
            raise SolverError(f"CG gặp <p, Ap> = {pAp} tại vòng lặp {it}")
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        relres = float(np.linalg.norm(r)) / norm_b
        if not np.isfinite(relres):
            raise SolverError(f"Sai số không hữu hạn tại vòng lặp {it}")
        alphas.append(alpha)
        stats.residual_history.append(relres)
        stats.iterations = it
        logger.debug(f"CG vòng {it}: sai số tương đối {relres:.3e}")
        if relres <= tol:
            break

        z = apply_M(r)
        rz_next = float(r @ z)
        if not np.isfinite(rz_next):
            raise SolverError(f"<r, Mr> không hữu hạn tại vòng lặp {it}")
        if rz_next <= 0.0:
            raise SolverError(f"Tiền điều kiện cho <r, Mr> = {rz_next} tại vòng lặp {it}")
        beta = rz_next / rz
        betas.append(beta)
        p = z + beta * p
        rz = rz_next

    stats.relative_residual = relres
    stats.converged = relres <= tol
    stats.cg_alpha_beta = [(a, betas[j] if j < len(betas) else 0.0) for j, a in enumerate(alphas)]
    return x, stats


def lanczos_tridiagonal(stats):
    """Ma trận ba đường chéo Lanczos dựng lại từ hệ số CG: (đường chéo, đường chéo phụ)"""
    alphas = np.array([a for a, _ in stats.cg_alpha_beta])
    betas = np.array([b for _, b in stats.cg_alpha_beta])
    k = alphas.size
    diag = 1.0 / alphas
    diag[1:] += betas[:k - 1] / alphas[:k - 1]
    offdiag = np.sqrt(betas[:k - 1]) / alphas[:k - 1]
    return diag, offdiag


def condition_estimate(stats):
    """
    Tỉ số trị riêng lớn nhất / nhỏ nhất của ma trận Lanczos. Đây là cận dưới
    của số điều kiện thật (trị Ritz nằm trong phổ).
    Cần ít nhất 5 vòng lặp, trừ khi CG đã hội tụ sớm hơn.
    """
    k = len(stats.cg_alpha_beta)
    if k == 0 or (k < MIN_CONDITION_ITERATIONS and not stats.converged):
        raise ValueError(f"Cần ít nhất {MIN_CONDITION_ITERATIONS} vòng CG để ước lượng, có {k}")
    diag, offdiag = lanczos_tridiagonal(stats)
    if k == 1:
        return 1.0
    ritz = eigvalsh_tridiagonal(diag, offdiag)
    if ritz[0] <= 0:
        raise SolverError(f"Trị Ritz không dương: {ritz[0]}")
    return float(ritz[-1] / ritz[0])


def _check_solvable(mask, bc):
    """Hệ thu hẹp suy biến khi không có mặt Dirichlet và không có nút đã biết"""
    if mask.grid.ndim != bc.ndim:
        raise ValueError(f"BcSpec có {bc.ndim} trục nhưng lưới có {mask.grid.ndim} trục")
    if not bc.has_dirichlet and mask.n_known == 0:
        raise SolverError(
            f"Hệ suy biến (mode hằng): biên {bc.describe()} không có Dirichlet "
            f"và mask không có nút đã biết ({mask.n_unknown} ẩn)"
        )


def _assemble(mask, bc):
    """Lắp ma trận hệ thu hẹp theo từng cột bằng matvec trên vector đơn vị"""
    n = mask.n_unknown
    A = np.empty((n, n))
    e = np.zeros(n)
    for j in range(n):
        e[j] = 1.0
        A[:, j] = matvec(e, mask, bc)
        e[j] = 0.0
    return A


def _write_back(known, mask, x):
    values = known.flat().copy()
    values[mask.unknown_index] = x
    return ScalarField(known.grid, values.reshape(known.grid.dims, order='F'))


def dense_solve(mask, bc, known, cap=DENSE_CAP, rhs=None):
    """
    Bộ giải tham chiếu: lắp ma trận dày và phân tích Cholesky (chỉ cho lưới nhỏ).
    `rhs` cho phép dùng lại vế phải đã dựng sẵn.
    """
    if mask.n_unknown == 0:
        return known
    if mask.n_unknown > cap:
        raise ValueError(f"{mask.n_unknown} ẩn vượt giới hạn {cap} của bộ giải dense")
    _check_solvable(mask, bc)
    b = build_rhs(known, mask, bc) if rhs is None else rhs
    A = _assemble(mask, bc)
    try:
        factor = cho_factor(A)
    except LinAlgError as e:
        raise SolverError(
            f"Ma trận suy biến ({bc.describe()}, {mask.n_known} nút đã biết, {mask.n_unknown} ẩn): {str(e)}"
        )
    x = cho_solve(factor, b)
    if not np.all(np.isfinite(x)):
        raise SolverError(f"Nghiệm dense không hữu hạn ({bc.describe()})")
    return _write_back(known, mask, x)


def extend(known, mask, bc, method=Method.PCG_FAST_POISSON, tol=DEFAULT_TOL, maxit=None):
    """
    Mở rộng biharmonic của trường đã biết ra các nút chưa biết.

    Args:
        known: giá trị tại nút đã biết, bằng 0 tại nút chưa biết
        mask: phân hoạch nút đã biết / chưa biết
        bc: điều kiện biên trên hình chữ nhật
        method: pcg_fast_poisson | pcg_plain | dense
        tol: sai số tương đối của CG
        maxit: số vòng lặp tối đa, mặc định max(dims)

    Returns:
        (ScalarField, SolveStats); giá trị tại nút đã biết giữ nguyên từng bit
    """
    method = Method(method)
    if known.grid != mask.grid:
        raise ValueError("Trường và mask không cùng lưới")
    if mask.n_unknown == 0:
        return known, SolveStats(method=method.value)
    if maxit is None:
        maxit = max(known.grid.dims)

    if method == Method.DENSE:
        b = build_rhs(known, mask, bc)
        result = dense_solve(mask, bc, known, rhs=b)
        x = result.flat()[mask.unknown_index]
        norm_b = np.linalg.norm(b)
        relres = float(np.linalg.norm(b - matvec(x, mask, bc)) / norm_b) if norm_b > 0 else 0.0
        stats = SolveStats(relative_residual=relres, residual_history=[relres], method=method.value)
        logger.debug(f"Giải dense ({bc.describe()}): {mask.n_unknown} ẩn, sai số {relres:.2e}")
        return result, stats

    _check_solvable(mask, bc)
    b = build_rhs(known, mask, bc)

    def apply_A(u):
        return matvec(u, mask, bc)

    apply_M = None
    if method == Method.PCG_FAST_POISSON:
        def apply_M(r):
            return apply_precond(r, mask, bc)

    x, stats = pcg(apply_A, apply_M, b, tol, maxit)
    stats.method = method.value
    if stats.converged:
        logger.debug(
            f"Mở rộng biharmonic ({method.value}, {bc.describe()}): {stats.iterations} vòng lặp, "
            f"sai số tương đối {stats.relative_residual:.2e}"
        )
    else:
        logger.warning(
            f"CG chưa hội tụ sau {stats.iterations} vòng lặp ({bc.describe()}), "
            f"sai số tương đối {stats.relative_residual:.2e} > {tol:.1e}"
        )
    return _write_back(known, mask, x), stats


def plain_condition_estimate(mask, bc, maxit=CONDITION_MAXIT, seed=0, tol=1e-12):
    """Chạy CG không tiền điều kiện với vế phải ngẫu nhiên và ước lượng số điều kiện"""
    _check_solvable(mask, bc)
    rng = np.random.default_rng(seed)
    b = rng.standard_normal(mask.n_unknown)
    _, stats = pcg(lambda u: matvec(u, mask, bc), None, b, tol, maxit)
    estimate = condition_estimate(stats)
    logger.info(f"Ước lượng số điều kiện (không tiền điều kiện): {estimate:.3e} sau {stats.iterations} vòng")
    return estimate
