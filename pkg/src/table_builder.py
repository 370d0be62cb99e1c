import logging
import time
from pathlib import Path

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import BAND_CELLS, DEFAULT_TOL, TABLES_DIR, FIELDS_DIR, MAX_GRID_2D, MAX_GRID_3D
from benchmark_cases import build_case, example3
from levelset import band_error, estimated_orders
from solver import extend, plain_condition_estimate, Method
from extrapolation import extrapolate, ExtrapolationOrder
from field_io import write_field

# Cấu hình logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.INFO
)
logger = logging.getLogger(__name__)

METHODS = ("biharmonic", "constant", "linear", "quadratic")


def check_grid_size(example, n, allow_large=False):
    """Giới hạn kích thước lưới mặc định (2D: MAX_GRID_2D² nút, 3D: MAX_GRID_3D³ nút)"""
    if n < 4:
        raise ValueError(f"Lưới {n} quá nhỏ, cần ít nhất 4 nút mỗi trục")
    if allow_large:
        return
    if example == 2:
        if n > MAX_GRID_3D:
            raise ValueError(f"Lưới 3D {n}³ vượt giới hạn {MAX_GRID_3D}³ (dùng --allow-large)")
    else:
        nodes = 3 * n * n if example == 4 else n * n
        if nodes > MAX_GRID_2D ** 2:
            raise ValueError(f"Lưới {n} vượt giới hạn {MAX_GRID_2D}² nút (dùng --allow-large)")


def measure_errors(case, field, band_cells=BAND_CELLS):
    """Sai số lớn nhất trong dải quanh mặt phân cách cho từng vùng của ví dụ"""
    errors = {}
    for region, restrict in case.regions.items():
        key = f"error_{region}" if region else "error"
        errors[key] = band_error(field, case.reference, case.phi, band_cells, restrict)
    return errors


def _add_orders(df, error_columns):
    """Thêm cột bậc hội tụ ước lượng cho từng cột sai số (hàng đầu để trống)"""
    for col in error_columns:
        order_col = col.replace("error", "est_order", 1)
        values = [None]
        if len(df) >= 2:
            values += estimated_orders(df[col].tolist())
        df[order_col] = values
    return df


def emit_case_inputs(case, out_dir=FIELDS_DIR, prefix=None):
    """Ghi trường đã biết, φ và trường tham chiếu để dùng với lệnh extend"""
    out_dir = Path(out_dir)
    prefix = prefix or f"{case.name}_{case.label}"
    paths = {
        'known': write_field(out_dir / f"{prefix}_known.txt", case.known),
        'phi': write_field(out_dir / f"{prefix}_phi.txt", case.phi.field),
        'reference': write_field(out_dir / f"{prefix}_reference.txt", case.reference),
    }
    logger.info(f"Đã ghi dữ liệu đầu vào của {case.name} {case.label} vào {out_dir}")
    return paths


def run_example_ladder(example, grids, bc_name=None, tol=DEFAULT_TOL, maxit=None,
                       band_cells=BAND_CELLS, method=Method.PCG_FAST_POISSON, timings=False,
                       condition=False, emit_inputs=False, out_dir=TABLES_DIR,
                       allow_large=False, progress=True, **case_kwargs):
    """
    Chạy mở rộng biharmonic trên một dãy lưới và dựng bảng sai số.

    Returns:
        DataFrame với các cột grid, iterations, converged, error..., est_order...
    """
    rows = []
    for n in tqdm(grids, desc=f"Ví dụ {example}", disable=not progress):
        check_grid_size(example, n, allow_large)
        case = build_case(example, n, bc_name, **case_kwargs)
        start_time = time.time()
        field, stats = extend(case.known, case.mask, case.bc, method, tol, maxit)
        elapsed = time.time() - start_time

        row = {'grid': case.label, 'iterations': stats.iterations, 'converged': stats.converged}
        errors = measure_errors(case, field, band_cells)
        row.update(errors)
        if condition:
            row['cond_est'] = plain_condition_estimate(case.mask, case.bc)
        if timings:
            row['runtime'] = round(elapsed, 3)
        rows.append(row)
        logger.info(f"{case.name} {case.label} ({case.bc.describe()}): {stats.iterations} vòng lặp, "
                    + ", ".join(f"{k} = {v:.3e}" for k, v in errors.items()))

        if emit_inputs:
            emit_case_inputs(case, Path(out_dir) / "inputs")
            write_field(Path(out_dir) / "inputs" / f"{case.name}_{case.label}_extended.txt", field)

    df = pd.DataFrame(rows)
    return _add_orders(df, [c for c in df.columns if c.startswith("error")])


def run_compare(example, grids, methods=METHODS, bc_name=None, tol=DEFAULT_TOL, maxit=None,
                band_cells=BAND_CELLS, timings=False, allow_large=False, progress=True, **case_kwargs):
    """
    So sánh mở rộng biharmonic với các phép ngoại suy hằng, tuyến tính, bậc hai.
    Mỗi phương pháp có các cột <method>_error[_vùng] và <method>_est_order[_vùng].
    """
    methods = list(methods)
    if not methods:
        raise ValueError("Danh sách phương pháp rỗng")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"Phương pháp không hợp lệ: {unknown}")

    rows = []
    for n in tqdm(grids, desc=f"So sánh ví dụ {example}", disable=not progress):
        check_grid_size(example, n, allow_large)
        case = build_case(example, n, bc_name, **case_kwargs)
        row = {'grid': case.label}
        for method in methods:
            start_time = time.time()
            if method == "biharmonic":
                field, stats = extend(case.known, case.mask, case.bc, Method.PCG_FAST_POISSON, tol, maxit)
                row['biharmonic_iterations'] = stats.iterations
            else:
                field = extrapolate(case.known, case.phi, ExtrapolationOrder(method))
            elapsed = time.time() - start_time
            for key, value in measure_errors(case, field, band_cells).items():
                row[f"{method}_{key}"] = value
            if timings:
                row[f"{method}_runtime"] = round(elapsed, 3)
        rows.append(row)
        logger.info(f"So sánh {case.name} {case.label}: "
                    + ", ".join(f"{k} = {v:.3e}" for k, v in row.items() if "error" in k))

    df = pd.DataFrame(rows)
    return _add_orders(df, [c for c in df.columns if "_error" in c])


def half_grid_difference(n, tol=1e-12, maxit=None):
    """
    Giải ví dụ 3 (Neumann) trên cả miền và trên nửa miền x > 0, trả về sai
    khác lớn nhất trên các nút chung.
    """
    full = example3(n, "neumann")
    half = example3(n, "neumann", half_grid=True)
    maxit = maxit or 20 * n
    full_field, _ = extend(full.known, full.mask, full.bc, Method.PCG_FAST_POISSON, tol, maxit)
    half_field, _ = extend(half.known, half.mask, half.bc, Method.PCG_FAST_POISSON, tol, maxit)
    shared = full_field.values[n // 2:, :]
    diff = float(np.abs(shared - half_field.values).max())
    logger.info(f"Ví dụ 3, lưới nửa miền {half.label}: sai khác với lưới đầy đủ {diff:.3e}")
    return diff


def write_table(df, path):
    """Lưu bảng ra CSV"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False)
    logger.info(f"Đã tạo file {path.name} với {len(df)} dòng")
    return path
