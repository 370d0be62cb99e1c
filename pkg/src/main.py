import argparse
import logging
import sys
import time
import traceback
from pathlib import Path

import numpy as np
import pandas as pd

from config import (
    LOG_DIR, LOG_LEVEL, TABLES_DIR, DEFAULT_TOL, BAND_CELLS, DEFAULT_SEED,
    REINIT_ITERATIONS,
)
from grid import BcSpec, LevelSet, ScalarField, Mask, Side
from field_io import read_field, write_field, read_index_list, FieldFormatError
from solver import extend, Method, SolverError
from benchmark_cases import DEFAULT_GRIDS
from table_builder import (
    METHODS, run_example_ladder, run_compare, half_grid_difference, write_table,
)
from stefan import StefanParams, SeedShape, default_grid, default_output_dir, run as run_stefan

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_USAGE = 2


def setup_logging(level=LOG_LEVEL):
    """Ghi log ra logs/levex.log và ra console, xóa handler cũ để tránh log trùng"""
    root_logger = logging.getLogger('')
    root_logger.setLevel(level)
    if root_logger.hasHandlers():
        root_logger.handlers.clear()

    formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    file_handler = logging.FileHandler(LOG_DIR / 'levex.log')
    file_handler.setFormatter(formatter)
    root_logger.addHandler(file_handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)


def parse_grids(text):
    """'128,256' -> [128, 256]; mỗi lưới cần ít nhất 4 nút"""
    try:
        grids = [int(s) for s in text.split(',') if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"danh sách lưới không hợp lệ: '{text}'")
    if not grids:
        raise argparse.ArgumentTypeError("danh sách lưới rỗng")
    for n in grids:
        if n < 4:
            raise argparse.ArgumentTypeError(f"lưới {n} < 4 nút")
    return grids


def parse_methods(text):
    methods = [s.strip() for s in text.split(',') if s.strip()]
    if not methods:
        raise argparse.ArgumentTypeError("danh sách phương pháp rỗng")
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"phương pháp không hợp lệ: {', '.join(bad)}")
    return methods


def positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"cần số dương, nhận được {text}")
    return value


def _case_kwargs(args):
    """Tham số riêng của từng ví dụ"""
    if args.n == 4:
        return {'terms': args.terms, 'variant': args.variant, 'seed': args.seed}
    return {}


def _stefan_params(args):
    grid = default_grid(args.stefan_grid)
    seed = SeedShape(radius=args.seed_radius, amplitude=args.seed_amplitude, mode=args.seed_mode)
    return StefanParams(grid=grid, sigma=args.sigma, beta=args.beta, dt=args.dt, t_end=args.t_end,
                        seed_shape=seed, diagonal_gradients=args.diagonal_gradients,
                        reinit_iterations=args.reinit_iterations)


def cmd_stefan(args):
    """Ví dụ 5: bài toán Stefan"""
    params = _stefan_params(args)
    out_dir = Path(args.out_dir) if args.out_dir else default_output_dir(params)
    logger.info(f"Bài toán Stefan: lưới {params.grid.dims}, σ = {params.sigma}, β = {params.beta}, "
                f"dt = {params.dt}, t_end = {params.t_end}")
    start_time = time.time()
    snapshots = run_stefan(params, args.snapshot_every, out_dir, progress=not args.quiet)
    logger.info(f"Hoàn thành {len(snapshots)} snapshot trong {time.time() - start_time:.1f} giây, lưu tại {out_dir}")
    return EXIT_OK


def cmd_example(args):
    """Chạy ví dụ n trên dãy lưới và ghi exampleN_table.csv"""
    if args.n == 5:
        return cmd_stefan(args)
    out_dir = Path(args.out_dir) if args.out_dir else TABLES_DIR
    grids = args.grids or DEFAULT_GRIDS[args.n]

    df = run_example_ladder(
        args.n, grids, bc_name=args.bc, tol=args.tol, maxit=args.maxit,
        band_cells=args.band_cells, method=args.method, timings=args.timings,
        condition=args.condition, emit_inputs=args.emit_inputs, out_dir=out_dir,
        allow_large=args.allow_large, progress=not args.quiet, **_case_kwargs(args)
    )
    write_table(df, out_dir / f"example{args.n}_table.csv")

    if args.n == 3 and args.half_grid:
        rows = [{'grid': f"{n}x{n}", 'max_difference': half_grid_difference(n)} for n in grids]
        write_table(pd.DataFrame(rows), out_dir / "example3_half_grid.csv")

    if not df['converged'].all():
        logger.warning("Có lưới mà CG chưa hội tụ; tăng --maxit")
    return EXIT_OK


def cmd_extend(args):
    """Mở rộng trường trong file theo mask lấy từ file φ hoặc danh sách nút đã biết"""
    field = read_field(args.input)
    if args.phi:
        phi = LevelSet(read_field(args.phi))
        if phi.grid != field.grid:
            raise ValueError("File φ và file trường không cùng lưới")
        known_nodes = (phi.values <= 0) if args.side == Side.INSIDE_KNOWN.value else (phi.values >= 0)
        mask = Mask(field.grid, known_nodes)
    else:
        mask = read_index_list(args.known_list, field.grid)

    bc = BcSpec.from_name(args.bc, field.grid.ndim)
    known = ScalarField(field.grid, np.where(mask.known, field.values, 0.0))
    if mask.n_unknown == 0:
        known = field
    result, stats = extend(known, mask, bc, args.method, args.tol, args.maxit)
    write_field(args.output, result)
    pd.DataFrame([stats.to_row()]).to_csv(sys.stdout, index=False, header=args.header)
    logger.info(f"Đã ghi trường mở rộng vào {args.output}")
    return EXIT_OK


def cmd_compare(args):
    """So sánh các phương pháp trên một ví dụ, ghi exampleN_compare.csv"""
    out_dir = Path(args.out_dir) if args.out_dir else TABLES_DIR
    grids = args.grids or DEFAULT_GRIDS[args.n]
    df = run_compare(
        args.n, grids, args.methods, bc_name=args.bc, tol=args.tol, maxit=args.maxit,
        band_cells=args.band_cells, timings=args.timings, allow_large=args.allow_large,
        progress=not args.quiet, **_case_kwargs(args)
    )
    write_table(df, out_dir / f"example{args.n}_compare.csv")
    return EXIT_OK


def _add_solver_flags(parser):
    parser.add_argument('--bc', choices=['dirichlet', 'neumann', 'periodic', 'mixed'], default=None,
                        help='Điều kiện biên (mặc định theo ví dụ)')
    parser.add_argument('--grids', type=parse_grids, default=None, help='Danh sách lưới, ví dụ 128,256')
    parser.add_argument('--tol', type=positive_float, default=DEFAULT_TOL, help='Sai số tương đối của CG')
    parser.add_argument('--maxit', type=int, default=None, help='Số vòng CG tối đa (mặc định max(dims))')
    parser.add_argument('--band-cells', type=positive_float, default=BAND_CELLS,
                        help='Bề rộng dải đo sai số (số ô lưới)')
    parser.add_argument('--seed', type=int, default=DEFAULT_SEED, help='Seed mặt phân cách của ví dụ 4')
    parser.add_argument('--terms', type=int, choices=[1, 10], default=10, help='Số số hạng sin của ví dụ 4')
    parser.add_argument('--variant', choices=['periodic', 'channel'], default='periodic',
                        help='Biến thể của ví dụ 4')
    parser.add_argument('--out-dir', type=str, default=None, help='Thư mục kết quả')
    parser.add_argument('--timings', action='store_true', help='Thêm cột thời gian chạy')
    parser.add_argument('--allow-large', action='store_true', help='Cho phép lưới vượt giới hạn mặc định')
    parser.add_argument('--quiet', action='store_true', help='Tắt thanh tiến trình')


def _add_stefan_flags(parser):
    parser.add_argument('--sigma', type=float, default=0.001, help='Hệ số sức căng bề mặt σ')
    parser.add_argument('--beta', type=positive_float, default=2.0, help='Số Stefan β')
    parser.add_argument('--dt', type=positive_float, default=5e-4, help='Bước thời gian')
    parser.add_argument('--t-end', type=positive_float, default=0.4, help='Thời điểm kết thúc')
    parser.add_argument('--snapshot-every', type=int, default=100, help='Ghi snapshot sau mỗi N bước')
    parser.add_argument('--stefan-grid', type=int, default=200, help='Số nút mỗi trục của lưới Stefan')
    parser.add_argument('--seed-radius', type=positive_float, default=0.1, help='Bán kính mầm rắn')
    parser.add_argument('--seed-amplitude', type=float, default=0.02, help='Biên độ nhiễu của mầm')
    parser.add_argument('--seed-mode', type=int, default=4, help='Số mode nhiễu của mầm')
    parser.add_argument('--diagonal-gradients', action='store_true',
                        help='Lấy trung bình gradient theo hướng x-y và hướng 45°')
    parser.add_argument('--reinit-iterations', type=int, default=REINIT_ITERATIONS,
                        help='Số vòng tái khởi tạo φ sau mỗi bước')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='levex',
        description='Mở rộng biharmonic cho phương pháp level set'
    )
    sub = parser.add_subparsers(dest='command', required=True)

    p_example = sub.add_parser('example', help='Chạy ví dụ 1-5 trên dãy lưới')
    p_example.add_argument('n', type=int, choices=[1, 2, 3, 4, 5], help='Số thứ tự ví dụ')
    _add_solver_flags(p_example)
    p_example.add_argument('--method', choices=[m.value for m in Method], default=Method.PCG_FAST_POISSON.value,
                           help='Bộ giải')
    p_example.add_argument('--emit-inputs', action='store_true', help='Ghi trường đầu vào cho lệnh extend')
    p_example.add_argument('--half-grid', action='store_true', help='Ví dụ 3: chạy thêm trên nửa miền đối xứng')
    p_example.add_argument('--condition', action='store_true',
                           help='Ước lượng số điều kiện của toán tử không tiền điều kiện')
    _add_stefan_flags(p_example)
    p_example.set_defaults(func=cmd_example)

    p_extend = sub.add_parser('extend', help='Mở rộng một trường đọc từ file')
    p_extend.add_argument('--input', required=True, help='File trường (định dạng levex-field)')
    source = p_extend.add_mutually_exclusive_group(required=True)
    source.add_argument('--phi', help='File φ; mask lấy theo dấu của φ')
    source.add_argument('--known-list', help='File danh sách chỉ số nút đã biết')
    p_extend.add_argument('--side', choices=[s.value for s in Side], default=Side.INSIDE_KNOWN.value,
                          help='Phía đã biết của mặt phân cách')
    p_extend.add_argument('--bc', choices=['dirichlet', 'neumann', 'periodic', 'mixed'], default='dirichlet')
    p_extend.add_argument('--method', choices=[m.value for m in Method], default=Method.PCG_FAST_POISSON.value)
    p_extend.add_argument('--tol', type=positive_float, default=DEFAULT_TOL)
    p_extend.add_argument('--maxit', type=int, default=None)
    p_extend.add_argument('--output', required=True, help='File kết quả')
    p_extend.add_argument('--header', action='store_true', help='In dòng tiêu đề trước thống kê')
    p_extend.set_defaults(func=cmd_extend)

    p_compare = sub.add_parser('compare', help='So sánh biharmonic với các phép ngoại suy')
    p_compare.add_argument('n', type=int, choices=[1, 2, 3, 4], help='Số thứ tự ví dụ')
    p_compare.add_argument('--methods', type=parse_methods, default=list(METHODS),
                           help='Danh sách phương pháp: biharmonic,constant,linear,quadratic')
    _add_solver_flags(p_compare)
    p_compare.set_defaults(func=cmd_compare)

    p_stefan = sub.add_parser('stefan', help='Bài toán Stefan (giống example 5)')
    _add_stefan_flags(p_stefan)
    p_stefan.add_argument('--out-dir', type=str, default=None, help='Thư mục snapshot')
    p_stefan.add_argument('--quiet', action='store_true', help='Tắt thanh tiến trình')
    p_stefan.set_defaults(func=cmd_stefan)
    return parser


def main(argv=None):
    """Hàm chính; trả về mã thoát 0 (thành công), 1 (lỗi bộ giải), 2 (lỗi sử dụng/định dạng)"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging()

    try:
        return args.func(args)
    except SolverError as e:
        logger.error(f"Lỗi bộ giải: {str(e)}")
        logger.debug(traceback.format_exc())
        return EXIT_SOLVER
    except (FieldFormatError, FileNotFoundError, ValueError) as e:
        logger.error(f"Lỗi đầu vào: {str(e)}")
        logger.debug(traceback.format_exc())
        return EXIT_USAGE


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Đã dừng theo yêu cầu của người dùng")
        sys.exit(0)
    except Exception as e:
        error_msg = traceback.format_exc()
        logger.error(f"Lỗi không mong đợi: {str(e)}\n{error_msg}")
        sys.exit(1)
