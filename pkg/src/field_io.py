import logging
from pathlib import Path

import numpy as np
import pandas as pd

from grid import Grid, ScalarField, Mask

# Cấu hình logging
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=logging.INFO
)
logger = logging.getLogger(__name__)

MAGIC = "# levex-field 1"
ORDER = "axis0-fastest"


class FieldFormatError(ValueError):
    """Lỗi định dạng file trường, kèm số dòng (bắt đầu từ 1)"""

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


def _fmt(x):
    return format(float(x), '.17g')


def write_field(path, field):
    """
    Ghi trường ra file văn bản: header (ndim, dims, origin, spacing, thứ tự
    tuyến tính) rồi mỗi dòng một giá trị, 17 chữ số có nghĩa.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = field.grid
    lines = [
        MAGIC,
        f"ndim {grid.ndim}",
        "dims " + " ".join(str(n) for n in grid.dims),
        "origin " + " ".join(_fmt(o) for o in grid.origin),
        "spacing " + " ".join(_fmt(h) for h in grid.spacing),
        f"order {ORDER}",
        "values",
    ]
    lines.extend(_fmt(v) for v in field.flat())
    with open(path, 'w', encoding='utf-8') as f:
        f.write("\n".join(lines) + "\n")
    logger.debug(f"Đã ghi trường {grid.dims} vào {path}")
    return path


def _expect(path, line_no, line, key, count, cast):
    parts = line.split()
    if not parts or parts[0] != key:
        raise FieldFormatError(path, line_no, f"cần dòng '{key}', nhận được '{line}'")
    if len(parts) - 1 != count:
        raise FieldFormatError(path, line_no, f"'{key}' cần {count} giá trị, nhận được {len(parts) - 1}")
    try:
        return tuple(cast(p) for p in parts[1:])
    except ValueError:
        raise FieldFormatError(path, line_no, f"giá trị '{key}' không hợp lệ: '{line}'")


def read_field(path):
    """Đọc file trường đã ghi bởi write_field"""
    path = Path(path)
    with open(path, 'r', encoding='utf-8') as f:
        lines = f.read().splitlines()

    if len(lines) < 7:
        raise FieldFormatError(path, len(lines) + 1, "header không đầy đủ")
    if lines[0].strip() != MAGIC:
        raise FieldFormatError(path, 1, f"thiếu dòng '{MAGIC}'")
    (ndim,) = _expect(path, 2, lines[1], "ndim", 1, int)
    if ndim not in (2, 3):
        raise FieldFormatError(path, 2, f"số chiều {ndim} không được hỗ trợ")
    dims = _expect(path, 3, lines[2], "dims", ndim, int)
    origin = _expect(path, 4, lines[3], "origin", ndim, float)
    spacing = _expect(path, 5, lines[4], "spacing", ndim, float)
    (order,) = _expect(path, 6, lines[5], "order", 1, str)
    if order != ORDER:
        raise FieldFormatError(path, 6, f"thứ tự tuyến tính '{order}' không được hỗ trợ")
    if lines[6].strip() != "values":
        raise FieldFormatError(path, 7, "thiếu dòng 'values'")

    try:
        grid = Grid(dims, origin, spacing)
    except ValueError as e:
        raise FieldFormatError(path, 3, str(e))

    body = [(i + 8, s.strip()) for i, s in enumerate(lines[7:]) if s.strip()]
    if len(body) != grid.size:
        raise FieldFormatError(path, len(lines), f"cần {grid.size} giá trị, nhận được {len(body)}")
    values = np.empty(grid.size)
    for k, (line_no, s) in enumerate(body):
        try:
            values[k] = float(s)
        except ValueError:
            raise FieldFormatError(path, line_no, f"giá trị không hợp lệ '{s}'")
        if not np.isfinite(values[k]):
            raise FieldFormatError(path, line_no, f"giá trị không hữu hạn '{s}'")
    return ScalarField(grid, values.reshape(grid.dims, order='F'))


def write_field_csv(path, field):
    """Ghi trường dạng CSV với các cột chỉ số i0, i1[, i2] và cột value"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = field.grid
    idx = np.unravel_index(np.arange(grid.size), grid.dims, order='F')
    data = {f"i{a}": idx[a] for a in range(grid.ndim)}
    data["value"] = field.flat()
    df = pd.DataFrame(data)
    df.to_csv(path, index=False, float_format='%.17g')
    logger.debug(f"Đã ghi {len(df)} dòng CSV vào {path}")
    return path


def read_field_csv(path, grid):
    """Đọc trường CSV; cần lưới vì CSV không mang origin/spacing"""
    path = Path(path)
    try:
        df = pd.read_csv(path, float_precision='round_trip')
    except Exception as e:
        raise FieldFormatError(path, 1, f"không đọc được CSV: {str(e)}")
    cols = [f"i{a}" for a in range(grid.ndim)] + ["value"]
    missing = [c for c in cols if c not in df.columns]
    if missing:
        raise FieldFormatError(path, 1, f"thiếu cột {missing}")
    if len(df) != grid.size:
        raise FieldFormatError(path, len(df) + 1, f"cần {grid.size} dòng, nhận được {len(df)}")

    values = np.full(grid.dims, np.nan)
    idx = tuple(df[f"i{a}"].to_numpy(dtype=np.int64) for a in range(grid.ndim))
    for a in range(grid.ndim):
        bad = np.flatnonzero((idx[a] < 0) | (idx[a] >= grid.dims[a]))
        if bad.size:
            raise FieldFormatError(path, int(bad[0]) + 2, f"chỉ số i{a} ngoài lưới")
    values[idx] = df["value"].to_numpy(dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(df["value"].to_numpy(dtype=np.float64)))
    if bad.size:
        raise FieldFormatError(path, int(bad[0]) + 2, "giá trị không hữu hạn")
    if np.isnan(values).any():
        raise FieldFormatError(path, len(df) + 1, "có nút bị lặp hoặc bị thiếu")
    return ScalarField(grid, values)


def write_index_list(path, indices):
    """Ghi danh sách chỉ số tuyến tính, mỗi dòng một chỉ số"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for k in np.asarray(indices, dtype=np.int64):
            f.write(f"{int(k)}\n")
    return path


def read_index_list(path, grid):
    """Đọc danh sách chỉ số nút đã biết và dựng Mask tương ứng"""
    path = Path(path)
    known = np.zeros(grid.size, dtype=bool)
    with open(path, 'r', encoding='utf-8') as f:
        for line_no, line in enumerate(f, start=1):
            s = line.strip()
            if not s or s.startswith('#'):
                continue
            try:
                k = int(s)
            except ValueError:
                raise FieldFormatError(path, line_no, f"chỉ số không hợp lệ '{s}'")
            if not 0 <= k < grid.size:
                raise FieldFormatError(path, line_no, f"chỉ số {k} ngoài lưới ({grid.size} nút)")
            known[k] = True
    return Mask(grid, known)
