import os
from dotenv import load_dotenv
from pathlib import Path

# Load biến môi trường từ file .env
load_dotenv()

# Thư mục gốc của dự án
BASE_DIR = Path(__file__).resolve().parent.parent

# Đường dẫn các thư mục
DATA_DIR = BASE_DIR / "data"
LOG_DIR = BASE_DIR / "logs"

# Kết quả của các ví dụ
TABLES_DIR = DATA_DIR / "tables"
FIELDS_DIR = DATA_DIR / "fields"
STEFAN_DIR = DATA_DIR / "stefan"

# Tạo các thư mục nếu chưa tồn tại
for dir_path in [DATA_DIR, LOG_DIR, TABLES_DIR, FIELDS_DIR, STEFAN_DIR]:
    dir_path.mkdir(parents=True, exist_ok=True)

# Cấu hình luồng: -1 nghĩa là dùng tất cả các lõi cho scipy.fft
LEVEX_THREADS = int(os.getenv("LEVEX_THREADS", -1))
LOG_LEVEL = os.getenv("LEVEX_LOG_LEVEL", "INFO").upper()

# Cấu hình bộ giải biharmonic
DEFAULT_TOL = float(os.getenv("LEVEX_TOL", 1e-6))  # Sai số tương đối của PCG
DENSE_CAP = int(os.getenv("LEVEX_DENSE_CAP", 5000))  # Số ẩn tối đa cho bộ giải dense
CONDITION_MAXIT = int(os.getenv("LEVEX_CONDITION_MAXIT", 4000))  # Số vòng CG tối đa khi ước lượng số điều kiện

# Cấu hình đo sai số và các ví dụ
BAND_CELLS = float(os.getenv("LEVEX_BAND_CELLS", 4))  # Bề rộng dải quanh mặt phân cách (số ô lưới)
DEFAULT_SEED = int(os.getenv("LEVEX_SEED", 42))  # Seed cho mặt phân cách ngẫu nhiên của ví dụ 4
MAX_GRID_2D = int(os.getenv("LEVEX_MAX_GRID_2D", 512))
MAX_GRID_3D = int(os.getenv("LEVEX_MAX_GRID_3D", 64))

# Cấu hình ngoại suy PDE
EXTRAP_BAND_CELLS = float(os.getenv("LEVEX_EXTRAP_BAND_CELLS", 8))
EXTRAP_CFL = float(os.getenv("LEVEX_CFL", 0.5))

# Cấu hình bài toán Stefan
REINIT_ITERATIONS = int(os.getenv("LEVEX_REINIT_ITERATIONS", 10))
STEFAN_EXTENSION_TOL = float(os.getenv("LEVEX_STEFAN_EXTENSION_TOL", 1e-8))
HEAT_TOL = float(os.getenv("LEVEX_HEAT_TOL", 1e-10))
