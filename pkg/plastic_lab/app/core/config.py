import os


class Settings:
    BASE_DIR = os.path.dirname(
        os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    )

    # 日志级别，CLI 默认只输出警告，保证 stdout 上只有 JSON
    LOG_LEVEL = os.getenv("PLASTIC_LAB_LOG_LEVEL", "WARNING").upper()

    # suite 默认参数（可被命令行覆盖）
    DEFAULT_TRIALS = int(os.getenv("PLASTIC_LAB_TRIALS", "25"))
    DEFAULT_SEED = int(os.getenv("PLASTIC_LAB_SEED", "0"))
    DEFAULT_DIM = int(os.getenv("PLASTIC_LAB_DIM", "2"))

    # 生成器限制：维数 2-4，随机分量多项式总次数 <= 2
    MIN_DIM = 2
    MAX_DIM = 4
    MAX_DEGREE = 2
    MAX_TERMS = 3

    # 文法里 ^ / ** 的指数上限
    MAX_EXPONENT = int(os.getenv("PLASTIC_LAB_MAX_EXPONENT", "64"))

    # 浮点交叉校验
    FLOAT_TOLERANCE = 1e-9
    CROSSCHECK_POINTS = int(os.getenv("PLASTIC_LAB_CROSSCHECK_POINTS", "10"))
    POLE_RESAMPLE_LIMIT = 100

    # ∇-可积性检查时额外抽样的非基截面对数
    RANDOM_SECTION_PAIRS = int(os.getenv("PLASTIC_LAB_SECTION_PAIRS", "10"))

    # 生成器重采样上限（退化度量、零挠率等）
    GENERATOR_ATTEMPTS = 50

    # suite 内部 trial 并行度，报告始终按 trial 顺序组装
    SUITE_WORKERS = int(os.getenv("PLASTIC_LAB_SUITE_WORKERS", "1"))


settings = Settings()
