from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import field_validator
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

class Settings(BaseSettings):
    # Base Directory
    BASE_DIR: Path = Path(__file__).resolve().parent.parent.parent
    OUTPUT_DIR: Path = BASE_DIR / "output"
    VERSION: str = "1.0.0"
    SCHEMA_VERSION: int = 1

    # ----------------------------------------------------------------
    # Numeric Policy
    # ----------------------------------------------------------------
    # Every tolerance used by the flag kernels and certifiers lives here.
    ORTHONORMAL_TOL: float = 1e-10
    GAP_FLOOR: float = 1e-8
    MEMBERSHIP_MARGIN: float = 1e-3
    FLOAT_MATCH_TOL: float = 1e-9
    FALSIFY_TOL: float = 1e-9
    COMMUTATOR_TOL: float = 1e-9
    DISPLACEMENT_TOL: float = 1e-9
    SINGULAR_TOL: float = 1e-13
    DEDUP_TOL: float = 1e-6
    AXIS_MATCH_TOL: float = 1e-6

    # Word Problem Oracles
    ORACLE_BUDGET: int = 64          # word-length budget for subgroup enumeration
    ORACLE_MAX_ELEMENTS: int = 20000 # hard cap on enumerated subgroup elements
    ORACLE_NORM_CEILING: float = 1e100
    FACTOR_TABLE_MAX: int = 4096     # factors larger than this are not tabulated
    TRANSVERSAL_RADIUS: int = 6

    # Cayley Balls
    BALL_RADIUS: int = 8
    DELTA_RADIUS: int = 4

    # Attractors & Limit Sets
    ATTRACTOR_MAX_ITER: int = 200
    ATTRACTOR_BATCH_ITER: int = 64
    LIMIT_SET_DEPTH: int = 5

    # Set Construction
    ARC_NET_SIZE: int = 48
    ARC_MIN_INTERVALS: int = 16    # steps on the shortest arc of a shared-spacing split
    INFLATION_FACTOR: float = 2.0
    INTERIOR_CLEARANCE: float = 3.0  # multiples of the inflation radius
    INTERIOR_FRACTION: float = 0.25  # fraction of the set diameter

    # Certifier
    CHECK_DEPTH: int = 4
    INJECTIVITY_DEPTH: int = 5
    INJECTIVITY_MAX_WORDS: int = 20000
    AUDIT_EXHAUSTIVE_MAX: int = 2000
    AUDIT_NEIGHBOURS: int = 8

    # Diagnostics
    SLOPE_FLOOR: float = 0.05
    SHRINK_RATIO: float = 0.05
    GAP_SAMPLES: int = 32
    GAP_SCAN_LENGTH: int = 12
    SHRINK_LENGTH: int = 12
    HNN_ITERATIONS: int = 60
    BEND_ITERATIONS: int = 12
    BEND_RAY_POINTS: int = 5

    # Serialization
    ROUND_DIGITS: int = 12

    # Logging Configuration
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="ANOSOV_",
        extra="ignore"
    ) # Ignore extra env vars

    @field_validator(
        'ORTHONORMAL_TOL', 'GAP_FLOOR', 'MEMBERSHIP_MARGIN', 'FLOAT_MATCH_TOL',
        'FALSIFY_TOL', 'COMMUTATOR_TOL', 'DISPLACEMENT_TOL', 'DEDUP_TOL',
        'AXIS_MATCH_TOL', 'SLOPE_FLOOR', 'SHRINK_RATIO', 'INFLATION_FACTOR'
    )
    @classmethod
    def validate_positive_float(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("numeric policy tolerances must be positive")
        return v

    @field_validator('ORACLE_BUDGET', 'BALL_RADIUS', 'DELTA_RADIUS', 'ARC_NET_SIZE', 'ARC_MIN_INTERVALS', 'GAP_SAMPLES')
    @classmethod
    def validate_positive_int(cls, v: int) -> int:
        if v <= 0:
            raise ValueError("budgets and radii must be positive")
        return v

    @field_validator('ROUND_DIGITS')
    @classmethod
    def validate_digits(cls, v: int) -> int:
        if not 1 <= v <= 17:
            raise ValueError("ROUND_DIGITS must lie in [1, 17]")
        return v

# Singleton instance
settings = Settings()
