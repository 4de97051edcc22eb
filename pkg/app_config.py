import os
from dotenv import load_dotenv
from typing import Optional

load_dotenv()


class Config:
    """Application configuration"""

    # Logging Configuration
    LOG_LEVEL: str = os.getenv('VADIC_LOG_LEVEL', 'INFO')
    LOG_DIR: str = os.getenv('VADIC_LOG_DIR', 'logs')
    LOG_FILE: str = os.getenv('VADIC_LOG_FILE', 'vadic_periods.log')

    # Session defaults
    DEFAULT_CONFIG_PATH: Optional[str] = os.getenv('VADIC_CONFIG')
    DEFAULT_PREC_T: int = 8
    DEFAULT_PREC_U: int = 4
    DEFAULT_MAX_FIELD_DEG: int = 64
    DEFAULT_MAX_TERMS: int = 32
    DEFAULT_DENOM_FLOOR: int = 4096
    DIVERGENCE_WINDOW: int = 3
    DEFAULT_NU_MAX: int = 1
    KERNEL_SIZE_CAP: int = 4096

    # Performance monitoring
    SLOW_OPERATION_SECONDS: float = float(os.getenv('VADIC_SLOW_SECONDS', 5.0))

    # Environment
    ENVIRONMENT: str = os.getenv('VADIC_ENVIRONMENT', 'development')

    @classmethod
    def validate_config(cls) -> tuple[bool, list[str]]:
        """Validate configuration"""
        errors = []

        if cls.LOG_LEVEL.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            errors.append(f"VADIC_LOG_LEVEL must be a logging level name, got {cls.LOG_LEVEL}")

        if cls.DEFAULT_CONFIG_PATH and not os.path.exists(cls.DEFAULT_CONFIG_PATH):
            errors.append(f"VADIC_CONFIG points to a missing file: {cls.DEFAULT_CONFIG_PATH}")

        if cls.SLOW_OPERATION_SECONDS <= 0:
            errors.append("VADIC_SLOW_SECONDS must be positive")

        return len(errors) == 0, errors


# Create global config instance
config = Config()
