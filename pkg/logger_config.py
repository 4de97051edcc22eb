import logging
import logging.handlers
import os
import time
from functools import wraps
from app_config import config


def setup_logging(log_dir: str = None, console_level: int = logging.WARNING):
    """Setup logging for command-line runs

    Console output goes to stderr so result JSON on stdout is never interleaved.
    """

    log_dir = log_dir or config.LOG_DIR
    if not os.path.exists(log_dir):
        os.makedirs(log_dir)

    # Configure root logger
    logger = logging.getLogger()
    logger.setLevel(getattr(logging, config.LOG_LEVEL.upper()))

    # Clear existing handlers
    logger.handlers.clear()

    # Create formatters
    detailed_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s'
    )

    simple_formatter = logging.Formatter(
        '%(levelname)s - %(name)s - %(message)s'
    )

    # Console handler (stderr)
    console_handler = logging.StreamHandler()
    console_handler.setLevel(console_level)
    console_handler.setFormatter(simple_formatter)
    logger.addHandler(console_handler)

    # File handler for all logs
    file_handler = logging.handlers.RotatingFileHandler(
        filename=os.path.join(log_dir, config.LOG_FILE),
        maxBytes=10 * 1024 * 1024,  # 10MB
        backupCount=5,
        encoding='utf-8'
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(detailed_formatter)
    logger.addHandler(file_handler)

    # Error file handler
    error_handler = logging.handlers.RotatingFileHandler(
        filename=os.path.join(log_dir, 'errors.log'),
        maxBytes=10 * 1024 * 1024,  # 10MB
        backupCount=5,
        encoding='utf-8'
    )
    error_handler.setLevel(logging.ERROR)
    error_handler.setFormatter(detailed_formatter)
    logger.addHandler(error_handler)

    # numba/galois compile chatter
    logging.getLogger('numba').setLevel(logging.WARNING)

    logger.info(f"Logging initialized - Level: {config.LOG_LEVEL}, Environment: {config.ENVIRONMENT}")


class TowerLogger:
    """Logger for finite-field tower events"""

    def __init__(self):
        self.logger = logging.getLogger('tower')

    def log_extension(self, p: int, old_degree: int, new_degree: int, reason: str = None):
        """Log a working-field extension"""
        message = f"TOWER_EXTENDED - p: {p}, From degree: {old_degree}, To degree: {new_degree}"
        if reason:
            message += f", Reason: {reason}"
        self.logger.info(message)

    def log_cap_exceeded(self, p: int, requested_degree: int, cap: int):
        """Log a refused extension"""
        self.logger.error(f"FIELD_CAP_EXCEEDED - p: {p}, Requested degree: {requested_degree}, Cap: {cap}")


class SolverLogger:
    """Logger for root selection and precision bookkeeping"""

    def __init__(self):
        self.logger = logging.getLogger('solver')

    def log_branch(self, solver: str, index: int, policy: str, valuation):
        """Log a branch choice"""
        self.logger.debug(f"BRANCH_SELECTED - Solver: {solver}, Index: {index}, Policy: {policy}, Valuation: {valuation}")

    def log_precision_reduced(self, solver: str, requested, achieved, reason: str):
        """Log a cap lowered below the requested precision"""
        self.logger.info(
            f"PRECISION_REDUCED - Solver: {solver}, Requested: {requested}, Achieved: {achieved}, Reason: {reason}"
        )

    def log_divergence(self, index: int, window: int):
        """Log a suspected divergent evaluation"""
        self.logger.warning(f"DIVERGENCE_SUSPECTED - Index: {index}, Window: {window}")


class AuditLogger:
    """Logger for command runs and verdicts"""

    def __init__(self):
        self.logger = logging.getLogger('audit')

    def log_command(self, command: str, seed: int):
        """Log a command invocation"""
        self.logger.info(f"COMMAND_RUN - Command: {command}, Seed: {seed}")

    def log_verdict(self, command: str, passed: bool, detail: str = None):
        """Log the verdict of a check"""
        status = "PASS" if passed else "FAIL"
        message = f"VERDICT - Command: {command}, Status: {status}"
        if detail:
            message += f", Detail: {detail}"
        self.logger.info(message)


class PerformanceLogger:
    """Logger for slow operations"""

    def __init__(self):
        self.logger = logging.getLogger('performance')

    def log_duration(self, operation: str, duration: float):
        """Log operations slower than the configured threshold"""
        if duration > config.SLOW_OPERATION_SECONDS:
            self.logger.warning(f"SLOW_OPERATION - Operation: {operation}, Duration: {duration:.2f}s")


# Create global logger instances
tower_logger = TowerLogger()
solver_logger = SolverLogger()
audit_logger = AuditLogger()
performance_logger = PerformanceLogger()


def log_exception(func):
    """Decorator to log exceptions in functions"""
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except Exception as e:
            logger = logging.getLogger(func.__module__)
            logger.error(f"Exception in {func.__name__}: {str(e)}", exc_info=True)
            raise
    return wrapper


def timed(operation: str):
    """Decorator reporting slow calls to the performance logger"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            try:
                return func(*args, **kwargs)
            finally:
                performance_logger.log_duration(operation, time.perf_counter() - start)
        return wrapper
    return decorator
