import logging
import os
import sys

LOG_DIR_ENV = "PAIRSOURCE_LOG_DIR"
LOG_LEVEL_ENV = "PAIRSOURCE_LOG_LEVEL"
DEFAULT_LOG_DIR = os.path.join(os.path.dirname(__file__), "..", "logs")

LOG_FORMAT = "%(asctime)s | %(name)-18s | %(levelname)-7s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

# numpy/scipy RuntimeWarnings (overflow in a Bessel ratio, slow brentq) arrive here
WARNINGS_LOGGER = "py.warnings"


def console_level() -> int:
    """Console threshold from $PAIRSOURCE_LOG_LEVEL (a level name), INFO when unset."""
    name = os.environ.get(LOG_LEVEL_ENV, "").strip().upper()
    if not name:
        return logging.INFO
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        raise ValueError(f"{LOG_LEVEL_ENV}={name!r} is not a logging level")
    return level


def setup_logging(name: str, level: int = logging.DEBUG, log_dir: str | None = None) -> logging.Logger:
    """Configure the `name` logger with a stderr console and a per-process log file.

    stdout is left to command results. The file (`<log_dir>/<name>.log`,
    default $PAIRSOURCE_LOG_DIR or logs/) always records DEBUG; an empty
    $PAIRSOURCE_LOG_DIR turns the file off. Python warnings are captured
    into the same handlers.
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    if logger.handlers:
        return logger

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    handlers: list[logging.Handler] = []

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(console_level())
    console.setFormatter(formatter)
    handlers.append(console)

    directory = os.environ.get(LOG_DIR_ENV, DEFAULT_LOG_DIR) if log_dir is None else log_dir
    if directory:
        os.makedirs(directory, exist_ok=True)
        file_handler = logging.FileHandler(os.path.join(directory, f"{name}.log"))
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        handlers.append(file_handler)

    logging.captureWarnings(True)
    warnings_logger = logging.getLogger(WARNINGS_LOGGER)
    for handler in handlers:
        logger.addHandler(handler)
        warnings_logger.addHandler(handler)

    return logger
