import logging
import os

from .constants import LOGGER_NAME

logger = logging.getLogger(LOGGER_NAME)


def initialize_logging(level: str | None = None) -> logging.Logger:
    """Configure the application logger.

    Args:
        level: Logging level name. Falls back to DERMFORGE_LOG_LEVEL, then INFO

    Returns:
        The shared dermforge logger
    """
    level_name = (level or os.getenv("DERMFORGE_LOG_LEVEL", "INFO")).upper()
    logging.basicConfig(format="%(asctime)s %(levelname)s %(message)s")
    logger.setLevel(getattr(logging, level_name, logging.INFO))
    return logger


def resolve_thread_count(requested: int | None = None) -> int:
    """Number of worker threads for decoding and batch preparation.

    Args:
        requested: Explicit count; when None, DERMFORGE_THREADS or the CPU count is used

    Returns:
        A positive worker count
    """
    if requested is None:
        env_value = os.getenv("DERMFORGE_THREADS", "")
        if env_value.strip():
            try:
                requested = int(env_value)
            except ValueError:
                logger.warning(f"Ignoring non-integer DERMFORGE_THREADS={env_value!r}")
    if requested is None:
        requested = os.cpu_count() or 1
    return max(1, requested)
