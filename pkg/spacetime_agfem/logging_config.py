"""Logging configuration for spacetime-agfem."""

import logging
import sys
from pathlib import Path
from typing import Optional

BASE_LOGGER = "spacetime_agfem"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logging(
    level: int | str = logging.INFO,
    logger_name: str = BASE_LOGGER,
    log_file: Optional[Path] = None,
) -> logging.Logger:
    """Configure and return the package logger.

    Args:
        level: Logging level (int or string like "INFO", "DEBUG").
        logger_name: Name for the logger.
        log_file: Optional file that receives a copy of every record,
            typically ``run.log`` in the output directory.

    Returns:
        Configured logger instance.
    """
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)

    logger = logging.getLogger(logger_name)
    logger.setLevel(level)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    if not any(isinstance(h, logging.StreamHandler) and not isinstance(h, logging.FileHandler) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stdout)
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    for handler in logger.handlers:
        handler.setLevel(level)

    if log_file is not None:
        log_path = Path(log_file).resolve()
        known = {
            Path(h.baseFilename).resolve() for h in logger.handlers if isinstance(h, logging.FileHandler)
        }
        if log_path not in known:
            log_path.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_path, mode="w", encoding="utf-8")
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

    return logger


def close_file_handlers(logger_name: str = BASE_LOGGER) -> None:
    """Detach and close file handlers added by setup_logging."""
    logger = logging.getLogger(logger_name)
    for handler in list(logger.handlers):
        if isinstance(handler, logging.FileHandler):
            logger.removeHandler(handler)
            handler.close()


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """Get a logger instance.

    Args:
        name: Logger name. If None, returns the package logger.
              If provided, returns a child logger (spacetime_agfem.name).

    Returns:
        Logger instance.
    """
    if name:
        return logging.getLogger(f"{BASE_LOGGER}.{name}")
    return logging.getLogger(BASE_LOGGER)
