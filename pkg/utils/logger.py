"""
Logging configuration for the simulator and its command-line scripts.
"""

import logging
import os
import sys
from typing import Optional

from config import LOG_FORMAT, LOG_LEVEL, LOG_LEVEL_ENV_VAR, PACKAGE_NAME


def resolve_level(level: Optional[str] = None) -> int:
    """
    Resolve a logging level name, falling back to the environment and then the default.

    Args:
        level: Level name (DEBUG, INFO, WARNING, ERROR, CRITICAL) or None

    Returns:
        Numeric logging level
    """
    name = level or os.getenv(LOG_LEVEL_ENV_VAR) or LOG_LEVEL
    return getattr(logging, name.upper(), logging.INFO)


def setup_logger(name: str = PACKAGE_NAME, level: Optional[str] = None) -> logging.Logger:
    """
    Set up and configure a logger.

    Library modules log through ``logging.getLogger(__name__)``; scripts call this once
    so that records from every package reach stdout with the project format.

    Args:
        name: Logger name
        level: Logging level; ``JCSIM_LOG_LEVEL`` is used when omitted

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)
    numeric_level = resolve_level(level)
    logger.setLevel(numeric_level)

    root = logging.getLogger()
    root.setLevel(numeric_level)

    # Avoid duplicate handlers
    if any(getattr(h, "_jcsim_handler", False) for h in root.handlers):
        for handler in root.handlers:
            handler.setLevel(numeric_level)
        return logger

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    console_handler._jcsim_handler = True

    root.addHandler(console_handler)

    return logger
