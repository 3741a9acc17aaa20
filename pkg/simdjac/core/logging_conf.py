import logging
from structlog import wrap_logger

from .config import get_settings


def get_logger(name: str = "simdjac"):
    logger = logging.getLogger(name)
    if not logger.handlers and not logging.getLogger().handlers:
        logging.basicConfig(level=getattr(logging, get_settings().log_level.upper(), logging.INFO))
    return wrap_logger(logger)
