import logging
import sys

from pythonjsonlogger import jsonlogger

from app.core.config import settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(filename)s %(lineno)d %(message)s"


def get_logger(name: str = "fl-energy"):
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    level = logging.DEBUG if settings.DEBUG else getattr(logging, settings.LOG_LEVEL, logging.INFO)
    logger.setLevel(level)

    ch = logging.StreamHandler(sys.stdout)
    # extra={...} fields (round, strategy, duration, ...) land as top-level JSON keys
    ch.setFormatter(
        jsonlogger.JsonFormatter(
            LOG_FORMAT,
            rename_fields={"asctime": "time", "levelname": "level", "name": "logger"},
        )
    )
    logger.addHandler(ch)
    logger.propagate = False
    return logger


logger = get_logger()
