"""
App package initializer.

Holds lightweight metadata and the shared logger so other modules can:
    from app import logger, __version__
"""

from app.core.config import settings
from app.core.logger import logger

__app_name__ = settings.APP_NAME
__version__ = settings.APP_VERSION

__all__ = ["logger", "__app_name__", "__version__"]
