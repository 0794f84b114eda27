import logging
import os
from typing import Optional

from dotenv import load_dotenv

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Install a single stream handler on the root logger

    Args:
        level: Level name; falls back to CASIMECH_LOG_LEVEL, then INFO

    Returns:
        The configured root logger
    """
    load_dotenv()
    level_name = (level or os.getenv("CASIMECH_LOG_LEVEL", "INFO")).upper()

    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_casimech", False):
            root.removeHandler(handler)

    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._casimech = True
    root.addHandler(handler)
    root.setLevel(getattr(logging, level_name, logging.INFO))
    return root
