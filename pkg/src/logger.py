"""
Logging helper shared by every module.

Each module calls ``logger = attach_to_log(__name__)`` once at import time.
"""

import logging
import sys
from typing import Optional

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
_ROOT_NAME = "polymesh"


def attach_to_log(name: Optional[str] = None, level: Optional[int] = None) -> logging.Logger:
    """
    Return a logger below the package root logger.

    The root logger gets a single stderr handler the first time this is
    called; later calls reuse it.

    Args:
        name: Module name, usually ``__name__``
        level: Optional level applied to the package root logger

    Returns:
        logging.Logger
    """
    root = logging.getLogger(_ROOT_NAME)
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        root.addHandler(handler)
        root.setLevel(logging.INFO)
        root.propagate = False
    if level is not None:
        root.setLevel(level)

    if not name or name == _ROOT_NAME:
        return root
    short = name.split(".")[-1]
    return root.getChild(short)


def set_level(level: int) -> None:
    """Change the level of the package root logger."""
    attach_to_log(level=level)
