"""Tensor diagrams, numeric contraction, and the Haar removal expansion."""

from .core import *  # noqa: F401,F403
from .core import __all__ as _core_all
from .io import *  # noqa: F401,F403
from .io import __all__ as _io_all
from .removal import *  # noqa: F401,F403
from .removal import __all__ as _removal_all

__all__ = _core_all + _removal_all + _io_all
