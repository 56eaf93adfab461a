"""Random quantum channel models: numerics, exact moments, limits."""

from .diagrams import *  # noqa: F401,F403
from .diagrams import __all__ as _diagrams_all
from .models import *  # noqa: F401,F403
from .models import __all__ as _models_all
from .moments import *  # noqa: F401,F403
from .moments import __all__ as _moments_all
from .stinespring import *  # noqa: F401,F403
from .stinespring import __all__ as _stinespring_all

__all__ = _stinespring_all + _moments_all + _models_all + _diagrams_all
