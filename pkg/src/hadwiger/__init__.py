"""Euler calculus on polyhedral domains.

Euler characteristics, intrinsic volumes, lower/upper Hadwiger integrals of
constructible and piecewise-linear functions, and the rigid-motion invariant
valuations built from them.
"""

from .cells import *  # noqa: F401,F403
from .functions import *  # noqa: F401,F403
from .geometry import *  # noqa: F401,F403
from .integrals import *  # noqa: F401,F403
from .intrinsic import *  # noqa: F401,F403
from .io import *  # noqa: F401,F403
from .valuations import *  # noqa: F401,F403
from . import cells, functions, geometry, integrals, intrinsic, io, valuations

__version__ = "0.1.0"

__all__ = (
    cells.__all__
    + functions.__all__
    + geometry.__all__
    + integrals.__all__
    + intrinsic.__all__
    + io.__all__
    + valuations.__all__
)
