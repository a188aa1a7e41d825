"""Multi-frame super-resolution with total-variation regularisation.

Matrix-free imaging operators, a Horn-Schunck motion estimator, a
majorisation-minimisation TV solver and an interpolation-fusion baseline.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .image import *  # noqa: F401,F403
from .pgm import *  # noqa: F401,F403
from .operators import *  # noqa: F401,F403
from .observation import *  # noqa: F401,F403
from .flow import *  # noqa: F401,F403
from .tv import *  # noqa: F401,F403
from .cg import *  # noqa: F401,F403
from .mm import *  # noqa: F401,F403
from .baselines import *  # noqa: F401,F403
from .config import *  # noqa: F401,F403
