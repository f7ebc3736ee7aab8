from ._episir import *  # noqa: F401,F403
from ._episir import __version__  # noqa: F401
