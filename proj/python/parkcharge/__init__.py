"""Online posted-price admission control and smart charging for EV parking facilities."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
