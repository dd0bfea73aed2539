"""Forward-backward transceiver coordination for MIMO interfering networks."""

from ._fbcoord import *  # noqa: F401,F403
from ._fbcoord import __doc__  # noqa: F401

__version__ = "0.1.0"
