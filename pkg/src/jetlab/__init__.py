"""Symbolic jet-space calculus and homotopy-algebra identity checks."""
from .diffpoly import *  # noqa: F401,F403
from .parser import *  # noqa: F401,F403
from .equation import *  # noqa: F401,F403
from .symmetry import *  # noqa: F401,F403
from .horizontal import *  # noqa: F401,F403
from .homotopy import *  # noqa: F401,F403
from .foliation import *  # noqa: F401,F403
from . import diffpoly, equation, foliation, homotopy, horizontal, parser, symmetry

__version__ = "0.1.0"
