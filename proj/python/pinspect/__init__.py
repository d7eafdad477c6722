"""In-hand pose estimation and pre-insertion pin inspection for
through-hole components.

The heavy lifting lives in the C++ extension; this package re-exports it.
"""

from ._pinspect import *  # noqa: F401,F403
from ._pinspect import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
