"""Weighted Bergman and spectral kernels for (0,q)-forms on C^n."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
