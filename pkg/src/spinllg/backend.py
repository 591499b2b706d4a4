"""Selects the compiled integrator kernels, or the pure-Python fallback.

Set ``SPINLLG_PURE=1`` to force the fallback.
"""

import os

from . import _fallback

if os.environ.get("SPINLLG_PURE", "") not in ("", "0"):
    kernels = _fallback
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        kernels = _fallback

NAME = "compiled" if kernels is not _fallback else "python"
