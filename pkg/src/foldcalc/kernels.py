"""Import-time selection between the compiled and pure-Python kernel.

setup.py compiles ``foldcalc/_kernel.py`` with Cython (pure Python mode)
into the extension ``foldcalc._kernel_c``.  When the extension is present it
is used; otherwise the interpreted module serves as the fallback.  Set
``FOLDCALC_PURE=1`` to force the fallback (used by the benchmark).
"""

from __future__ import annotations

import os

from . import _kernel as _pure

if os.environ.get("FOLDCALC_PURE"):
    _impl = _pure
    COMPILED = False
else:
    try:
        from . import _kernel_c as _impl  # type: ignore[attr-defined]
        COMPILED = True
    except ImportError:
        _impl = _pure
        COMPILED = False

PlacementCapExceeded = _impl.PlacementCapExceeded

embed = _impl.embed
min_cross = _impl.min_cross
placement_points = _impl.placement_points
side_codes = _impl.side_codes
SEARCH_CAP_DEFAULT = _pure.SEARCH_CAP_DEFAULT


def implementation() -> str:
    return "compiled" if COMPILED else "pure-python"
