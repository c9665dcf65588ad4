"""Kernel selection: the compiled extension when it imports, otherwise the
pure-Python reference.  Set ``ROUTINEVIS_PURE=1`` to force the fallback."""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("ROUTINEVIS_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

WRITE, FAIL, RESTART = _pykernels.WRITE, _pykernels.FAIL, _pykernels.RESTART

replay = _impl.replay
find_serial_order = _impl.find_serial_order
count_inversions = _impl.count_inversions
