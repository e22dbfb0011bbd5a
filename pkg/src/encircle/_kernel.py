"""Simulation-kernel selection.

The compiled extension is preferred when importable; the pure Python
kernel is the fallback. Both produce bitwise identical trajectories.
Set ENCIRCLE_BACKEND=python or =cython to force one (forcing cython
raises if the extension is missing).
"""

from __future__ import annotations

import os

_choice = os.environ.get("ENCIRCLE_BACKEND", "auto").strip().lower()

if _choice in ("python", "purepython", "pure"):
    from . import _purepy as _impl
elif _choice in ("cython", "c", "compiled"):
    from . import _core as _impl  # ImportError here means no compiled kernel
elif _choice in ("", "auto"):
    try:
        from . import _core as _impl
    except ImportError:
        from . import _purepy as _impl
else:
    raise RuntimeError(
        f"ENCIRCLE_BACKEND={_choice!r} not recognized; use 'auto', 'python', or 'cython'"
    )

run_loop = _impl.run_loop
BACKEND = _impl.BACKEND
