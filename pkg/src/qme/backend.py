"""Backend selection: compiled extension when importable, numpy otherwise.

Set QME_BACKEND=python to force the pure-Python path.
"""

from __future__ import annotations

import os

from . import _purepy

if os.environ.get("QME_BACKEND", "").lower() == "python":
    _impl = _purepy
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:  # pragma: no cover - build-less environments
        _impl = _purepy
        BACKEND = "python"

DenseStepper = _impl.DenseStepper
volterra_run = _impl.volterra_run
reference = _purepy
