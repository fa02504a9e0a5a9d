"""Closed-loop engine backends.

The compiled extension is preferred when present; the pure-Python loop is a
complete fallback producing byte-identical traces.  Set MODELFREE_PURE_PYTHON=1
to force the fallback (used by the benchmark and the parity tests).
"""

from __future__ import annotations

import os

from . import loop_py

run_loop = loop_py.run_loop
_backend = "python"

if os.environ.get("MODELFREE_PURE_PYTHON", "0") not in ("1", "true", "yes"):
    try:
        from . import _loop_cy  # type: ignore[attr-defined]

        run_loop = _loop_cy.run_loop
        _backend = "compiled"
    except ImportError:
        pass


def backend() -> str:
    """Name of the active backend: 'compiled' or 'python'."""
    return _backend
