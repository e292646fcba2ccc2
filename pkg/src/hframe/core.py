"""Kernel backend selection.

The candidate-pruning sweeps and the backtracking search dominate runtime,
so they exist twice: a Cython extension (``hframe._core``) and a pure-Python
fallback (``hframe._ref``) with identical behavior.  The compiled backend is
picked at import when available; set ``HFRAME_PURE_PYTHON=1`` to force the
fallback (used by the cross-checking tests and the core benchmark).
"""

from __future__ import annotations

import os

from hframe import _ref

if os.environ.get("HFRAME_PURE_PYTHON", "") not in ("", "0"):
    _impl = _ref
else:
    try:
        from hframe import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _ref

dualsim_run = _impl.dualsim_run
hom_search = _impl.hom_search


def backend_name() -> str:
    """Name of the active kernel backend ('compiled' or 'pure-python')."""
    return _impl.BACKEND_NAME


def backends() -> dict[str, object]:
    """All importable kernel backends, keyed by name."""
    found = {_ref.BACKEND_NAME: _ref}
    try:
        from hframe import _core

        found[_core.BACKEND_NAME] = _core
    except ImportError:
        pass
    return found
