"""Scan-kernel selection: compiled extension when available, numpy otherwise.

Set XLSEARCH_KERNEL=python or XLSEARCH_KERNEL=cython to force a backend;
forcing cython when the extension is missing is an import error rather than
a silent fallback.
"""

import os

_forced = os.environ.get("XLSEARCH_KERNEL", "").strip().lower()

if _forced == "python":
    from .py import BACKEND, scan_scores
elif _forced == "cython":
    from ._scan import BACKEND, scan_scores
elif _forced == "":
    try:
        from ._scan import BACKEND, scan_scores
    except ImportError:
        from .py import BACKEND, scan_scores
else:
    raise ImportError(
        f"XLSEARCH_KERNEL must be 'cython' or 'python', got {_forced!r}"
    )

__all__ = ["BACKEND", "scan_scores"]
