"""Kernel backend selection.

The compiled Cython kernels are preferred when the extension was built;
otherwise the numpy fallback is used.  Set ``INEXACT_PG_BACKEND=python``
(or ``cython``) to force a backend; forcing ``cython`` raises if the
extension is unavailable.  ``benchmarks/bench_kernels.py`` compares the two.
"""

import os

from . import _dykstra_py

_forced = os.environ.get("INEXACT_PG_BACKEND", "").strip().lower()

if _forced == "python":
    _impl = _dykstra_py
    BACKEND = "python"
else:
    try:
        from . import _dykstra_cy as _impl
        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise
        _impl = _dykstra_py
        BACKEND = "python"

sweep_rowcol = _impl.sweep_rowcol
dual_gap_rowcol = _impl.dual_gap_rowcol


def backend() -> str:
    """Name of the kernel backend in use ("cython" or "python")."""
    return BACKEND
