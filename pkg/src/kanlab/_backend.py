"""Kernel backend selection: compiled extension if available, else pure Python.

Set KANLAB_PURE_PYTHON=1 to force the fallback (used by the benchmark and the
backend-agreement tests).  Both backends are bit-identical by construction.
"""

import os
import warnings

if os.environ.get("KANLAB_PURE_PYTHON") == "1":
    from kanlab import _kernels_py as kernels
else:
    try:
        from kanlab import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - depends on the build
        from kanlab import _kernels_py as kernels

        warnings.warn(
            "kanlab compiled kernels unavailable; using the pure-Python fallback "
            "(orders of magnitude slower for rasters and separating-map scans)",
            RuntimeWarning,
            stacklevel=2,
        )

BACKEND = kernels.BACKEND


def get_kernels():
    return kernels
