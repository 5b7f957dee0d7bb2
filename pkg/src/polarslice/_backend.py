"""Select the chain-kernel backend at import time.

The compiled extension is preferred; set ``POLARSLICE_BACKEND=python`` to
force the pure-Python twins (e.g. to benchmark, or on a host without a
compiler). Both backends are bit-identical for the same stream.
"""

import os
import warnings

from . import _chainpy

_requested = os.environ.get("POLARSLICE_BACKEND", "").lower()

if _requested == "python":
    kernels = _chainpy
else:
    try:
        from . import _chain as kernels  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise
        warnings.warn(
            "compiled chain kernels unavailable; falling back to pure Python "
            "(build with `pip install -e . --no-build-isolation` for speed)",
            RuntimeWarning,
            stacklevel=2,
        )
        kernels = _chainpy


def backend_name() -> str:
    return kernels.BACKEND
