"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module is used.  Set ``TALANOV_NLS_PURE=1`` to force the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("TALANOV_NLS_PURE", "") in ("", "0"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels

REDUCED = _pykernels.REDUCED
FULL = _pykernels.FULL
DONE = _pykernels.DONE
DIVERGED = _pykernels.DIVERGED
UNDERFLOW = _pykernels.UNDERFLOW
MAX_STEPS = _pykernels.MAX_STEPS

rhs = _impl.rhs
dopri_step = _impl.dopri_step
dopri_integrate = _impl.dopri_integrate
unwrap_segments = _impl.unwrap_segments
