"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise (or when
``ECHEUR_PURE_PYTHON=1``) the pure-Python module with identical signatures.
"""

import os

from . import _pykernels

if os.environ.get("ECHEUR_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

enumerate_stripe = _impl.enumerate_stripe
frobenius_trace = _impl.frobenius_trace
reduce_batch = _impl.reduce_batch
is_minimal_c = _impl.is_minimal_c


def available_backends():
    """Map of backend name to kernel module, for benchmarks and parity tests."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
