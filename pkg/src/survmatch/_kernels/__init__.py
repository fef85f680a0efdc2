"""Kernel backend selection.

The survival-curve recursions are the hot inner loops of training and
evaluation. A Cython extension provides compiled versions; if it is not
built (or ``SURVMATCH_PURE=1`` is set) the numpy fallback is used. Both
expose the same five functions and must agree numerically; see
tests/test_kernels.py and benchmarks/bench_kernels.py.
"""

import os

from . import _fallback

if os.environ.get("SURVMATCH_PURE", "") == "1":
    _impl = _fallback
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = _fallback

BACKEND = _impl.BACKEND
DEN_GUARD = _fallback.DEN_GUARD
pkm_sums = _impl.pkm_sums
dkm_sums = _impl.dkm_sums
product_limit = _impl.product_limit
smooth_pkm_forward = _impl.smooth_pkm_forward
smooth_pkm_vjp = _impl.smooth_pkm_vjp


def available_backends():
    """Names of the kernel implementations importable in this install."""
    names = ["numpy"]
    try:
        from . import _speedups  # noqa: F401

        names.append(_speedups.BACKEND)
    except ImportError:
        pass
    return names
