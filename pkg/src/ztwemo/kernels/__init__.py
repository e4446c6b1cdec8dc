"""
Hot loops with a compiled backend and a numpy fallback.

The Cython extension is used when it was built; otherwise, or when
``ZTWEMO_KERNELS=python`` is set, the numpy versions are used. Both
backends return bit-identical results.
"""

import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("ZTWEMO_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

peak_sum_rows = _impl.peak_sum_rows
viterbi_log = _impl.viterbi_log

__all__ = ["BACKEND", "peak_sum_rows", "viterbi_log"]
