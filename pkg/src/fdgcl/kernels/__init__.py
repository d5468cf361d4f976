"""Backend selection for the fractional-Euler segment kernel.

The compiled extension (``fdgcl.kernels._fast``, built from Cython) is
preferred; the numpy implementation is the drop-in fallback.  Set
``FDGCL_FORCE_NUMPY=1`` to skip the extension, e.g. for benchmarking or
debugging.  ``BACKEND`` names whichever implementation is live.
"""

import os

from . import _pure

if os.environ.get("FDGCL_FORCE_NUMPY", "") == "1":
    _impl = _pure
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pure

BACKEND = "cython" if _impl is not _pure else _pure.BACKEND


def segment_grand(indptr, indices, data, z0, weights, scale,
                  return_history=False):
    return _impl.segment_grand(indptr, indices, data, z0, weights, scale,
                               return_history)
