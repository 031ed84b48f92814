"""Backend selection for the hot numeric kernels.

Set ``DTAFUSION_BACKEND`` to ``numba``, ``numpy``, or ``auto`` (default) before
import. ``auto`` prefers the numba backend and silently falls back to the pure
numpy implementations when numba is unavailable; asking for ``numba``
explicitly raises if it cannot be imported.

Both backends implement identical semantics (see tests/test_kernels.py) and
the benchmark in benchmarks/bench_kernels.py compares them.
"""

import logging
import os

from . import _numpy

logger = logging.getLogger(__name__)

_choice = os.environ.get("DTAFUSION_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"DTAFUSION_BACKEND must be 'auto', 'numba', or 'numpy', got {_choice!r}"
    )

if _choice == "numpy":
    _impl = _numpy
else:
    try:
        from . import _numba as _impl
    except ImportError as exc:
        if _choice == "numba":
            raise ImportError(f"numba backend requested but unavailable: {exc}")
        logger.warning("numba unavailable (%s); using numpy kernels", exc)
        _impl = _numpy

BACKEND_NAME = _impl.BACKEND_NAME

neighbor_sum = _impl.neighbor_sum
segment_sum = _impl.segment_sum
conv1d_forward = _impl.conv1d_forward
conv1d_backward_x = _impl.conv1d_backward_x
conv1d_backward_w = _impl.conv1d_backward_w
contact_pairs = _impl.contact_pairs
ci_pair_stats = _impl.ci_pair_stats

__all__ = [
    "BACKEND_NAME",
    "neighbor_sum",
    "segment_sum",
    "conv1d_forward",
    "conv1d_backward_x",
    "conv1d_backward_w",
    "contact_pairs",
    "ci_pair_stats",
]
