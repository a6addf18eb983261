"""Decode-time dynamic programs, compiled when possible.

Importing this package picks the Cython extension if it was built and the
numpy fallback otherwise; `BACKEND` says which one is live.  Set
SYLPARSE_PURE=1 to force the fallback (the benchmark under bench/ uses this
to compare the two).  Both backends are bit-identical.
"""

import os

import numpy as np

from sylparse.kernels import pure as _pure

if os.environ.get("SYLPARSE_PURE"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from sylparse.kernels import _speedups as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

__all__ = ["BACKEND", "eisner_decode", "viterbi_decode"]


def viterbi_decode(emissions, start, trans, stop) -> np.ndarray:
    """Best tag path for (n, T) emission scores; ties take the lowest tag."""
    emissions = np.ascontiguousarray(emissions, dtype=np.float64)
    start = np.ascontiguousarray(start, dtype=np.float64)
    trans = np.ascontiguousarray(trans, dtype=np.float64)
    stop = np.ascontiguousarray(stop, dtype=np.float64)
    num_tags = emissions.shape[1] if emissions.ndim == 2 else 0
    if (
        emissions.ndim != 2
        or start.shape != (num_tags,)
        or trans.shape != (num_tags, num_tags)
        or stop.shape != (num_tags,)
    ):
        raise ValueError(
            f"viterbi_decode: inconsistent shapes {emissions.shape}, "
            f"{start.shape}, {trans.shape}, {stop.shape}"
        )
    return _impl.viterbi_decode(emissions, start, trans, stop)


def eisner_decode(scores) -> np.ndarray:
    """Best projective tree for (n+1, n+1) arc scores; heads[d-1] in 0..n."""
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[0] != scores.shape[1] or scores.shape[0] < 1:
        raise ValueError(f"eisner_decode: expected a square matrix, got {scores.shape}")
    return _impl.eisner_decode(scores)
