"""Numpy implementations of the two decode-time dynamic programs.

These are the fallback for the compiled module in `_speedups.pyx`; both
backends must produce bit-identical output (max is exact in float arithmetic
and additions happen in the same order).
"""

from __future__ import annotations

import numpy as np


def viterbi_decode(
    emissions: np.ndarray, start: np.ndarray, trans: np.ndarray, stop: np.ndarray
) -> np.ndarray:
    """Highest-scoring tag path; ties resolve to the lowest tag index.

    `emissions` is (n, T); `start`, `stop` are (T,) scores for the virtual
    boundary transitions and `trans` is the (T, T) tag-to-tag table.
    """
    n, num_tags = emissions.shape
    if n == 0:
        return np.empty(0, dtype=np.int64)
    trellis = np.empty((n, num_tags))
    backptr = np.empty((n, num_tags), dtype=np.int64)
    trellis[0] = start + emissions[0]
    cols = np.arange(num_tags)
    for j in range(1, n):
        v = trellis[j - 1][:, None] + trans
        backptr[j] = v.argmax(axis=0)
        trellis[j] = v[backptr[j], cols] + emissions[j]
    path = np.empty(n, dtype=np.int64)
    tag = int((trellis[n - 1] + stop).argmax())
    path[n - 1] = tag
    for j in range(n - 1, 0, -1):
        tag = int(backptr[j, tag])
        path[j - 1] = tag
    return path


def eisner_decode(scores: np.ndarray) -> np.ndarray:
    """First-order projective decoding over (n+1, n+1) arc scores.

    `scores[h, d]` scores the arc h -> d with position 0 the artificial
    root.  Returns `heads` of length n (heads[d-1] is the head of word d).
    The root may take several children.
    """
    n = scores.shape[0] - 1
    heads = np.zeros(n, dtype=np.int64)
    if n <= 0:
        return heads

    neg = -np.inf
    c_l = np.zeros((n + 1, n + 1))  # complete, head at right end
    c_r = np.zeros((n + 1, n + 1))  # complete, head at left end
    i_l = np.full((n + 1, n + 1), neg)  # incomplete, arc j -> i
    i_r = np.full((n + 1, n + 1), neg)  # incomplete, arc i -> j
    s_i = np.zeros((n + 1, n + 1), dtype=np.int64)  # split of incomplete spans
    s_cl = np.zeros((n + 1, n + 1), dtype=np.int64)
    s_cr = np.zeros((n + 1, n + 1), dtype=np.int64)

    for length in range(1, n + 1):
        for i in range(0, n + 1 - length):
            j = i + length
            # attach an arc between i and j over two complete halves
            inner = c_r[i, i:j] + c_l[i + 1 : j + 1, j]
            s = int(inner.argmax())
            s_i[i, j] = i + s
            i_l[i, j] = inner[s] + scores[j, i]
            i_r[i, j] = inner[s] + scores[i, j]
            # extend a complete span with a finished incomplete one
            left = c_l[i, i:j] + i_l[i:j, j]
            s = int(left.argmax())
            s_cl[i, j] = i + s
            c_l[i, j] = left[s]
            right = i_r[i, i + 1 : j + 1] + c_r[i + 1 : j + 1, j]
            s = int(right.argmax())
            s_cr[i, j] = i + 1 + s
            c_r[i, j] = right[s]

    stack = [(0, n, True, True)]  # (i, j, head-at-left, complete)
    while stack:
        i, j, head_left, complete = stack.pop()
        if i == j:
            continue
        if not complete:
            s = int(s_i[i, j])
            if head_left:
                heads[j - 1] = i
            else:
                heads[i - 1] = j
            stack.append((i, s, True, True))
            stack.append((s + 1, j, False, True))
        elif head_left:
            s = int(s_cr[i, j])
            stack.append((i, s, True, False))
            stack.append((s, j, True, True))
        else:
            s = int(s_cl[i, j])
            stack.append((i, s, False, True))
            stack.append((s, j, False, False))
    return heads
