# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled twins of kernels/pure.py.

Same algorithms, same tie-breaking (first maximum), same float operation
order, so results are bit-identical with the numpy fallback.
"""

import numpy as np


def viterbi_decode(double[:, ::1] emissions, double[::1] start,
                   double[:, ::1] trans, double[::1] stop):
    cdef Py_ssize_t n = emissions.shape[0]
    cdef Py_ssize_t num_tags = emissions.shape[1]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    trellis_arr = np.empty((n, num_tags))
    backptr_arr = np.empty((n, num_tags), dtype=np.int64)
    path_arr = np.empty(n, dtype=np.int64)
    cdef double[:, ::1] trellis = trellis_arr
    cdef long long[:, ::1] backptr = backptr_arr
    cdef long long[::1] path = path_arr
    cdef Py_ssize_t j, s, t, best
    cdef double cand, best_score

    for t in range(num_tags):
        trellis[0, t] = start[t] + emissions[0, t]
    for j in range(1, n):
        for t in range(num_tags):
            best = 0
            best_score = trellis[j - 1, 0] + trans[0, t]
            for s in range(1, num_tags):
                cand = trellis[j - 1, s] + trans[s, t]
                if cand > best_score:
                    best_score = cand
                    best = s
            backptr[j, t] = best
            trellis[j, t] = best_score + emissions[j, t]
    best = 0
    best_score = trellis[n - 1, 0] + stop[0]
    for t in range(1, num_tags):
        cand = trellis[n - 1, t] + stop[t]
        if cand > best_score:
            best_score = cand
            best = t
    path[n - 1] = best
    for j in range(n - 1, 0, -1):
        best = backptr[j, best]
        path[j - 1] = best
    return path_arr


def eisner_decode(double[:, ::1] scores):
    cdef Py_ssize_t n = scores.shape[0] - 1
    heads_arr = np.zeros(n if n > 0 else 0, dtype=np.int64)
    if n <= 0:
        return heads_arr
    cdef long long[::1] heads = heads_arr

    c_l_arr = np.zeros((n + 1, n + 1))
    c_r_arr = np.zeros((n + 1, n + 1))
    i_l_arr = np.full((n + 1, n + 1), -np.inf)
    i_r_arr = np.full((n + 1, n + 1), -np.inf)
    s_i_arr = np.zeros((n + 1, n + 1), dtype=np.int64)
    s_cl_arr = np.zeros((n + 1, n + 1), dtype=np.int64)
    s_cr_arr = np.zeros((n + 1, n + 1), dtype=np.int64)
    cdef double[:, ::1] c_l = c_l_arr, c_r = c_r_arr, i_l = i_l_arr, i_r = i_r_arr
    cdef long long[:, ::1] s_i = s_i_arr, s_cl = s_cl_arr, s_cr = s_cr_arr

    cdef Py_ssize_t length, i, j, s, best
    cdef double cand, best_score

    for length in range(1, n + 1):
        for i in range(0, n + 1 - length):
            j = i + length
            best = i
            best_score = c_r[i, i] + c_l[i + 1, j]
            for s in range(i + 1, j):
                cand = c_r[i, s] + c_l[s + 1, j]
                if cand > best_score:
                    best_score = cand
                    best = s
            s_i[i, j] = best
            i_l[i, j] = best_score + scores[j, i]
            i_r[i, j] = best_score + scores[i, j]

            best = i
            best_score = c_l[i, i] + i_l[i, j]
            for s in range(i + 1, j):
                cand = c_l[i, s] + i_l[s, j]
                if cand > best_score:
                    best_score = cand
                    best = s
            s_cl[i, j] = best
            c_l[i, j] = best_score

            best = i + 1
            best_score = i_r[i, i + 1] + c_r[i + 1, j]
            for s in range(i + 2, j + 1):
                cand = i_r[i, s] + c_r[s, j]
                if cand > best_score:
                    best_score = cand
                    best = s
            s_cr[i, j] = best
            c_r[i, j] = best_score

    stack = [(0, n, True, True)]
    cdef bint head_left, complete
    while stack:
        i, j, head_left, complete = stack.pop()
        if i == j:
            continue
        if not complete:
            s = s_i[i, j]
            if head_left:
                heads[j - 1] = i
            else:
                heads[i - 1] = j
            stack.append((i, s, True, True))
            stack.append((s + 1, j, False, True))
        elif head_left:
            s = s_cr[i, j]
            stack.append((i, s, True, False))
            stack.append((s, j, True, True))
        else:
            s = s_cl[i, j]
            stack.append((i, s, False, True))
            stack.append((s, j, False, False))
    return heads_arr
