# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: purity cut scan and Gini split scan.

Must stay semantically identical to `pure.py` (same candidate sets,
tie-breaks, and float operation order).
"""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()

BACKEND = "compiled"


def best_cuts(double[::1] a_sorted, cnp.int64_t[::1] y_sorted,
              cnp.int64_t[::1] class_counts):
    """Per-class (purity, cut) for one descending-sorted activation column."""
    cdef Py_ssize_t n = a_sorted.shape[0]
    cdef Py_ssize_t num_classes = class_counts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best_p = np.full(num_classes, -1.0)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] best_k = np.zeros(num_classes, dtype=np.int64)
    cdef double[::1] bp = best_p
    cdef cnp.int64_t[::1] bk = best_k

    cdef cnp.int64_t* counts = <cnp.int64_t*> malloc(num_classes * sizeof(cnp.int64_t))
    if counts == NULL:
        raise MemoryError()
    cdef Py_ssize_t i, c
    cdef cnp.int64_t k, tp, fp, tn, cc, nc
    cdef double purity
    try:
        for c in range(num_classes):
            counts[c] = 0
        for i in range(n):
            counts[y_sorted[i]] += 1
            k = i + 1
            if i + 1 < n and not (a_sorted[i] > a_sorted[i + 1]):
                continue
            for c in range(num_classes):
                cc = class_counts[c]
                nc = n - cc
                tp = counts[c]
                fp = k - tp
                tn = nc - fp
                purity = (<double> tp) / (<double> cc) + (<double> tn) / (<double> nc)
                if purity > bp[c]:
                    bp[c] = purity
                    bk[c] = k
    finally:
        free(counts)
    return best_p, best_k


def best_gini_split(double[::1] x_sorted, cnp.int64_t[::1] y_sorted,
                    int num_classes, int min_leaf):
    """Best (gain, pos) Gini split of one ascending-sorted feature column."""
    cdef Py_ssize_t n = x_sorted.shape[0]
    if n < 2 * min_leaf or n < 2:
        return -1.0, -1

    cdef cnp.int64_t* left = <cnp.int64_t*> malloc(num_classes * sizeof(cnp.int64_t))
    cdef cnp.int64_t* total = <cnp.int64_t*> malloc(num_classes * sizeof(cnp.int64_t))
    if left == NULL or total == NULL:
        if left != NULL:
            free(left)
        if total != NULL:
            free(total)
        raise MemoryError()

    cdef Py_ssize_t i, c
    cdef cnp.int64_t pos
    cdef double p, parent_sq, imp_parent, sq_l, sq_r, imp_l, imp_r, gain
    cdef double best_gain = -1.0
    cdef cnp.int64_t best_pos = -1
    cdef double nl, nr, nd = <double> n
    try:
        for c in range(num_classes):
            left[c] = 0
            total[c] = 0
        for i in range(n):
            total[y_sorted[i]] += 1

        parent_sq = 0.0
        for c in range(num_classes):
            p = (<double> total[c]) / nd
            parent_sq += p * p
        imp_parent = 1.0 - parent_sq

        for i in range(n - 1):
            left[y_sorted[i]] += 1
            pos = i + 1
            if x_sorted[i] == x_sorted[i + 1]:
                continue
            if pos < min_leaf or n - pos < min_leaf:
                continue
            nl = <double> pos
            nr = <double> (n - pos)
            sq_l = 0.0
            sq_r = 0.0
            for c in range(num_classes):
                p = (<double> left[c]) / nl
                sq_l += p * p
                p = (<double> (total[c] - left[c])) / nr
                sq_r += p * p
            imp_l = 1.0 - sq_l
            imp_r = 1.0 - sq_r
            gain = imp_parent - (nl / nd) * imp_l - (nr / nd) * imp_r
            if gain > best_gain:
                best_gain = gain
                best_pos = pos
    finally:
        free(left)
        free(total)
    if best_pos < 0:
        return -1.0, -1
    return best_gain, best_pos
