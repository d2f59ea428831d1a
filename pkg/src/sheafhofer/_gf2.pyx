# cython: language_level=3, boundscheck=False, wraparound=False
"""Bit-packed Gauss-Jordan elimination over GF(2)."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t

cnp.import_array()


def rref_packed(uint64_t[:, ::1] rows, Py_ssize_t ncols):
    """Reduce packed rows in place; return the list of pivot columns.

    Column ``c`` lives in word ``c >> 6``, bit ``c & 63``.  On return the
    first ``len(pivots)`` rows hold the reduced row echelon form.
    """
    cdef Py_ssize_t nrows = rows.shape[0]
    cdef Py_ssize_t nwords = rows.shape[1]
    cdef Py_ssize_t r = 0, c, i, k, piv, w
    cdef uint64_t bit, tmp
    pivots = []
    for c in range(ncols):
        if r == nrows:
            break
        w = c >> 6
        bit = (<uint64_t>1) << (c & 63)
        piv = -1
        for i in range(r, nrows):
            if rows[i, w] & bit:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for k in range(nwords):
                tmp = rows[r, k]
                rows[r, k] = rows[piv, k]
                rows[piv, k] = tmp
        for i in range(nrows):
            if i != r and (rows[i, w] & bit):
                for k in range(w, nwords):
                    rows[i, k] ^= rows[r, k]
        pivots.append(c)
        r += 1
    return pivots


def rank_packed(uint64_t[:, ::1] rows, Py_ssize_t ncols):
    """Rank of the packed matrix; destroys ``rows``."""
    cdef Py_ssize_t nrows = rows.shape[0]
    cdef Py_ssize_t nwords = rows.shape[1]
    cdef Py_ssize_t r = 0, c, i, k, piv, w
    cdef uint64_t bit, tmp
    for c in range(ncols):
        if r == nrows:
            break
        w = c >> 6
        bit = (<uint64_t>1) << (c & 63)
        piv = -1
        for i in range(r, nrows):
            if rows[i, w] & bit:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for k in range(nwords):
                tmp = rows[r, k]
                rows[r, k] = rows[piv, k]
                rows[piv, k] = tmp
        for i in range(r + 1, nrows):
            if rows[i, w] & bit:
                for k in range(w, nwords):
                    rows[i, k] ^= rows[r, k]
        r += 1
    return r
