"""Exact linear algebra over the field with two elements.

Matrices are ``numpy`` arrays of 0/1 values (any integer dtype; entries are
read mod 2).  The elimination kernel is the compiled ``_gf2`` extension when
it was built, otherwise a pure-Python fallback that packs each row into a
Python ``int``.  Both kernels produce identical results; ``set_backend``
switches between them (used by the tests and the benchmark).
"""

from __future__ import annotations

import numpy as np

try:
    from . import _gf2
except ImportError:  # extension not built
    _gf2 = None

__all__ = [
    "BACKEND",
    "available_backends",
    "set_backend",
    "as_gf2",
    "rank",
    "rref",
    "nullspace",
    "solve",
    "inverse",
    "matmul",
]

BACKEND = "cython" if _gf2 is not None else "python"


def available_backends():
    return ["cython", "python"] if _gf2 is not None else ["python"]


def set_backend(name):
    """Select the elimination kernel; returns the previous backend name."""
    global BACKEND
    if name not in available_backends():
        raise ValueError(f"GF(2) backend {name!r} is not available")
    previous, BACKEND = BACKEND, name
    return previous


def as_gf2(m):
    a = np.asarray(m)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    return (a.astype(np.int64) & 1).astype(np.uint8)


# -- packing ---------------------------------------------------------------

def _pack_words(a):
    nrows, ncols = a.shape
    nwords = max(1, (ncols + 63) // 64)
    padded = np.zeros((nrows, nwords * 64), dtype=np.uint8)
    padded[:, :ncols] = a
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").reshape(nrows, nwords).astype(np.uint64)


def _unpack_words(words, ncols):
    if words.shape[0] == 0:
        return np.zeros((0, ncols), dtype=np.uint8)
    raw = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    bits = np.unpackbits(raw.reshape(words.shape[0], -1), axis=1, bitorder="little")
    return bits[:, :ncols].astype(np.uint8)


def _pack_ints(a):
    weights = [1 << c for c in range(a.shape[1])]
    return [sum(w for w, v in zip(weights, row) if v) for row in a.tolist()]


def _unpack_ints(rows, ncols):
    out = np.zeros((len(rows), ncols), dtype=np.uint8)
    for i, row in enumerate(rows):
        c = 0
        while row:
            if row & 1:
                out[i, c] = 1
            row >>= 1
            c += 1
    return out


def _py_rref(rows, ncols):
    rows = list(rows)
    pivots = []
    r = 0
    for c in range(ncols):
        if r == len(rows):
            break
        bit = 1 << c
        piv = next((i for i in range(r, len(rows)) if rows[i] & bit), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pr = rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= pr
        pivots.append(c)
        r += 1
    return rows[:r], pivots


# -- public API ------------------------------------------------------------

def rref(m):
    """Reduced row echelon form: returns ``(R, pivots)`` with R of full row rank."""
    a = as_gf2(m)
    nrows, ncols = a.shape
    if nrows == 0 or ncols == 0:
        return np.zeros((0, ncols), dtype=np.uint8), []
    if BACKEND == "cython":
        words = _pack_words(a)
        pivots = list(_gf2.rref_packed(words, ncols))
        return _unpack_words(words[: len(pivots)], ncols), pivots
    rows, pivots = _py_rref(_pack_ints(a), ncols)
    return _unpack_ints(rows, ncols), pivots


def rank(m):
    a = as_gf2(m)
    if a.size == 0:
        return 0
    if BACKEND == "cython":
        return int(_gf2.rank_packed(_pack_words(a), a.shape[1]))
    return len(_py_rref(_pack_ints(a), a.shape[1])[1])


def nullspace(m):
    """Basis of ``{x : m @ x = 0}`` as the rows of the returned matrix."""
    a = as_gf2(m)
    ncols = a.shape[1]
    r, pivots = rref(a)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = np.zeros((len(free), ncols), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, p in enumerate(pivots):
            basis[k, p] = r[i, f]
    return basis


def solve(a, b):
    """One solution ``x`` of ``a @ x = b`` or ``None`` when inconsistent."""
    a = as_gf2(a)
    b = as_gf2(np.asarray(b).reshape(-1, 1))
    ncols = a.shape[1]
    r, pivots = rref(np.hstack([a, b]))
    if ncols in pivots:
        return None
    x = np.zeros(ncols, dtype=np.uint8)
    for i, p in enumerate(pivots):
        x[p] = r[i, ncols]
    return x


def inverse(m):
    a = as_gf2(m)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    r, pivots = rref(np.hstack([a, np.eye(n, dtype=np.uint8)]))
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise np.linalg.LinAlgError("singular matrix over GF(2)")
    return r[:n, n:]


def matmul(a, b):
    return ((as_gf2(a).astype(np.int64) @ as_gf2(b).astype(np.int64)) & 1).astype(np.uint8)
