# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled scan kernels for the truncated quadratic loss.

Every squared distance is accumulated left to right over coordinates, and
every per-row loss is accumulated in row-index order starting from 0.0 (the
self term ``-G`` sits at the row's own position). ``_kernels_py`` follows the
same arithmetic, so both backends return identical bits.

Pairs are screened on their first ``PRE`` coordinates, laid out
structure-of-arrays for a tile of ``TILE`` rows so the screen vectorises
across rows. A partial sum that already reaches the cutoff proves the pair is
out of the ball because the remaining terms are nonnegative.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport fmin

cnp.import_array()

cdef enum:
    TILE = 64
    PRE = 8


cdef inline double _finish(const double* a, const double* b, Py_ssize_t start,
                           Py_ssize_t d, double s, double cap) noexcept nogil:
    cdef Py_ssize_t t = start
    cdef double diff
    while t < d:
        diff = a[t] - b[t]
        s = s + diff * diff
        t += 1
        if (t & 7) == 0 and s >= cap:
            return s
    return s


cdef inline void _load_tile(const double* X, Py_ssize_t d, Py_ssize_t pre,
                            const Py_ssize_t* rows, Py_ssize_t m,
                            double* pt) noexcept nogil:
    cdef Py_ssize_t u, i
    for u in range(pre):
        for i in range(TILE):
            if i < m:
                pt[u * TILE + i] = X[rows[i] * d + u]
            else:
                pt[u * TILE + i] = 0.0


cdef inline void _prefix(const double* pt, const double* xj, Py_ssize_t pre,
                         double* acc) noexcept nogil:
    cdef Py_ssize_t u, i
    cdef double pj, diff
    for i in range(TILE):
        acc[i] = 0.0
    for u in range(pre):
        pj = xj[u]
        for i in range(TILE):
            diff = pt[u * TILE + i] - pj
            acc[i] = acc[i] + diff * diff


cdef inline bint _any_below(const double* acc, double r2) noexcept nogil:
    cdef Py_ssize_t i
    cdef int hit = 0
    for i in range(TILE):
        hit |= acc[i] < r2
    return hit != 0


cdef void _rows_tile(const double* X, Py_ssize_t n, Py_ssize_t d,
                     const Py_ssize_t* rows, Py_ssize_t m,
                     double r2, double inv, double G, double* out) noexcept nogil:
    cdef double pt[PRE * TILE]
    cdef double acc[TILE]
    cdef Py_ssize_t pre = PRE if d > PRE else d
    cdef Py_ssize_t i, j
    cdef double s
    cdef const double* xj
    _load_tile(X, d, pre, rows, m, pt)
    for i in range(m):
        out[i] = 0.0
    for j in range(n):
        xj = X + j * d
        _prefix(pt, xj, pre, acc)
        if not _any_below(acc, r2):
            continue
        for i in range(m):
            if rows[i] == j:
                out[i] = out[i] + (-G)
            elif acc[i] < r2:
                s = _finish(X + rows[i] * d, xj, pre, d, acc[i], r2)
                if s < r2:
                    out[i] = out[i] + fmin(s * inv - G, 0.0)


cdef void _scan_symmetric(const double* X, Py_ssize_t n, Py_ssize_t d,
                          double r2, double inv, double G, double* o) noexcept nogil:
    cdef double pt[PRE * TILE]
    cdef double acc[TILE]
    cdef Py_ssize_t rows[TILE]
    cdef Py_ssize_t pre = PRE if d > PRE else d
    cdef Py_ssize_t i0 = 0, i1, m, i, j
    cdef double s, term
    cdef const double* xj
    for i in range(n):
        o[i] = 0.0
    while i0 < n:
        i1 = i0 + TILE
        if i1 > n:
            i1 = n
        m = i1 - i0
        for i in range(m):
            rows[i] = i0 + i
        _load_tile(X, d, pre, rows, m, pt)
        o[i0] = o[i0] + (-G)
        for j in range(i0 + 1, n):
            xj = X + j * d
            _prefix(pt, xj, pre, acc)
            if j >= i1 and not _any_below(acc, r2):
                continue
            for i in range(m):
                if i0 + i >= j:
                    break
                if acc[i] < r2:
                    s = _finish(X + (i0 + i) * d, xj, pre, d, acc[i], r2)
                    if s < r2:
                        term = fmin(s * inv - G, 0.0)
                        o[i0 + i] = o[i0 + i] + term
                        o[j] = o[j] + term
            if j < i1:
                o[j] = o[j] + (-G)
        i0 = i1


def scan_losses(const double[:, ::1] X, double r2, double inv, double G,
                int nthreads=1):
    """Total loss centred at every row of ``X`` against all rows of ``X``."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1]
    out = np.zeros(n, dtype=np.float64)
    if n == 0:
        return out
    cdef double[::1] o = out
    cdef cnp.ndarray[cnp.intp_t, ndim=1] rows_arr
    cdef Py_ssize_t[::1] rows
    cdef Py_ssize_t t, ntiles, lo, m
    if nthreads <= 1:
        with nogil:
            _scan_symmetric(&X[0, 0], n, d, r2, inv, G, &o[0])
        return out
    rows_arr = np.arange(n, dtype=np.intp)
    rows = rows_arr
    ntiles = (n + TILE - 1) // TILE
    for t in prange(ntiles, nogil=True, schedule="dynamic", num_threads=nthreads):
        lo = t * TILE
        m = n - lo
        if m > TILE:
            m = TILE
        _rows_tile(&X[0, 0], n, d, &rows[lo], m, r2, inv, G, &o[lo])
    return out


def row_losses(const double[:, ::1] X, const Py_ssize_t[::1] rows, double r2,
               double inv, double G, int nthreads=1):
    """Total loss centred at ``X[rows]`` against all rows of ``X``."""
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], nr = rows.shape[0]
    out = np.zeros(nr, dtype=np.float64)
    if nr == 0 or n == 0:
        return out
    cdef double[::1] o = out
    cdef Py_ssize_t t, ntiles = (nr + TILE - 1) // TILE, lo, m
    for t in prange(ntiles, nogil=True, schedule="dynamic",
                    num_threads=nthreads if nthreads > 0 else 1):
        lo = t * TILE
        m = nr - lo
        if m > TILE:
            m = TILE
        _rows_tile(&X[0, 0], n, d, &rows[lo], m, r2, inv, G, &o[lo])
    return out


def sqdist_to(const double[:, ::1] X, const double[::1] x):
    """Squared distance from every row of ``X`` to ``x``.

    Four rows are summed side by side; each row still adds its terms left to
    right, the interleaving only hides the add latency.
    """
    cdef Py_ssize_t n = X.shape[0], d = X.shape[1], j = 0, t
    out = np.empty(n, dtype=np.float64)
    if n == 0:
        return out
    cdef double[::1] o = out
    cdef double s0, s1, s2, s3, e0, e1, e2, e3, xt
    cdef const double* a
    cdef const double* b = &x[0] if d else NULL
    with nogil:
        while j + 4 <= n:
            a = &X[j, 0] if d else NULL
            s0 = 0.0
            s1 = 0.0
            s2 = 0.0
            s3 = 0.0
            for t in range(d):
                xt = b[t]
                e0 = a[t] - xt
                e1 = a[d + t] - xt
                e2 = a[2 * d + t] - xt
                e3 = a[3 * d + t] - xt
                s0 = s0 + e0 * e0
                s1 = s1 + e1 * e1
                s2 = s2 + e2 * e2
                s3 = s3 + e3 * e3
            o[j] = s0
            o[j + 1] = s1
            o[j + 2] = s2
            o[j + 3] = s3
            j += 4
        while j < n:
            s0 = 0.0
            for t in range(d):
                e0 = X[j, t] - b[t]
                s0 = s0 + e0 * e0
            o[j] = s0
            j += 1
    return out


def any_within(const double[:, ::1] Q, const double[:, ::1] X, double r2):
    """Flag rows of ``Q`` that have some row of ``X`` strictly inside ``r2``."""
    cdef Py_ssize_t nq = Q.shape[0], n = X.shape[0], d = Q.shape[1]
    flags = np.zeros(nq, dtype=np.uint8)
    if nq == 0 or n == 0:
        return flags.view(bool)
    cdef unsigned char[::1] f = flags
    cdef double pt[PRE * TILE]
    cdef double acc[TILE]
    cdef Py_ssize_t rows[TILE]
    cdef Py_ssize_t pre = PRE if d > PRE else d
    cdef Py_ssize_t i0 = 0, m, i, j
    cdef double s
    cdef const double* q = &Q[0, 0]
    cdef const double* x = &X[0, 0]
    with nogil:
        while i0 < nq:
            m = nq - i0
            if m > TILE:
                m = TILE
            for i in range(m):
                rows[i] = i0 + i
            _load_tile(q, d, pre, rows, m, pt)
            for j in range(n):
                _prefix(pt, x + j * d, pre, acc)
                if not _any_below(acc, r2):
                    continue
                for i in range(m):
                    if not f[i0 + i] and acc[i] < r2:
                        s = _finish(q + (i0 + i) * d, x + j * d, pre, d, acc[i], r2)
                        if s < r2:
                            f[i0 + i] = 1
            i0 += m
    return flags.view(bool)
