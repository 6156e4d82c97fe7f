# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled warm-started fixed-point sweep.

Complex values are stored as interleaved (re, im) float64 pairs.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport hypot
from libc.stdlib cimport malloc, free

cnp.import_array()

BACKEND = "cython"


cdef inline double _residual(const double[:, ::1] a2, const double* w, int d,
                             double x, double eps) noexcept nogil:
    cdef int i, j
    cdef double er, ei, cr, ci, rr, ri, total = 0.0
    for i in range(d):
        er = 0.0
        ei = 0.0
        for j in range(d):
            er += a2[i, j] * w[2 * j]
            ei += a2[i, j] * w[2 * j + 1]
        cr = x - er
        ci = eps - ei
        rr = cr * w[2 * i] - ci * w[2 * i + 1] - 1.0
        ri = cr * w[2 * i + 1] + ci * w[2 * i]
        total += hypot(rr, ri)
    return total


cdef void _sweep_one(const double[:, ::1] a2, const double[::1] xs, double eps,
                     double tol, double res_tol, long max_iter, double* cur,
                     double* nxt, double[:, ::1] g_out, long[::1] it_out,
                     double[::1] res_out, unsigned char[::1] conv_out) noexcept nogil:
    cdef int d = a2.shape[0]
    cdef Py_ssize_t L = xs.shape[0]
    cdef Py_ssize_t k
    cdef long n
    cdef int i, j
    cdef double x, er, ei, cr, ci, den, diff, res
    cdef double* tmp
    cdef unsigned char ok
    for k in range(L):
        x = xs[k]
        ok = 0
        res = 0.0
        n = 0
        while n < max_iter:
            n += 1
            diff = 0.0
            for i in range(d):
                er = 0.0
                ei = 0.0
                for j in range(d):
                    er += a2[i, j] * cur[2 * j]
                    ei += a2[i, j] * cur[2 * j + 1]
                cr = x - er
                ci = eps - ei
                den = cr * cr + ci * ci
                nxt[2 * i] = cr / den
                nxt[2 * i + 1] = -ci / den
                diff += hypot(nxt[2 * i] - cur[2 * i], nxt[2 * i + 1] - cur[2 * i + 1])
            tmp = cur
            cur = nxt
            nxt = tmp
            if diff < tol:
                res = _residual(a2, cur, d, x, eps)
                if res <= res_tol:
                    ok = 1
                    break
        if not ok:
            res = _residual(a2, cur, d, x, eps)
        for i in range(2 * d):
            g_out[k, i] = cur[i]
        it_out[k] = n
        res_out[k] = res
        conv_out[k] = ok


def sweep(a2, xs, double eps, double tol, double res_tol, long max_iter, init):
    """Warm-started sweep over ``xs + i*eps`` for a batch of squared profiles.

    Parameters
    ----------
    a2 : (B, d, d) float64
        Squared profiles, one per draw.
    xs : (L,) float64
        Real parts of the evaluation points.
    init : (B, d) complex128
        Starting iterate for the first grid point of each draw.

    Returns
    -------
    g : (B, L, d) complex128
    iterations : (B, L) int64
    residual : (B, L) float64
    converged : (B, L) bool
    """
    cdef double[:, :, ::1] a2v = np.ascontiguousarray(a2, dtype=np.float64)
    cdef double[::1] xv = np.ascontiguousarray(xs, dtype=np.float64)
    init_c = np.ascontiguousarray(init, dtype=np.complex128)
    cdef Py_ssize_t B = a2v.shape[0]
    cdef int d = a2v.shape[1]
    cdef Py_ssize_t L = xv.shape[0]
    if init_c.shape != (B, d):
        raise ValueError("init must have shape (B, d)")
    cdef double[:, ::1] iv = init_c.view(np.float64).reshape(B, 2 * d)
    g = np.empty((B, L, d), dtype=np.complex128)
    cdef double[:, :, ::1] gv = g.view(np.float64).reshape(B, L, 2 * d)
    iters = np.empty((B, L), dtype=np.int_)
    cdef long[:, ::1] itv = iters
    resid = np.empty((B, L), dtype=np.float64)
    cdef double[:, ::1] rv = resid
    conv = np.empty((B, L), dtype=np.uint8)
    cdef unsigned char[:, ::1] cv = conv
    cdef double* buf = <double*> malloc(4 * d * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t b
    cdef int i
    try:
        with nogil:
            for b in range(B):
                for i in range(2 * d):
                    buf[i] = iv[b, i]
                if L > 0:
                    _sweep_one(a2v[b], xv, eps, tol, res_tol, max_iter, buf, buf + 2 * d,
                               gv[b], itv[b], rv[b], cv[b])
    finally:
        free(buf)
    return g, iters, resid, conv.astype(bool)
