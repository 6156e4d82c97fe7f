"""Numpy fallback for the warm-started fixed-point sweep.

Vectorized across draws; same stopping semantics as the compiled kernel.
"""
import numpy as np

BACKEND = "python"


def _residual(a2, w, z):
    eta = np.einsum("bij,bj->bi", a2, w)
    return np.abs((z - eta) * w - 1.0).sum(axis=1)


def sweep(a2, xs, eps, tol, res_tol, max_iter, init):
    a2 = np.ascontiguousarray(a2, dtype=np.float64)
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    cur = np.array(init, dtype=np.complex128, copy=True)
    B, d = a2.shape[0], a2.shape[1]
    if cur.shape != (B, d):
        raise ValueError("init must have shape (B, d)")
    L = xs.size
    g = np.empty((B, L, d), dtype=np.complex128)
    iters = np.zeros((B, L), dtype=np.int_)
    resid = np.zeros((B, L), dtype=np.float64)
    conv = np.zeros((B, L), dtype=bool)
    for k in range(L):
        z = complex(xs[k], eps)
        active = np.arange(B)
        n = 0
        while active.size and n < max_iter:
            n += 1
            d_act = cur[active]
            a_act = a2[active]
            new = 1.0 / (z - np.einsum("bij,bj->bi", a_act, d_act))
            diff = np.abs(new - d_act).sum(axis=1)
            cur[active] = new
            iters[active, k] = n
            small = diff < tol
            if small.any():
                cand = active[small]
                res = _residual(a2[cand], cur[cand], z)
                ok = res <= res_tol
                done = cand[ok]
                conv[done, k] = True
                resid[done, k] = res[ok]
                keep = np.ones(active.size, dtype=bool)
                keep[np.flatnonzero(small)[ok]] = False
                active = active[keep]
        if active.size:
            resid[active, k] = _residual(a2[active], cur[active], z)
        g[:, k, :] = cur
    return g, iters, resid, conv
