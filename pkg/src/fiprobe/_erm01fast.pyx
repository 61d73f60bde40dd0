# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of the exact 0-1 ERM sweep in _erm01.py.

Candidate enumeration and tie-breaking mirror the numpy fallback; both
backends always return the same minimum loss (the returned classifier may
differ at exact ties). Event sorting delegates to numpy's stable argsort --
the same primitive the fallback uses -- while the per-anchor bookkeeping
runs as C loops. Compiled with -ffp-contract=off so dot products are not
fused into FMAs.
"""

from libc.math cimport atan2, sin, cos, fmod, fabs, M_PI

import numpy as np


def erm01_2d_search(X, y):
    """Exact min empirical 0-1 loss linear classifier in R^2; see _erm01."""
    X_arr = np.ascontiguousarray(X, dtype=np.float64)
    y_arr = np.ascontiguousarray(y, dtype=np.int64)
    cdef const double[:, ::1] Xv = X_arr
    cdef const long[::1] yv = y_arr
    cdef Py_ssize_t n = yv.shape[0]
    cdef double TWO_PI = 2.0 * M_PI

    cdef Py_ssize_t i, k, m, e, g, G, t, jw, bj, n_oth
    cdef long n1 = 0, n0
    for k in range(n):
        if yv[k] == 1:
            n1 += 1
    n0 = <long> n - n1

    cdef long best_loss
    cdef double best_w0 = 0.0, best_w1 = 0.0, best_b
    if n0 < n1:
        best_loss = n0
        best_b = 1.0
    else:
        best_loss = n1
        best_b = -1.0

    # per-anchor event buffers; the angle buffer is sorted via numpy argsort
    ang_np = np.empty(2 * n, dtype=np.float64)
    dl_np = np.empty(2 * n, dtype=np.int64)
    evx_np = np.empty(2 * n, dtype=np.float64)
    evy_np = np.empty(2 * n, dtype=np.float64)
    cdef double[::1] ang = ang_np
    cdef long[::1] dl = dl_np
    cdef double[::1] evx = evx_np
    cdef double[::1] evy = evy_np
    s_ang_np = np.empty(2 * n, dtype=np.float64)
    cdef double[::1] s_ang = s_ang_np
    cdef long[::1] s_dl = np.empty(2 * n, dtype=np.int64)
    cdef double[::1] s_evx = np.empty(2 * n, dtype=np.float64)
    cdef double[::1] s_evy = np.empty(2 * n, dtype=np.float64)
    cdef long[::1] gsum = np.empty(2 * n, dtype=np.int64)
    cdef double[::1] gang = np.empty(2 * n, dtype=np.float64)
    cdef long[::1] gloss = np.empty(2 * n, dtype=np.int64)
    cdef double[::1] ph = np.empty(n, dtype=np.float64)
    cdef long[::1] labs = np.empty(n, dtype=np.int64)
    cdef const long[::1] order

    cdef double px, py, a, rx, ry, widest, width, hi, mid, th, w0, w1, b, s, dmin
    cdef long c_to0, c_to1, base, cur, tot0, tot1, bloss
    cdef int bvar
    cdef bint have_nz

    for i in range(n):
        px = Xv[i, 0]
        py = Xv[i, 1]
        m = 0
        n_oth = 0
        c_to0 = 0
        c_to1 = 0
        for k in range(n):
            rx = Xv[k, 0] - px
            ry = Xv[k, 1] - py
            if rx == 0.0 and ry == 0.0:
                if yv[k] == 1:
                    c_to0 += 1
                else:
                    c_to1 += 1
                continue
            ph[n_oth] = atan2(ry, rx)
            labs[n_oth] = yv[k]
            # leaving the + side at phi: pred 1 -> 0
            a = fmod(ph[n_oth], TWO_PI)
            if a < 0.0:
                a += TWO_PI
            ang[m] = a
            dl[m] = 1 if yv[k] == 1 else -1
            evx[m] = rx
            evy[m] = ry
            m += 1
            # re-entering the + side at phi + pi: pred 0 -> 1
            a = fmod(ph[n_oth] + M_PI, TWO_PI)
            if a < 0.0:
                a += TWO_PI
            ang[m] = a
            dl[m] = 1 if yv[k] == 0 else -1
            evx[m] = -rx
            evy[m] = -ry
            m += 1
            n_oth += 1
        if n_oth == 0:
            continue
        order = np.argsort(ang_np[:m], kind="stable")
        for e in range(m):
            k = order[e]
            s_ang[e] = ang[k]
            s_dl[e] = dl[k]
            s_evx[e] = evx[k]
            s_evy[e] = evy[k]
        # merge consecutive events with exactly equal ray direction; they
        # are one geometric line position and must flip together
        G = 0
        for e in range(m):
            if G > 0 \
                    and (s_evx[e] * s_evy[e - 1] == s_evy[e] * s_evx[e - 1]) \
                    and (s_evx[e] * s_evx[e - 1] + s_evy[e] * s_evy[e - 1] > 0.0):
                gsum[G - 1] += s_dl[e]
            else:
                gang[G] = s_ang[e]
                gsum[G] = s_dl[e]
                G += 1
        # widest valid interval gives a numerically safe starting angle
        jw = -1
        widest = -1.0
        for g in range(G):
            hi = gang[g + 1] if g + 1 < G else gang[0] + TWO_PI
            mid = 0.5 * (gang[g] + hi)
            if mid > gang[g] and mid < hi:
                width = hi - gang[g]
                if width > widest:
                    widest = width
                    jw = g
        if jw < 0:
            continue
        hi = gang[jw + 1] if jw + 1 < G else gang[0] + TWO_PI
        mid = 0.5 * (gang[jw] + hi)
        base = 0
        for k in range(n_oth):
            # + side <=> sin(phi - theta) > 0; + side predicts class 1
            if (sin(ph[k] - mid) > 0.0) != (labs[k] == 1):
                base += 1
        cur = base
        gloss[jw] = cur
        g = jw
        for t in range(1, G):
            g += 1
            if g == G:
                g = 0
            cur += gsum[g]
            gloss[g] = cur
        # candidates in interval order; anchor stack to class 0 then 1
        bj = -1
        bloss = best_loss
        bvar = 0
        for g in range(G):
            hi = gang[g + 1] if g + 1 < G else gang[0] + TWO_PI
            mid = 0.5 * (gang[g] + hi)
            if not (mid > gang[g] and mid < hi):
                continue
            tot0 = gloss[g] + c_to0
            tot1 = gloss[g] + c_to1
            if tot0 < bloss:
                bloss = tot0
                bj = g
                bvar = 0
            if tot1 < bloss:
                bloss = tot1
                bj = g
                bvar = 1
        if bj >= 0:
            hi = gang[bj + 1] if bj + 1 < G else gang[0] + TWO_PI
            th = 0.5 * (gang[bj] + hi)
            w0 = -sin(th)
            w1 = cos(th)
            b = -(w0 * px + w1 * py)
            # offset pushes the anchor stack strictly to its side without
            # flipping any other point
            dmin = 0.0
            have_nz = False
            for k in range(n):
                if Xv[k, 0] == px and Xv[k, 1] == py:
                    continue
                s = fabs(Xv[k, 0] * w0 + Xv[k, 1] * w1 + b)
                if s > 0.0 and (not have_nz or s < dmin):
                    dmin = s
                    have_nz = True
            dmin = 0.5 * dmin if have_nz else 1.0
            b = b + dmin if bvar == 1 else b - dmin
            best_loss = bloss
            best_w0 = w0
            best_w1 = w1
            best_b = b

    return np.array([best_w0, best_w1]), float(best_b), int(best_loss)
