"""Pure-numpy kernels for exact empirical 0-1-loss linear classification.

These are the fallback implementations of the hot search loops; a compiled
twin lives in _erm01fast.pyx with identical candidate enumeration and
tie-breaking. See fiprobe.kernels for backend selection.

Conventions shared by both backends:
  * binary labels y in {0, 1}; prediction is 1 iff w.z + b > 0 (2-d) or via
    orient*(z - threshold) > 0 (1-d); exact ties predict class 0.
  * candidate order (first strict improvement wins): the two constant
    classifiers, then anchors by index, then sweep intervals by angle, then
    the on-anchor side variant (anchor stack to class 0 before class 1).
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def erm01_1d_search(x: np.ndarray, y: np.ndarray):
    """Exact minimizer of empirical 0-1 loss over 1-d threshold classifiers.

    Returns (orient, threshold, loss) with orient in {+1, -1}; predict class 1
    iff orient * (z - threshold) > 0. Thresholds are searched at midpoints of
    the <= n+1 gaps between distinct sorted values (outer gaps use the extreme
    value -/+ 1). Ties broken toward the smallest threshold, then orient +1.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    order = np.argsort(x, kind="stable")
    xs, ys = x[order], y[order]
    distinct = np.ones(xs.size, dtype=bool)
    distinct[1:] = xs[1:] > xs[:-1]
    vals = xs[distinct]
    thresholds = np.concatenate(
        [[vals[0] - 1.0], 0.5 * (vals[:-1] + vals[1:]), [vals[-1] + 1.0]])
    # class counts at or below each threshold; searchsorted side='right'
    # matches the strict z > t prediction rule even if a midpoint rounds
    # onto a data value
    cum1 = np.concatenate([[0], np.cumsum(ys == 1)])
    cum0 = np.concatenate([[0], np.cumsum(ys == 0)])
    pos = np.searchsorted(xs, thresholds, side="right")
    n1, n0 = cum1[-1], cum0[-1]
    below1, below0 = cum1[pos], cum0[pos]
    # orient +1: predict 1 above t -> errors = 1s below + 0s above
    loss_pos = below1 + (n0 - below0)
    loss_neg = below0 + (n1 - below1)
    best = None
    for t_idx in range(thresholds.size):
        for orient, loss in ((1, loss_pos[t_idx]), (-1, loss_neg[t_idx])):
            if best is None or loss < best[2]:
                best = (orient, float(thresholds[t_idx]), int(loss))
    return best


def erm01_2d_search(X: np.ndarray, y: np.ndarray):
    """Exact minimizer of empirical 0-1 loss over linear classifiers in R^2.

    Rotating-line sweep anchored at every point: a line through the anchor
    sweeps 2pi; each non-anchor point flips sides exactly at its two event
    angles. Points coincident with the anchor are pushed strictly to one side
    by a +-delta offset on b (the two side variants). Events whose directions
    are exactly collinear flip together, so lattice-style degenerate inputs
    are handled exactly. Returns (w, b, loss).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    n = y.size
    n1 = int((y == 1).sum())
    n0 = n - n1
    if n1 <= n0:
        best = (np.zeros(2), -1.0, n1)   # constant: predict all 0
        if n0 < n1:
            best = (np.zeros(2), 1.0, n0)
    else:
        best = (np.zeros(2), 1.0, n0)    # constant: predict all 1
    for i in range(n):
        rel = X - X[i]
        d0 = (rel[:, 0] == 0.0) & (rel[:, 1] == 0.0)
        oth = ~d0
        if not oth.any():
            continue
        rx, ry, lab = rel[oth, 0], rel[oth, 1], y[oth]
        ph = np.arctan2(ry, rx)
        ang = np.concatenate([np.mod(ph, TWO_PI), np.mod(ph + np.pi, TWO_PI)])
        # crossing phi: point leaves the + side (pred 1 -> 0); crossing
        # phi+pi it re-enters (0 -> 1)
        dl = np.concatenate([np.where(lab == 1, 1, -1),
                             np.where(lab == 0, 1, -1)])
        evx = np.concatenate([rx, -rx])
        evy = np.concatenate([ry, -ry])
        order = np.argsort(ang, kind="stable")
        ang, dl, evx, evy = ang[order], dl[order], evx[order], evy[order]
        m = ang.size
        # group consecutive events with exactly equal ray direction: they
        # correspond to one geometric line position and must flip together
        same = (evx[1:] * evy[:-1] == evy[1:] * evx[:-1]) & \
               (evx[1:] * evx[:-1] + evy[1:] * evy[:-1] > 0)
        gfirst = np.concatenate([[0], np.nonzero(~same)[0] + 1])
        gang = ang[gfirst]
        gsum = np.add.reduceat(dl, gfirst)
        G = gang.size
        hi = np.concatenate([gang[1:], [gang[0] + TWO_PI]])
        mid = 0.5 * (gang + hi)
        valid = (mid > gang) & (mid < hi)
        if not valid.any():
            continue
        widths = np.where(valid, hi - gang, -1.0)
        jw = int(np.argmax(widths))
        base = int((np.sin(ph - mid[jw]) > 0.0).astype(np.int64)
                   .__ne__(lab == 1).sum())
        # cyclic accumulation: entering interval j+1 applies gsum[j+1]
        roll = np.roll(gsum, -(jw + 1))
        walk = base + np.concatenate([[0], np.cumsum(roll[:-1])])
        loss = np.empty(G, dtype=np.int64)
        loss[(jw + np.arange(G)) % G] = walk
        c_to0 = int((y[d0] == 1).sum())
        c_to1 = int((y[d0] == 0).sum())
        tot0 = loss + c_to0
        tot1 = loss + c_to1
        tot = np.where(valid, np.minimum(tot0, tot1), np.iinfo(np.int64).max)
        j = int(np.argmin(tot))
        if tot[j] < best[2]:
            th = mid[j]
            w = np.array([-np.sin(th), np.cos(th)])
            b = -(w[0] * X[i, 0] + w[1] * X[i, 1])
            s = X @ w + b
            nz = np.abs(s[oth])
            nz = nz[nz > 0]
            delta = 0.5 * float(nz.min()) if nz.size else 1.0
            b = b + delta if tot1[j] < tot0[j] else b - delta
            best = (w, float(b), int(tot[j]))
    return best
