"""Compiled planar contact kernels.

All kernels work on flat float64 arrays.  Grains are stored in a uniform
cell grid (CSR layout: ``cell_start`` has ``nx * ny + 1`` entries, cell
``(i, j)`` owns ``cell_items[cell_start[i * ny + j]:cell_start[i * ny + j + 1]]``).
"""

import math

import numpy as np
from numba import njit

STATUS_OK = 0
STATUS_MARGIN = 1
STATUS_OUTSIDE_INDEX = 2


@njit(cache=True)
def build_cell_lists(cx, cy, rad, ox, oy, s, nx, ny):
    pad = 1e-9 * s
    m = cx.shape[0]
    counts = np.zeros(nx * ny + 1, dtype=np.int64)
    lo_i = np.empty(m, dtype=np.int64)
    hi_i = np.empty(m, dtype=np.int64)
    lo_j = np.empty(m, dtype=np.int64)
    hi_j = np.empty(m, dtype=np.int64)
    for g in range(m):
        i0 = int(math.floor((cx[g] - rad[g] - pad - ox) / s))
        i1 = int(math.floor((cx[g] + rad[g] + pad - ox) / s))
        j0 = int(math.floor((cy[g] - rad[g] - pad - oy) / s))
        j1 = int(math.floor((cy[g] + rad[g] + pad - oy) / s))
        lo_i[g] = max(i0, 0)
        hi_i[g] = min(i1, nx - 1)
        lo_j[g] = max(j0, 0)
        hi_j[g] = min(j1, ny - 1)
        for i in range(lo_i[g], hi_i[g] + 1):
            for j in range(lo_j[g], hi_j[g] + 1):
                counts[i * ny + j + 1] += 1
    start = np.cumsum(counts)
    fill = start[:-1].copy()
    items = np.empty(start[-1], dtype=np.int64)
    for g in range(m):
        for i in range(lo_i[g], hi_i[g] + 1):
            for j in range(lo_j[g], hi_j[g] + 1):
                c = i * ny + j
                items[fill[c]] = g
                fill[c] += 1
    return start, items


@njit(cache=True)
def ball_distance(x, y, cx, cy, r):
    dx = x - cx
    dy = y - cy
    d = math.sqrt(dx * dx + dy * dy) - r
    return d if d > 0.0 else 0.0


@njit(cache=True)
def ray_entry(x, y, ux, uy, cx, cy, r):
    wx = x - cx
    wy = y - cy
    b = wx * ux + wy * uy
    c = wx * wx + wy * wy - r * r
    if c <= 0.0:
        return 0.0
    disc = b * b - c
    if disc < 0.0 or b >= 0.0:
        return math.inf
    return c / (-b + math.sqrt(disc))


@njit(cache=True)
def _segment_interval_point(x, y, ax, ay, bx, by, cx, cy, r):
    # nearest point to (x, y) on segment [a, b] intersected with the disk;
    # returns squared distance or inf when the intersection is empty
    dx = bx - ax
    dy = by - ay
    L2 = dx * dx + dy * dy
    fx = ax - cx
    fy = ay - cy
    # |a + s d - c|^2 <= r^2 for s in [0, 1]
    qa = L2
    qb = 2.0 * (fx * dx + fy * dy)
    qc = fx * fx + fy * fy - r * r
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        return math.inf
    sq = math.sqrt(disc)
    s0 = (-qb - sq) / (2.0 * qa)
    s1 = (-qb + sq) / (2.0 * qa)
    if s0 < 0.0:
        s0 = 0.0
    if s1 > 1.0:
        s1 = 1.0
    if s0 > s1:
        return math.inf
    sp = ((x - ax) * dx + (y - ay) * dy) / L2
    if sp < s0:
        sp = s0
    elif sp > s1:
        sp = s1
    px = ax + sp * dx - x
    py = ay + sp * dy - y
    return px * px + py * py


@njit(cache=True)
def clipped_ball_distance(x, y, cx, cy, r, wx0, wy0, wx1, wy1):
    """Euclidean distance from (x, y) in the box to (disk ∩ box)."""
    dx = x - cx
    dy = y - cy
    n = math.sqrt(dx * dx + dy * dy)
    if n <= r:
        return 0.0
    px = cx + r * dx / n
    py = cy + r * dy / n
    if px >= wx0 and px <= wx1 and py >= wy0 and py <= wy1:
        return n - r
    best = math.inf
    best = min(best, _segment_interval_point(x, y, wx0, wy0, wx1, wy0, cx, cy, r))
    best = min(best, _segment_interval_point(x, y, wx1, wy0, wx1, wy1, cx, cy, r))
    best = min(best, _segment_interval_point(x, y, wx1, wy1, wx0, wy1, cx, cy, r))
    best = min(best, _segment_interval_point(x, y, wx0, wy1, wx0, wy0, cx, cy, r))
    return math.sqrt(best)


@njit(cache=True)
def box_exit(x, y, ux, uy, wx0, wy0, wx1, wy1):
    t = math.inf
    if ux > 0.0:
        t = min(t, (wx1 - x) / ux)
    elif ux < 0.0:
        t = min(t, (wx0 - x) / ux)
    if uy > 0.0:
        t = min(t, (wy1 - y) / uy)
    elif uy < 0.0:
        t = min(t, (wy0 - y) / uy)
    return t


@njit(cache=True)
def _grain_distance(x, y, g, cx, cy, rad, mode, ux, uy, clip, wx0, wy0, wx1, wy1, texit):
    if mode == 0:
        if clip:
            return clipped_ball_distance(x, y, cx[g], cy[g], rad[g], wx0, wy0, wx1, wy1)
        return ball_distance(x, y, cx[g], cy[g], rad[g])
    t = ray_entry(x, y, ux, uy, cx[g], cy[g], rad[g])
    if clip and t > texit:
        return math.inf
    return t


@njit(cache=True)
def contact_grid(px, py, cx, cy, rad, start, items, ox, oy, s, nx, ny,
                 mode, ux, uy, cap, reach, win, clip):
    """Index-pruned contact distances.

    ``mode`` 0 is the unit ball, 1 the segment with direction (ux, uy).
    ``win`` holds the observation window (x0, y0, x1, y1); with ``clip`` the
    grains are replaced by their intersections with it.
    """
    n = px.shape[0]
    dist = np.empty(n)
    gid = np.empty(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)
    wx0, wy0, wx1, wy1 = win[0], win[1], win[2], win[3]
    for p in range(n):
        x = px[p]
        y = py[p]
        if clip:
            reach_p = math.inf
            texit = box_exit(x, y, ux, uy, wx0, wy0, wx1, wy1)
        else:
            ex = max(wx0 - x, 0.0, x - wx1)
            ey = max(wy0 - y, 0.0, y - wy1)
            reach_p = reach - math.sqrt(ex * ex + ey * ey)
            texit = math.inf
        limit = min(cap, reach_p)
        best = math.inf
        bid = -1
        ix = int(math.floor((x - ox) / s))
        iy = int(math.floor((y - oy) / s))
        if mode == 0:
            k = 0
            while True:
                for i in range(ix - k, ix + k + 1):
                    if i < 0 or i >= nx:
                        continue
                    step = 2 * k if (i != ix - k and i != ix + k and k > 0) else 1
                    if k == 0:
                        step = 1
                    j = iy - k
                    while j <= iy + k:
                        if j >= 0 and j < ny:
                            c = i * ny + j
                            for q in range(start[c], start[c + 1]):
                                g = items[q]
                                d = _grain_distance(x, y, g, cx, cy, rad, 0, ux, uy, clip,
                                                    wx0, wy0, wx1, wy1, texit)
                                if d < best or (d == best and g < bid):
                                    best = d
                                    bid = g
                        j += step
                lb = min(x - (ox + (ix - k) * s), ox + (ix + k + 1) * s - x,
                         y - (oy + (iy - k) * s), oy + (iy + k + 1) * s - y)
                if ix - k <= 0 and iy - k <= 0 and ix + k >= nx - 1 and iy + k >= ny - 1:
                    break
                if best <= lb or lb > limit:
                    break
                k += 1
        else:
            if ix < 0 or ix >= nx or iy < 0 or iy >= ny:
                status[p] = STATUS_OUTSIDE_INDEX
                dist[p] = math.nan
                gid[p] = -1
                continue
            stepx = 1 if ux > 0.0 else -1
            stepy = 1 if uy > 0.0 else -1
            if ux != 0.0:
                nxb = ox + (ix + (1 if ux > 0.0 else 0)) * s
                tmx = (nxb - x) / ux
                tdx = s / abs(ux)
            else:
                tmx = math.inf
                tdx = math.inf
            if uy != 0.0:
                nyb = oy + (iy + (1 if uy > 0.0 else 0)) * s
                tmy = (nyb - y) / uy
                tdy = s / abs(uy)
            else:
                tmy = math.inf
                tdy = math.inf
            while True:
                c = ix * ny + iy
                for q in range(start[c], start[c + 1]):
                    g = items[q]
                    d = _grain_distance(x, y, g, cx, cy, rad, 1, ux, uy, clip,
                                        wx0, wy0, wx1, wy1, texit)
                    if d < best or (d == best and g < bid):
                        best = d
                        bid = g
                tcell = min(tmx, tmy)
                if best <= tcell or tcell > limit or tcell > texit:
                    break
                if tmx < tmy:
                    ix += stepx
                    tmx += tdx
                else:
                    iy += stepy
                    tmy += tdy
                if ix < 0 or ix >= nx or iy < 0 or iy >= ny:
                    break
        if best <= limit:
            dist[p] = best
            gid[p] = bid
        elif cap <= reach_p:
            dist[p] = math.inf
            gid[p] = -1
        else:
            dist[p] = math.nan
            gid[p] = -1
            status[p] = STATUS_MARGIN
    return dist, gid, status


@njit(cache=True)
def contact_all(px, py, cx, cy, rad, mode, ux, uy, win, clip):
    """Minimum over every grain, no pruning and no reach bookkeeping."""
    n = px.shape[0]
    m = cx.shape[0]
    dist = np.empty(n)
    gid = np.empty(n, dtype=np.int64)
    wx0, wy0, wx1, wy1 = win[0], win[1], win[2], win[3]
    for p in range(n):
        x = px[p]
        y = py[p]
        texit = box_exit(x, y, ux, uy, wx0, wy0, wx1, wy1) if clip else math.inf
        best = math.inf
        bid = -1
        for g in range(m):
            d = _grain_distance(x, y, g, cx, cy, rad, mode, ux, uy, clip,
                                wx0, wy0, wx1, wy1, texit)
            if d < best:
                best = d
                bid = g
        dist[p] = best
        gid[p] = bid
    return dist, gid
