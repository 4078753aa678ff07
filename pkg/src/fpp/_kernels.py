"""Compiled inner loops: per-edge hashing, label-setting shortest paths, batch drivers.

Field parameter layout shared by every kernel::

    FI (int64[9]):  kind, seed bits, replicate, variant, column,
                    resample seed bits, resample replicate, contract flag, contract column
    FF (float64[3]): law parameters (see weights.WeightSpec.kernel_params)

``kind == EXPLICIT`` marks a field whose weight table is filled by the caller;
the kernels then never hash. All axes are 0-based in this module.
"""

import math

import numpy as np
from numba import njit

DIRAC, TWO_POINT, UNIFORM, SHIFTED_EXP, EXPLICIT = 0, 1, 2, 3, -1
PLAIN, THEOREM1, CS2 = 0, 1, 2

NO_COLUMN = -(2**62)
UNBOUNDED = 2**40

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
KEY_SALT = np.uint64(0x6A09E667F3BCC909)
RESAMPLE_SALT = np.uint64(0xBB67AE8584CAA73B)
TWO_M53 = 2.0**-53

# Relative cushion on the edge budget U / S_-; covers rounding in path sums.
BUDGET_CUSHION = 1e-12


@njit(cache=True)
def mix64(z):
    z = z + GOLDEN
    z = (z ^ (z >> np.uint64(30))) * MIX1
    z = (z ^ (z >> np.uint64(27))) * MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def key_uniform(seed, rep, axis1, coords):
    """Uniform in (0, 1) from the key (seed, replicate, 1-based axis, coords)."""
    h = mix64(seed ^ KEY_SALT)
    h = mix64(h ^ np.uint64(rep))
    h = mix64(h ^ np.uint64(axis1))
    for j in range(coords.shape[0]):
        h = mix64(h ^ np.uint64(coords[j]))
    return (np.float64(h >> np.uint64(11)) + 0.5) * TWO_M53


@njit(cache=True)
def resample_seed(seed, rep, column):
    h = mix64(seed ^ RESAMPLE_SALT)
    h = mix64(h ^ np.uint64(rep))
    return mix64(h ^ np.uint64(column))


@njit(cache=True)
def ppf(kind, params, u):
    if kind == DIRAC:
        return params[0]
    if kind == TWO_POINT:
        return params[1] if u < params[2] else params[0]
    if kind == UNIFORM:
        return params[0] + (params[1] - params[0]) * u
    return params[0] - math.log1p(-u) / params[1]


@njit(cache=True)
def field_weight(FI, FF, c, axis, tmp):
    """Weight of the edge with canonical base ``c`` along 0-based ``axis``."""
    if FI[7] != 0 and c[0] >= FI[8]:
        for j in range(c.shape[0]):
            tmp[j] = c[j]
        tmp[0] += 1
        return ppf(FI[0], FF, key_uniform(np.uint64(FI[1]), FI[2], axis + 1, tmp))
    if FI[3] != PLAIN:
        x1 = c[0]
        if x1 == FI[4]:
            return 0.0 if axis == 0 else np.inf
        if FI[3] == CS2 and axis > 0 and x1 == FI[4] + 1:
            return ppf(FI[0], FF, key_uniform(np.uint64(FI[5]), FI[6], axis + 1, c))
    return ppf(FI[0], FF, key_uniform(np.uint64(FI[1]), FI[2], axis + 1, c))


@njit(cache=True)
def bulk_weights(FI, FF, coords, axes):
    """Weights for many edges at once: coords (M, d) canonical bases, axes (M,) 0-based."""
    m, d = coords.shape
    out = np.empty(m)
    tmp = np.empty(d, np.int64)
    c = np.empty(d, np.int64)
    for k in range(m):
        for j in range(d):
            c[j] = coords[k, j]
        out[k] = field_weight(FI, FF, c, axes[k], tmp)
    return out


@njit(cache=True)
def straight_cost(FI, FF, a, b):
    """Cost of the monotone path a -> b moving along axis 0 first, then 1, ..."""
    d = a.shape[0]
    c = a.copy()
    bc = np.empty(d, np.int64)
    tmp = np.empty(d, np.int64)
    total = 0.0
    for axis in range(d):
        while c[axis] != b[axis]:
            step = 1 if b[axis] > c[axis] else -1
            for j in range(d):
                bc[j] = c[j]
            if step < 0:
                bc[axis] -= 1
            total += field_weight(FI, FF, bc, axis, tmp)
            c[axis] += step
    return total


@njit(cache=True)
def edge_budget(upper, min_w):
    return np.int64(math.floor(upper / min_w * (1.0 + BUDGET_CUSHION)))


@njit(cache=True)
def contract_coord(x1, free_col):
    if free_col != NO_COLUMN and x1 > free_col:
        return x1 - 1
    return x1


@njit(cache=True)
def plan_region(a, b, rlo, rhi, budget, free_col, use_ell):
    """Search box for a -> b: the given bounds, intersected with the budget ellipse if use_ell.

    The ellipse is {v : |phi(v)-phi(a)|_1 + |phi(v)-phi(b)|_1 <= budget} where phi
    collapses a free column onto its left neighbour (identity if free_col is NO_COLUMN).
    Returns lo, shape, ea, eb (ellipse foci in contracted coordinates); shape
    has a zero entry when the box is empty.
    """
    d = a.shape[0]
    lo = np.empty(d, np.int64)
    shape = np.empty(d, np.int64)
    ea = a.copy()
    eb = b.copy()
    ea[0] = contract_coord(a[0], free_col)
    eb[0] = contract_coord(b[0], free_col)
    slack = 0
    if use_ell:
        dist = 0
        for j in range(d):
            dist += abs(ea[j] - eb[j])
        slack = (budget - dist) // 2
    for j in range(d):
        lo_j = rlo[j]
        hi_j = rhi[j]
        if use_ell:
            elo = min(ea[j], eb[j]) - slack
            ehi = max(ea[j], eb[j]) + slack
            if j == 0 and free_col != NO_COLUMN:
                if elo > free_col:
                    elo += 1
                if ehi >= free_col:
                    ehi += 1
            lo_j = max(lo_j, elo)
            hi_j = min(hi_j, ehi)
        lo[j] = lo_j
        shape[j] = max(hi_j - lo_j + 1, 0)
    return lo, shape, ea, eb


@njit(cache=True)
def _heap_less(hk, hv, i, j):
    return hk[i] < hk[j] or (hk[i] == hk[j] and hv[i] < hv[j])


@njit(cache=True)
def dijkstra(FI, FF, W, lo, shape, src, dst, use_ell, ea, eb, budget, free_col):
    """Label-setting shortest path on the box (lo, shape) from index src to dst.

    W is the (d, N) weight table indexed by canonical base vertex; NaN entries
    are computed on demand from (FI, FF) and cached. +inf weights are blocked
    edges. Equal-cost ties keep the predecessor with the smaller vertex index.
    Returns (distance to dst, predecessor array, settled count).
    """
    d = shape.shape[0]
    n = 1
    for j in range(d):
        n *= shape[j]
    strides = np.empty(d, np.int64)
    acc = 1
    for j in range(d - 1, -1, -1):
        strides[j] = acc
        acc *= shape[j]
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, np.int64)
    done = np.zeros(n, np.bool_)
    cap = 64
    hk = np.empty(cap)
    hv = np.empty(cap, np.int64)
    size = 0
    c = np.empty(d, np.int64)
    bc = np.empty(d, np.int64)
    tmp = np.empty(d, np.int64)

    dist[src] = 0.0
    hk[0] = 0.0
    hv[0] = src
    size = 1
    settled = 0
    while size > 0:
        du = hk[0]
        u = hv[0]
        size -= 1
        if size > 0:
            hk[0] = hk[size]
            hv[0] = hv[size]
            i = 0
            while True:
                left = 2 * i + 1
                if left >= size:
                    break
                m = left
                if left + 1 < size and _heap_less(hk, hv, left + 1, left):
                    m = left + 1
                if _heap_less(hk, hv, m, i):
                    hk[i], hk[m] = hk[m], hk[i]
                    hv[i], hv[m] = hv[m], hv[i]
                    i = m
                else:
                    break
        if done[u]:
            continue
        done[u] = True
        settled += 1
        if u == dst:
            break
        r = u
        for j in range(d):
            c[j] = lo[j] + r // strides[j]
            r = r % strides[j]
        for axis in range(d):
            for s in range(2):
                step = 2 * s - 1
                x = c[axis] + step
                if x < lo[axis] or x >= lo[axis] + shape[axis]:
                    continue
                v = u + step * strides[axis]
                if done[v]:
                    continue
                if use_ell:
                    c[axis] = x
                    tot = 0
                    for j in range(d):
                        xj = c[j]
                        if j == 0:
                            xj = contract_coord(xj, free_col)
                        tot += abs(xj - ea[j]) + abs(xj - eb[j])
                    c[axis] -= step
                    if tot > budget:
                        continue
                base = u if step > 0 else v
                w = W[axis, base]
                if np.isnan(w):
                    for j in range(d):
                        bc[j] = c[j]
                    if step < 0:
                        bc[axis] -= 1
                    w = field_weight(FI, FF, bc, axis, tmp)
                    W[axis, base] = w
                if w == np.inf:
                    continue
                nd = du + w
                if nd < dist[v]:
                    dist[v] = nd
                    pred[v] = u
                    if size == cap:
                        cap *= 2
                        nk = np.empty(cap)
                        nv = np.empty(cap, np.int64)
                        nk[:size] = hk[:size]
                        nv[:size] = hv[:size]
                        hk = nk
                        hv = nv
                    hk[size] = nd
                    hv[size] = v
                    i = size
                    size += 1
                    while i > 0:
                        parent = (i - 1) // 2
                        if _heap_less(hk, hv, i, parent):
                            hk[i], hk[parent] = hk[parent], hk[i]
                            hv[i], hv[parent] = hv[parent], hv[i]
                            i = parent
                        else:
                            break
                elif nd == dist[v] and u < pred[v]:
                    pred[v] = u
    return dist[dst], pred, settled


@njit(cache=True)
def flat_index(v, lo, shape):
    idx = 0
    for j in range(shape.shape[0]):
        idx = idx * shape[j] + (v[j] - lo[j])
    return idx


@njit(cache=True)
def inside(v, lo, shape):
    for j in range(shape.shape[0]):
        if v[j] < lo[j] or v[j] >= lo[j] + shape[j]:
            return False
    return True


@njit(cache=True)
def walk(pred, src, dst):
    """Vertex indices of the predecessor chain, from src to dst."""
    count = 1
    v = dst
    while v != src:
        v = pred[v]
        count += 1
    out = np.empty(count, np.int64)
    v = dst
    for k in range(count - 1, -1, -1):
        out[k] = v
        if k > 0:
            v = pred[v]
    return out


@njit(cache=True)
def solve(FI, FF, a, b, rlo, rhi, min_w, pad, free_col):
    """Exact passage time a -> b for a hashed field within bounds [rlo, rhi].

    When any axis is unbounded the bounds are intersected with the certified
    ellipse built from the straight-path cost. Returns
    (value, pred, lo, shape, settled, budget, src, dst); src/dst are -1 when the
    endpoints fall outside the box.
    """
    d = a.shape[0]
    unbounded = False
    for j in range(d):
        if rlo[j] <= -UNBOUNDED or rhi[j] >= UNBOUNDED:
            unbounded = True
    budget = np.int64(-1)
    if unbounded:
        upper = straight_cost(FI, FF, a, b)
        budget = edge_budget(upper, min_w) + pad
    lo, shape, ea, eb = plan_region(a, b, rlo, rhi, budget, free_col, unbounded)
    if not (inside(a, lo, shape) and inside(b, lo, shape)):
        return np.inf, np.empty(0, np.int64), lo, shape, 0, budget, -1, -1
    n = 1
    for j in range(d):
        n *= shape[j]
    W = np.full((d, n), np.nan)
    src = flat_index(a, lo, shape)
    dst = flat_index(b, lo, shape)
    value, pred, settled = dijkstra(FI, FF, W, lo, shape, src, dst, unbounded, ea, eb, budget, free_col)
    return value, pred, lo, shape, settled, budget, src, dst


@njit(cache=True)
def decode(idx, lo, shape, out):
    for j in range(shape.shape[0] - 1, -1, -1):
        out[j] = lo[j] + idx % shape[j]
        idx //= shape[j]


@njit(cache=True)
def count_columns(path, lo, shape, c0, ncols, hc, vc):
    """Add H/V edge counts of a path (vertex indices) for columns c0..c0+ncols-1 into hc, vc."""
    d = shape.shape[0]
    u = np.empty(d, np.int64)
    v = np.empty(d, np.int64)
    decode(path[0], lo, shape, u)
    for k in range(1, path.shape[0]):
        decode(path[k], lo, shape, v)
        if u[0] != v[0]:
            col = min(u[0], v[0]) - c0
            if 0 <= col < ncols:
                hc[col] += 1
        else:
            col = u[0] - c0
            if 0 <= col < ncols:
                vc[col] += 1
        for j in range(d):
            u[j] = v[j]


@njit(cache=True)
def batch_passage(FI, FF, reps, sources, targets, rlo, rhi, min_w):
    """Passage times for every replicate and every (source, target, bounds) row."""
    out = np.empty((reps.shape[0], targets.shape[0]))
    fi = FI.copy()
    for r in range(reps.shape[0]):
        fi[2] = reps[r]
        for t in range(targets.shape[0]):
            res = solve(fi, FF, sources[t], targets[t], rlo[t], rhi[t], min_w, 0, NO_COLUMN)
            out[r, t] = res[0]
    return out


@njit(cache=True)
def batch_coupling(FI, FF, reps, n, rlo, rhi, min_w):
    """Per replicate: T(0, n e1), geodesic H/V counts for columns 0..n, path length, all T^i."""
    d = rlo.shape[0]
    R = reps.shape[0]
    T = np.empty(R)
    Ti = np.empty((R, n))
    hc = np.zeros((R, n + 1), np.int64)
    vc = np.zeros((R, n + 1), np.int64)
    length = np.zeros(R, np.int64)
    a = np.zeros(d, np.int64)
    b = np.zeros(d, np.int64)
    b[0] = n
    fi = FI.copy()
    for r in range(R):
        fi[2] = reps[r]
        fi[3] = PLAIN
        value, pred, lo, shape, settled, budget, src, dst = solve(fi, FF, a, b, rlo, rhi, min_w, 0, NO_COLUMN)
        T[r] = value
        path = walk(pred, src, dst)
        length[r] = path.shape[0] - 1
        count_columns(path, lo, shape, 0, n + 1, hc[r], vc[r])
        fi[3] = THEOREM1
        for i in range(n):
            fi[4] = i
            Ti[r, i] = solve(fi, FF, a, b, rlo, rhi, min_w, 0, i)[0]
    return T, Ti, hc, vc, length


@njit(cache=True)
def batch_cs2(FI, FF, reps, n, resamples, rlo, rhi, min_w):
    """Per replicate: T, H/V counts for columns 0..n, and T^i under each CS2 resample."""
    d = rlo.shape[0]
    R = reps.shape[0]
    T = np.empty(R)
    Ti = np.empty((R, n, resamples))
    hc = np.zeros((R, n + 1), np.int64)
    vc = np.zeros((R, n + 1), np.int64)
    a = np.zeros(d, np.int64)
    b = np.zeros(d, np.int64)
    b[0] = n
    fi = FI.copy()
    seed = np.uint64(FI[1])
    for r in range(R):
        fi[2] = reps[r]
        fi[3] = PLAIN
        value, pred, lo, shape, settled, budget, src, dst = solve(fi, FF, a, b, rlo, rhi, min_w, 0, NO_COLUMN)
        T[r] = value
        path = walk(pred, src, dst)
        count_columns(path, lo, shape, 0, n + 1, hc[r], vc[r])
        fi[3] = CS2
        for i in range(n):
            fi[4] = i
            fi[5] = np.int64(resample_seed(seed, reps[r], i))
            for k in range(resamples):
                fi[6] = k
                Ti[r, i, k] = solve(fi, FF, a, b, rlo, rhi, min_w, 0, i)[0]
    return T, Ti, hc, vc
