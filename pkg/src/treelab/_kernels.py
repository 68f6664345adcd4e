"""numba kernels for blocks of trees.

Most kernels take stage-I parent arrays: ``par[r, t]`` is the parent of
vertex t + 2 in replicate r, and every parent label is smaller than its
child.  Decreasing label order is therefore a valid bottom-up order and
increasing label order a valid top-down order, with vertex 1 as the root.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_OPTS = dict(cache=True, nogil=True)

_K1 = np.uint64(0xBF58476D1CE4E5B9)
_K2 = np.uint64(0x94D049BB133111EB)
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_SALT = np.uint64(0xD6E8FEB86659FD93)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@njit(**_OPTS)
def _mix(z):
    z = (z ^ (z >> _S30)) * _K1
    z = (z ^ (z >> _S27)) * _K2
    return z ^ (z >> _S31)


@njit(**_OPTS)
def log_factorials(n):
    out = np.zeros(n + 2)
    for k in range(2, n + 2):
        out[k] = out[k - 1] + math.log(k)
    return out


@njit(**_OPTS)
def prufer_decode_block(seqs, n):
    """Linear-time smallest-leaf decoding of each row of ``seqs``."""
    M = seqs.shape[0]
    a = np.empty((M, n - 1), np.int64)
    b = np.empty((M, n - 1), np.int64)
    degree = np.empty(n + 2, np.int64)
    for r in range(M):
        degree[:] = 1
        degree[0] = 0
        degree[n + 1] = 1
        for t in range(n - 2):
            degree[seqs[r, t]] += 1
        ptr = 1
        while degree[ptr] != 1:
            ptr += 1
        leaf = ptr
        for t in range(n - 2):
            x = seqs[r, t]
            a[r, t] = leaf
            b[r, t] = x
            degree[leaf] = 0
            degree[x] -= 1
            if degree[x] == 1 and x < ptr:
                leaf = x
            else:
                ptr += 1
                while degree[ptr] != 1:
                    ptr += 1
                leaf = ptr
        a[r, n - 2] = leaf
        b[r, n - 2] = n
    return a, b


@njit(**_OPTS)
def degree_stats_block(par, n):
    """Columns: leaf count, paths on three vertices, maximum degree."""
    M = par.shape[0]
    out = np.empty((M, 3), np.float64)
    deg = np.empty(n + 1, np.int64)
    for r in range(M):
        deg[:] = 0
        for t in range(n - 1):
            deg[t + 2] += 1
            deg[par[r, t]] += 1
        leaves = 0
        p3 = 0
        mx = 0
        for v in range(1, n + 1):
            d = deg[v]
            if d == 1:
                leaves += 1
            p3 += d * (d - 1) // 2
            if d > mx:
                mx = d
        out[r, 0] = leaves
        out[r, 1] = p3
        out[r, 2] = mx
    return out


@njit(**_OPTS)
def _csr_from_parents(prow, n, deg, off, nbr, fill):
    deg[:] = 0
    for t in range(n - 1):
        deg[t + 2] += 1
        deg[prow[t]] += 1
    off[0] = 0
    off[1] = 0
    for v in range(1, n + 1):
        off[v + 1] = off[v] + deg[v]
    for v in range(n + 2):
        fill[v] = off[v] if v <= n else 0
    for t in range(n - 1):
        v = t + 2
        p = prow[t]
        nbr[fill[v]] = p
        fill[v] += 1
        nbr[fill[p]] = v
        fill[p] += 1


@njit(**_OPTS)
def _csr_from_edges(ea, eb, n, deg, off, nbr, fill):
    deg[:] = 0
    for t in range(n - 1):
        deg[ea[t]] += 1
        deg[eb[t]] += 1
    off[0] = 0
    off[1] = 0
    for v in range(1, n + 1):
        off[v + 1] = off[v] + deg[v]
    for v in range(n + 2):
        fill[v] = off[v] if v <= n else 0
    for t in range(n - 1):
        u = ea[t]
        v = eb[t]
        nbr[fill[u]] = v
        fill[u] += 1
        nbr[fill[v]] = u
        fill[v] += 1


@njit(**_OPTS)
def _bfs(root, n, off, nbr, order, bpar):
    bpar[root] = 0
    order[0] = root
    head = 0
    tail = 1
    while head < tail:
        x = order[head]
        head += 1
        for q in range(off[x], off[x + 1]):
            y = nbr[q]
            if y != bpar[x]:
                bpar[y] = x
                order[tail] = y
                tail += 1


@njit(**_OPTS)
def _runs_logfact(buf, k, lf):
    if k < 2:
        return 0.0
    if k <= 24:
        for q in range(1, k):
            x = buf[q]
            p = q - 1
            while p >= 0 and buf[p] > x:
                buf[p + 1] = buf[p]
                p -= 1
            buf[p + 1] = x
    else:
        buf[:k].sort()
    acc = 0.0
    run = 1
    for q in range(1, k):
        if buf[q] == buf[q - 1]:
            run += 1
        else:
            if run > 1:
                acc += lf[run]
            run = 1
    if run > 1:
        acc += lf[run]
    return acc


@njit(**_OPTS)
def _rooted_pass(root, skip, n, off, nbr, order, bpar, size, h, buf, buf2, lf, thr):
    """Hash every fringe subtree of the tree hung at ``root``.

    Returns (log |Aut_root|, log |Aut_small|, hash of root's side without
    ``skip``); ``skip`` (or 0) is a child of root left out of root's groups.
    """
    _bfs(root, n, off, nbr, order, bpar)
    lrooted = 0.0
    lsmall = 0.0
    half = np.uint64(0)
    for idx in range(n - 1, -1, -1):
        v = order[idx]
        acc = np.uint64(0)
        sz = 1
        k = 0
        k2 = 0
        for q in range(off[v], off[v + 1]):
            c = nbr[q]
            if c == bpar[v]:
                continue
            g = _mix(h[c] ^ _SALT)
            acc += g
            sz += size[c]
            if v == root and c == skip:
                continue
            buf[k] = h[c]
            k += 1
            if size[c] <= thr:
                buf2[k2] = h[c]
                k2 += 1
        size[v] = sz
        h[v] = _mix(acc + _GOLD)
        lrooted += _runs_logfact(buf, k, lf)
        lsmall += _runs_logfact(buf2, k2, lf)
        if v == root and skip > 0:
            half = _mix(acc - _mix(h[skip] ^ _SALT) + _GOLD)
    return lrooted, lsmall, half


@njit(**_OPTS)
def _centres(n, off, nbr, deg, work, layer, nxt):
    """Leaf stripping; returns (c1, c2) with c2 = 0 for a single centre."""
    if n <= 2:
        return 1, (2 if n == 2 else 0)
    nl = 0
    for v in range(1, n + 1):
        work[v] = deg[v]
        if deg[v] <= 1:
            layer[nl] = v
            nl += 1
    remaining = n
    while remaining > 2:
        remaining -= nl
        nn = 0
        for t in range(nl):
            v = layer[t]
            work[v] = 0
            for q in range(off[v], off[v + 1]):
                y = nbr[q]
                if work[y] > 0:
                    work[y] -= 1
                    if work[y] == 1:
                        nxt[nn] = y
                        nn += 1
        for t in range(nn):
            layer[t] = nxt[t]
        nl = nn
    if nl == 1:
        return layer[0], 0
    return layer[0], layer[1]


@njit(**_OPTS)
def aut_stage1_block(par, n, thr):
    """Columns: log |Aut_1|, log |Aut_small| at root 1 (branches <= thr), log |Aut|.

    Label order drives both sweeps.  The full group is obtained by moving the
    root from 1 to a centre, which only changes the hashes and multiplicity
    groups along the path between them.
    """
    M = par.shape[0]
    out = np.empty((M, 3), np.float64)
    cnt = np.empty(n + 2, np.int64)
    off = np.empty(n + 2, np.int64)
    kids = np.empty(max(n - 1, 1), np.int64)
    size = np.empty(n + 1, np.int64)
    h = np.empty(n + 1, np.uint64)
    acc = np.empty(n + 1, np.uint64)
    term = np.empty(n + 1, np.float64)
    ht1 = np.empty(n + 1, np.int64)
    ht2 = np.empty(n + 1, np.int64)
    arg1 = np.empty(n + 1, np.int64)
    up = np.empty(n + 1, np.int64)
    path = np.empty(n + 1, np.int64)
    newh = np.empty(n + 1, np.uint64)
    buf = np.empty(n + 1, np.uint64)
    buf2 = np.empty(n + 1, np.uint64)
    lf = log_factorials(n)
    for r in range(M):
        prow = par[r]
        # children lists by counting sort on the parent label
        cnt[:] = 0
        for t in range(n - 1):
            cnt[prow[t]] += 1
        off[1] = 0
        for v in range(1, n + 1):
            off[v + 1] = off[v] + cnt[v]
        for v in range(1, n + 1):
            cnt[v] = off[v]
        for v in range(2, n + 1):
            p = prow[v - 2]
            kids[cnt[p]] = v
            cnt[p] += 1
        lrooted = 0.0
        lsmall = 0.0
        for v in range(n, 0, -1):
            a = np.uint64(0)
            sz = 1
            k = 0
            k2 = 0
            b1 = 0
            b2 = 0
            c1 = 0
            for q in range(off[v], off[v + 1]):
                c = kids[q]
                a += _mix(h[c] ^ _SALT)
                sz += size[c]
                buf[k] = h[c]
                k += 1
                if size[c] <= thr:
                    buf2[k2] = h[c]
                    k2 += 1
                hc = ht1[c] + 1
                if hc > b1:
                    b2 = b1
                    b1 = hc
                    c1 = c
                elif hc > b2:
                    b2 = hc
            acc[v] = a
            size[v] = sz
            h[v] = _mix(a + _GOLD)
            term[v] = _runs_logfact(buf, k, lf)
            lrooted += term[v]
            lsmall += _runs_logfact(buf2, k2, lf)
            ht1[v] = b1
            ht2[v] = b2
            arg1[v] = c1
        out[r, 0] = lrooted
        out[r, 1] = lsmall
        # eccentricities: ht1 is the height below, up the longest path through the parent
        up[1] = 0
        best = ht1[1]
        for v in range(2, n + 1):
            p = prow[v - 2]
            excl = ht2[p] if arg1[p] == v else ht1[p]
            up[v] = 1 + max(up[p], excl)
            e = max(ht1[v], up[v])
            if e < best:
                best = e
        cA = 0
        cB = 0
        if ht1[1] == best:
            cA = 1
        for v in range(2, n + 1):
            if max(ht1[v], up[v]) == best:
                if cA == 0:
                    cA = v
                else:
                    cB = v
        # reroot at cA; path[0] = 1, ..., path[m] = cA
        m = 0
        x = cA
        while x != 1:
            m += 1
            x = prow[x - 2]
        x = cA
        for j in range(m, -1, -1):
            path[j] = x
            if x != 1:
                x = prow[x - 2]
        lfull = lrooted
        half = np.uint64(0)
        hB = h[cB] if cB > 0 else np.uint64(0)
        for j in range(m + 1):
            v = path[j]
            nxtv = path[j + 1] if j < m else 0
            a = acc[v]
            k = 0
            for q in range(off[v], off[v + 1]):
                c = kids[q]
                if c == nxtv:
                    continue
                if j == m and c == cB:
                    continue
                buf[k] = h[c]
                k += 1
            if nxtv > 0:
                a -= _mix(h[nxtv] ^ _SALT)
            if j > 0:
                prev = path[j - 1]
                a += _mix(newh[prev] ^ _SALT)
                if j == m and prev == cB:
                    hB = newh[prev]
                else:
                    buf[k] = newh[prev]
                    k += 1
            newh[v] = _mix(a + _GOLD)
            lfull += _runs_logfact(buf, k, lf) - term[v]
            if j == m and cB > 0:
                half = _mix(a - _mix(hB ^ _SALT) + _GOLD)
        if cB > 0 and half == hB:
            lfull += math.log(2.0)
        out[r, 2] = lfull
    return out


@njit(**_OPTS)
def aut_edges_block(a, b, roots, n, thr):
    """Same columns as :func:`aut_stage1_block` for explicit edge arrays, each
    tree rooted at ``roots[r]``."""
    M = a.shape[0]
    out = np.empty((M, 3), np.float64)
    deg = np.empty(n + 1, np.int64)
    off = np.empty(n + 2, np.int64)
    fill = np.empty(n + 2, np.int64)
    nbr = np.empty(2 * (n - 1), np.int64)
    order = np.empty(n, np.int64)
    bpar = np.empty(n + 1, np.int64)
    size = np.empty(n + 1, np.int64)
    h = np.empty(n + 1, np.uint64)
    buf = np.empty(n, np.uint64)
    buf2 = np.empty(n, np.uint64)
    work = np.empty(n + 1, np.int64)
    layer = np.empty(n, np.int64)
    nxt = np.empty(n, np.int64)
    lf = log_factorials(n)
    for r in range(M):
        _csr_from_edges(a[r], b[r], n, deg, off, nbr, fill)
        lr, ls, _ = _rooted_pass(roots[r], 0, n, off, nbr, order, bpar, size, h, buf, buf2, lf, thr)
        out[r, 0] = lr
        out[r, 1] = ls
        c1, c2 = _centres(n, off, nbr, deg, work, layer, nxt)
        lf_full, _, half = _rooted_pass(c1, c2, n, off, nbr, order, bpar, size, h, buf, buf2, lf, thr)
        if c2 > 0 and half == h[c2]:
            lf_full += math.log(2.0)
        out[r, 2] = lf_full
    return out


@njit(**_OPTS)
def branch_block(par, roots, verts, n):
    """Columns: N_i(single vertex), N_i(rooted edge) with i = verts[r] in
    the tree rooted at roots[r] (i != root)."""
    M = par.shape[0]
    out = np.empty((M, 2), np.int64)
    deg = np.empty(n + 1, np.int64)
    off = np.empty(n + 2, np.int64)
    fill = np.empty(n + 2, np.int64)
    nbr = np.empty(2 * (n - 1), np.int64)
    for r in range(M):
        prow = par[r]
        _csr_from_parents(prow, n, deg, off, nbr, fill)
        i = verts[r]
        root = roots[r]
        # neighbour of i on the path to root: walk up from root in the stage-I tree
        toward = prow[i - 2] if i > 1 else 0
        x = root
        prev = 0
        while x > i:
            prev = x
            x = prow[x - 2]
        if x == i:
            toward = prev
        n1 = 0
        n2 = 0
        for q in range(off[i], off[i + 1]):
            c = nbr[q]
            if c == toward:
                continue
            if deg[c] == 1:
                n1 += 1
            elif deg[c] == 2:
                w = nbr[off[c]]
                if w == i:
                    w = nbr[off[c] + 1]
                if deg[w] == 1:
                    n2 += 1
        out[r, 0] = n1
        out[r, 1] = n2
    return out


@njit(**_OPTS)
def beta_window_block(par, n, D):
    """Columns: max degree, max_{i, d <= D} |Gamma^d(i)|/d, and a certified
    upper bound for beta using |Gamma^d(i)| <= n - |ball_D(i)| for d > D."""
    M = par.shape[0]
    out = np.empty((M, 3), np.float64)
    dm2 = np.empty(n + 1, np.int64)
    dm1 = np.empty(n + 1, np.int64)
    dd = np.empty(n + 1, np.int64)
    cm1 = np.empty(n + 1, np.int64)
    cd = np.empty(n + 1, np.int64)
    ball = np.empty(n + 1, np.int64)
    for r in range(M):
        prow = par[r]
        dm2[:] = 0
        dm1[:] = 1
        cm1[:] = 1
        ball[:] = 1
        best = 0.0
        for d in range(1, D + 1):
            dd[:] = 0
            for v in range(n, 1, -1):
                dd[prow[v - 2]] += dm1[v]
            cd[1] = dd[1]
            for v in range(2, n + 1):
                cd[v] = dd[v] + cm1[prow[v - 2]] - dm2[v]
            for v in range(1, n + 1):
                ball[v] += cd[v]
                q = cd[v] / d
                if q > best:
                    best = q
            if d == 1:
                out[r, 0] = best
            dm2, dm1, dd = dm1, dd, dm2
            cm1, cd = cd, cm1
        smallest = n
        for v in range(1, n + 1):
            if ball[v] < smallest:
                smallest = ball[v]
        out[r, 1] = best
        out[r, 2] = max(best, (n - smallest) / (D + 1))
    return out


@njit(**_OPTS)
def edge_index_block(a, b, lut, n):
    """Index of each tree via the bitmask of its edges and a lookup table."""
    M = a.shape[0]
    out = np.empty(M, np.int64)
    for r in range(M):
        mask = 0
        for t in range(n - 1):
            u = a[r, t]
            v = b[r, t]
            if u > v:
                u, v = v, u
            # position of pair (u, v), u < v, in lexicographic order
            pos = (u - 1) * (2 * n - u) // 2 + (v - u - 1)
            mask |= 1 << pos
        out[r] = lut[mask]
    return out
