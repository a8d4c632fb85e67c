"""Exact O(n^3) maximum-weight matching on a complete graph, numba-compiled.

Array port of the classic primal-dual blossom algorithm with integer duals
(edge weights are doubled internally so all duals stay integral).  The
graph is given as a dense symmetric int64 matrix of strictly positive
weights; with an even node count and all-positive weights the maximum
weight matching is perfect, which is how the decoder uses it: minimising
cost c over a perfect matching is maximising BIG - c.

Internals follow the well-known formulation: `st[x]` is the blossom that
currently contains node x (its "surface" id), `flo[b]` the cyclic list of
sub-blossoms of b, `flo_from[b][x]` the sub-blossom of b containing the
original node x, `lab` the dual variables, and `S` the alternating-tree
label (-1 free, 0 even, 1 odd).  Blossom ids occupy n+1..2n.  All
recursion of the reference formulation (queue pushes, st/match updates)
is replaced with explicit stacks.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_INF64 = np.int64(1) << 60


@njit(cache=True)
def _e_delta(lab, gu, gv, gw, a, b):
    # reduced cost of the edge stored at slot (a, b); its dual variables are
    # those of the stored original endpoints, which differ from (a, b) when
    # a row belongs to a blossom.  Weights are doubled so this is integral.
    return lab[gu[a, b]] + lab[gv[a, b]] - gw[a, b] * 2


@njit(cache=True)
def _update_slack(lab, gu, gv, gw, slack, u, x):
    if slack[x] == 0 or _e_delta(lab, gu, gv, gw, u, x) < _e_delta(
        lab, gu, gv, gw, slack[x], x
    ):
        slack[x] = u


@njit(cache=True)
def _set_slack(lab, gu, gv, gw, slack, st, S, n, x):
    slack[x] = 0
    for u in range(1, n + 1):
        if gw[u, x] > 0 and st[u] != x and S[st[u]] == 0:
            _update_slack(lab, gu, gv, gw, slack, u, x)


@njit(cache=True)
def _q_push(q, q_tail, flo, flo_len, n, x, stack):
    # push node x (expanding blossoms) onto the BFS queue; returns new tail
    sp = 0
    stack[sp] = x
    sp += 1
    while sp > 0:
        sp -= 1
        y = stack[sp]
        if y <= n:
            q[q_tail] = y
            q_tail += 1
        else:
            for i in range(flo_len[y]):
                stack[sp] = flo[y, i]
                sp += 1
    return q_tail


@njit(cache=True)
def _set_st(st, flo, flo_len, n, x, b, stack):
    sp = 0
    stack[sp] = x
    sp += 1
    while sp > 0:
        sp -= 1
        y = stack[sp]
        st[y] = b
        if y > n:
            for i in range(flo_len[y]):
                stack[sp] = flo[y, i]
                sp += 1


@njit(cache=True)
def _get_pr(flo, flo_len, b, xr):
    pr = 0
    for i in range(flo_len[b]):
        if flo[b, i] == xr:
            pr = i
            break
    if pr % 2 == 1:
        # walk the cycle the other way: reverse flo[b][1:]
        lo, hi = 1, flo_len[b] - 1
        while lo < hi:
            tmp = flo[b, lo]
            flo[b, lo] = flo[b, hi]
            flo[b, hi] = tmp
            lo += 1
            hi -= 1
        return flo_len[b] - pr
    return pr


@njit(cache=True)
def _set_match(match, gu, gv, flo, flo_len, flo_from, n, u0, v0, stack):
    # iterative version of the recursive match assignment inside blossoms
    sp = 0
    stack[2 * sp] = u0
    stack[2 * sp + 1] = v0
    sp += 1
    while sp > 0:
        sp -= 1
        u = stack[2 * sp]
        v = stack[2 * sp + 1]
        match[u] = gv[u, v]
        if u > n:
            xr = flo_from[u, gu[u, v]]
            pr = _get_pr(flo, flo_len, u, xr)
            for i in range(pr):
                stack[2 * sp] = flo[u, i]
                stack[2 * sp + 1] = flo[u, i ^ 1]
                sp += 1
            stack[2 * sp] = xr
            stack[2 * sp + 1] = v
            sp += 1
            # rotate flo[u] left by pr
            ln = flo_len[u]
            if pr > 0:
                tmp = np.empty(ln, dtype=np.int64)
                for i in range(ln):
                    tmp[i] = flo[u, (pr + i) % ln]
                for i in range(ln):
                    flo[u, i] = tmp[i]


@njit(cache=True)
def _augment(match, st, pa, gu, gv, flo, flo_len, flo_from, n, u, v, stack):
    while True:
        xnv = st[match[u]]
        _set_match(match, gu, gv, flo, flo_len, flo_from, n, u, v, stack)
        if xnv == 0:
            return
        _set_match(match, gu, gv, flo, flo_len, flo_from, n, xnv, st[pa[xnv]], stack)
        u = st[pa[xnv]]
        v = xnv


@njit(cache=True)
def _get_lca(st, pa, match, vis, t, u, v):
    t += 1
    while u != 0 or v != 0:
        if u != 0:
            if vis[u] == t:
                return u, t
            vis[u] = t
            u = st[match[u]]
            if u != 0:
                u = st[pa[u]]
        u, v = v, u
    return 0, t


@njit(cache=True)
def _add_blossom(
    lab, gu, gv, gw, match, st, pa, S, slack, flo, flo_len, flo_from,
    n, n_x, u, lca, v, q, q_tail, stack,
):
    b = n + 1
    while b <= n_x and st[b] != 0:
        b += 1
    if b > n_x:
        n_x += 1
    lab[b] = 0
    S[b] = 0
    match[b] = match[lca]
    flo_len[b] = 0
    flo[b, 0] = lca
    flo_len[b] = 1
    x = u
    while x != lca:
        flo[b, flo_len[b]] = x
        flo_len[b] += 1
        y = st[match[x]]
        flo[b, flo_len[b]] = y
        flo_len[b] += 1
        q_tail = _q_push(q, q_tail, flo, flo_len, n, y, stack)
        x = st[pa[y]]
    # reverse flo[b][1:]
    lo, hi = 1, flo_len[b] - 1
    while lo < hi:
        tmp = flo[b, lo]
        flo[b, lo] = flo[b, hi]
        flo[b, hi] = tmp
        lo += 1
        hi -= 1
    x = v
    while x != lca:
        flo[b, flo_len[b]] = x
        flo_len[b] += 1
        y = st[match[x]]
        flo[b, flo_len[b]] = y
        flo_len[b] += 1
        q_tail = _q_push(q, q_tail, flo, flo_len, n, y, stack)
        x = st[pa[y]]
    _set_st(st, flo, flo_len, n, b, b, stack)
    for x in range(1, n_x + 1):
        gw[b, x] = 0
        gw[x, b] = 0
    for x in range(1, n + 1):
        flo_from[b, x] = 0
    for i in range(flo_len[b]):
        xs = flo[b, i]
        for x in range(1, n_x + 1):
            if gw[b, x] == 0 or _e_delta(lab, gu, gv, gw, xs, x) < _e_delta(
                lab, gu, gv, gw, b, x
            ):
                gu[b, x] = gu[xs, x]
                gv[b, x] = gv[xs, x]
                gw[b, x] = gw[xs, x]
                gu[x, b] = gu[x, xs]
                gv[x, b] = gv[x, xs]
                gw[x, b] = gw[x, xs]
        for x in range(1, n + 1):
            if flo_from[xs, x] != 0:
                flo_from[b, x] = xs
    _set_slack(lab, gu, gv, gw, slack, st, S, n, b)
    return n_x, q_tail


@njit(cache=True)
def _expand_blossom(
    lab, gu, gv, gw, match, st, pa, S, slack, flo, flo_len, flo_from,
    n, b, q, q_tail, stack,
):
    for i in range(flo_len[b]):
        _set_st(st, flo, flo_len, n, flo[b, i], flo[b, i], stack)
    xr = flo_from[b, gu[b, pa[b]]]
    pr = _get_pr(flo, flo_len, b, xr)
    i = 0
    while i < pr:
        xs = flo[b, i]
        xns = flo[b, i + 1]
        pa[xs] = gu[xns, xs]
        S[xs] = 1
        S[xns] = 0
        slack[xs] = 0
        _set_slack(lab, gu, gv, gw, slack, st, S, n, xns)
        q_tail = _q_push(q, q_tail, flo, flo_len, n, xns, stack)
        i += 2
    S[xr] = 1
    pa[xr] = pa[b]
    for i in range(pr + 1, flo_len[b]):
        xs = flo[b, i]
        S[xs] = -1
        _set_slack(lab, gu, gv, gw, slack, st, S, n, xs)
    st[b] = 0
    return q_tail


@njit(cache=True)
def _on_found_edge(
    lab, gu, gv, gw, match, st, pa, S, slack, vis, flo, flo_len, flo_from,
    n, n_x, eu, ev, q, q_tail, stack, t,
):
    # returns (augmented, n_x, q_tail, t)
    u = st[eu]
    v = st[ev]
    if S[v] == -1:
        pa[v] = eu
        S[v] = 1
        nu = st[match[v]]
        slack[v] = 0
        slack[nu] = 0
        S[nu] = 0
        q_tail = _q_push(q, q_tail, flo, flo_len, n, nu, stack)
    elif S[v] == 0:
        lca, t = _get_lca(st, pa, match, vis, t, u, v)
        if lca == 0:
            _augment(match, st, pa, gu, gv, flo, flo_len, flo_from, n, u, v, stack)
            _augment(match, st, pa, gu, gv, flo, flo_len, flo_from, n, v, u, stack)
            return True, n_x, q_tail, t
        n_x, q_tail = _add_blossom(
            lab, gu, gv, gw, match, st, pa, S, slack, flo, flo_len, flo_from,
            n, n_x, u, lca, v, q, q_tail, stack,
        )
    return False, n_x, q_tail, t


@njit(cache=True)
def _matching_phase(
    lab, gu, gv, gw, match, st, pa, S, slack, vis, flo, flo_len, flo_from,
    n, n_x, q, stack, t,
):
    # grows alternating trees until one augmentation; returns
    # (augmented, n_x, t)
    for x in range(1, n_x + 1):
        S[x] = -1
        slack[x] = 0
    q_head = 0
    q_tail = 0
    for x in range(1, n_x + 1):
        if st[x] == x and match[x] == 0:
            pa[x] = 0
            S[x] = 0
            q_tail = _q_push(q, q_tail, flo, flo_len, n, x, stack)
    if q_tail == 0:
        return False, n_x, t
    while True:
        while q_head < q_tail:
            u = q[q_head]
            q_head += 1
            if S[st[u]] == 1:
                continue
            for v in range(1, n + 1):
                if gw[u, v] > 0 and st[u] != st[v]:
                    if _e_delta(lab, gu, gv, gw, u, v) == 0:
                        aug, n_x, q_tail, t = _on_found_edge(
                            lab, gu, gv, gw, match, st, pa, S, slack, vis,
                            flo, flo_len, flo_from, n, n_x, u, v, q, q_tail,
                            stack, t,
                        )
                        if aug:
                            return True, n_x, t
                    else:
                        _update_slack(lab, gu, gv, gw, slack, u, st[v])
        d = _INF64
        for b in range(n + 1, n_x + 1):
            if st[b] == b and S[b] == 1:
                half = lab[b] // 2
                if half < d:
                    d = half
        for x in range(1, n_x + 1):
            if st[x] == x and slack[x] != 0:
                delta = _e_delta(lab, gu, gv, gw, slack[x], x)
                if S[x] == -1:
                    if delta < d:
                        d = delta
                elif S[x] == 0:
                    if delta // 2 < d:
                        d = delta // 2
        for u in range(1, n + 1):
            if S[st[u]] == 0:
                if lab[u] <= d:
                    return False, n_x, t
                lab[u] -= d
            elif S[st[u]] == 1:
                lab[u] += d
        for b in range(n + 1, n_x + 1):
            if st[b] == b:
                if S[b] == 0:
                    lab[b] += d * 2
                elif S[b] == 1:
                    lab[b] -= d * 2
        q_head = 0
        q_tail = 0
        for x in range(1, n_x + 1):
            if (
                st[x] == x
                and slack[x] != 0
                and st[slack[x]] != x
                and _e_delta(lab, gu, gv, gw, slack[x], x) == 0
            ):
                aug, n_x, q_tail, t = _on_found_edge(
                    lab, gu, gv, gw, match, st, pa, S, slack, vis,
                    flo, flo_len, flo_from, n, n_x,
                    gu[slack[x], x], gv[slack[x], x], q, q_tail, stack, t,
                )
                if aug:
                    return True, n_x, t
        for b in range(n + 1, n_x + 1):
            if st[b] == b and S[b] == 1 and lab[b] == 0:
                q_tail = _expand_blossom(
                    lab, gu, gv, gw, match, st, pa, S, slack, flo, flo_len,
                    flo_from, n, b, q, q_tail, stack,
                )


@njit(cache=True)
def max_weight_matching(w):
    """Maximum-weight matching of a symmetric positive int64 matrix.

    Nodes are 0-indexed externally; returns an int64 array `mate` with
    mate[i] = partner of i, or -1 if i is unmatched (cannot happen for an
    even node count with all weights positive: the matching is perfect).
    """
    n = w.shape[0]
    nn = 2 * n + 2  # node ids 1..n, blossom ids n+1..2n
    gu = np.zeros((nn, nn), dtype=np.int64)
    gv = np.zeros((nn, nn), dtype=np.int64)
    gw = np.zeros((nn, nn), dtype=np.int64)
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            gu[u, v] = u
            gv[u, v] = v
            if u != v:
                gw[u, v] = w[u - 1, v - 1]
    lab = np.zeros(nn, dtype=np.int64)
    match = np.zeros(nn, dtype=np.int64)
    slack = np.zeros(nn, dtype=np.int64)
    st = np.zeros(nn, dtype=np.int64)
    pa = np.zeros(nn, dtype=np.int64)
    S = np.full(nn, -1, dtype=np.int64)
    vis = np.zeros(nn, dtype=np.int64)
    flo = np.zeros((nn, nn), dtype=np.int64)
    flo_len = np.zeros(nn, dtype=np.int64)
    flo_from = np.zeros((nn, nn), dtype=np.int64)
    q = np.zeros(nn * nn, dtype=np.int64)
    stack = np.zeros(2 * nn * nn, dtype=np.int64)
    n_x = n
    for u in range(nn):
        st[u] = u
    for u in range(1, n + 1):
        flo_from[u, u] = u
    w_max = np.int64(0)
    for u in range(1, n + 1):
        for v in range(1, n + 1):
            if gw[u, v] > w_max:
                w_max = gw[u, v]
    for u in range(1, n + 1):
        lab[u] = w_max
    t = 0
    while True:
        aug, n_x, t = _matching_phase(
            lab, gu, gv, gw, match, st, pa, S, slack, vis, flo, flo_len,
            flo_from, n, n_x, q, stack, t,
        )
        if not aug:
            break
    mate = np.full(n, -1, dtype=np.int64)
    for u in range(1, n + 1):
        if match[u] != 0:
            mate[u - 1] = match[u] - 1
    return mate
