"""Space-time matching graph construction and exact MWPM decoding.

Detection events of one graph type become real nodes; each real node gets a
virtual boundary companion priced at its distance to the nearest admissible
lattice edge, and companions interconnect for free.  Edge weights default to
unit-step Manhattan distances |dr| + |dc| + |dt| on the stabilizer lattice;
an optional Metric reprices the individual steps (and adds the diagonal
steps produced by single two-qubit faults) by fault likelihood.

Matching is always exact: a bitmask dynamic program handles small clusters
(the common case at low physical error rate) and a compiled blossom
algorithm handles the rest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from . import _blossom
from .frame import GRAPH_X, GRAPH_Z, DetectionEvent
from .lattice import Coord, Lattice, stab_rc

_INF = 10**9

# Bitmask-DP scratch size limit; the DP runs over real nodes only, with
# companions folded into a per-node boundary price.  Above _DP_ROUTE_MAX
# the O(k^3) blossom is cheaper than the O(2^k) DP.
_DP_FOLDED_MAX = 18
_DP_ROUTE_MAX = 13


@dataclass(frozen=True)
class GraphNode:
    t: int
    r: int
    c: int
    boundary: bool = False


@dataclass
class MatchingGraph:
    """Complete graph over real detection nodes plus boundary companions.

    Node i (0 <= i < n_real) is real; node i + n_real is its companion.
    weights[i, j] holds real-real distances, bnd[i] the boundary price of
    real node i.  Companion-companion edges are implicitly zero.
    """

    graph: str  # GRAPH_X or GRAPH_Z
    d: int
    nodes: list[GraphNode]
    n_real: int
    weights: np.ndarray  # (n_real, n_real) int64; _INF marks pruned edges
    bnd: np.ndarray  # (n_real,) int64

    @property
    def n_nodes(self) -> int:
        return 2 * self.n_real


@dataclass(frozen=True)
class Matching:
    """Perfect matching as index pairs into MatchingGraph nodes."""

    pairs: tuple[tuple[int, int], ...]
    weight: int


@dataclass(frozen=True)
class Metric:
    """Integer step weights for the space-time distance.

    wh, wv and wt price horizontal, vertical and time steps.  wdc and wdr
    price the correlated diagonal steps (dt, dc) = (1, 1) resp.
    (dt, dr) = (1, 1) that a single two-qubit fault in the measurement
    circuit can produce; None leaves a diagonal at its decomposed price
    (wh + wt resp. wv + wt), which recovers plain weighted Manhattan.
    The default is the unit metric.
    """

    wh: int = 1
    wv: int = 1
    wt: int = 1
    wdc: int | None = None
    wdr: int | None = None

    def distance(self, dt, dr, dc):
        """Cheapest decomposition of a displacement into weighted steps.

        Vectorized over numpy int arrays.  n1 (n2) is the signed count of
        column-diagonal (row-diagonal) steps; each contributes once to the
        time budget and once to its spatial budget.  The cost is convex
        piecewise-linear in (n1, n2), so the optimum is at one of the
        eight candidate vertices below.
        """
        if self.wdc is None and self.wdr is None:
            return self.wt * np.abs(dt) + self.wv * np.abs(dr) + self.wh * np.abs(dc)
        wdc = self.wh + self.wt if self.wdc is None else self.wdc
        wdr = self.wv + self.wt if self.wdr is None else self.wdr
        zero = np.zeros_like(dt)
        cands = (
            (zero, zero), (dc, zero), (zero, dr), (dc, dr),
            (zero, dt), (dt, zero), (dc, dt - dc), (dt - dr, dr),
        )
        best = None
        for n1, n2 in cands:
            cost = (
                wdc * np.abs(n1)
                + wdr * np.abs(n2)
                + self.wh * np.abs(dc - n1)
                + self.wv * np.abs(dr - n2)
                + self.wt * np.abs(dt - n1 - n2)
            )
            best = cost if best is None else np.minimum(best, cost)
        return best

    def pair(self, a, b) -> int:
        """Distance between two (t, r, c) triples."""
        return int(
            self.distance(
                np.int64(b[0] - a[0]), np.int64(b[1] - a[1]), np.int64(b[2] - a[2])
            )
        )

    def boundary(self, graph: str, d: int, r: int, c: int) -> int:
        """Weighted price of the nearest admissible boundary exit."""
        steps = boundary_distance(graph, d, r, c)
        return (self.wh if graph == GRAPH_Z else self.wv) * steps


UNIT_METRIC = Metric()


def boundary_distance(graph: str, d: int, r: int, c: int) -> int:
    """Steps from a stabilizer node to its type's nearest admissible edge.

    X-error chains (Z graph) terminate left/right, Z-error chains (X graph)
    top/bottom.
    """
    if graph == GRAPH_Z:
        return min(c + 1, d - 1 - c)
    return min(r + 1, d - 1 - r)


def _boundary_side(graph: str, d: int, r: int, c: int) -> str:
    if graph == GRAPH_Z:
        return "low" if c + 1 <= d - 1 - c else "high"
    return "low" if r + 1 <= d - 1 - r else "high"


def build_graph(
    events,
    lat: Lattice,
    T: int,
    knn: int | None = None,
    graph: str | None = None,
    metric: Metric | None = None,
) -> MatchingGraph:
    """Matching graph for the detection events of a single graph type.

    Events may be DetectionEvents (graph type inferred, must agree) or raw
    (t, r, c) triples (graph type required).  Nodes are sorted by
    (t, r, c) so decoding is independent of the event order handed in.
    With knn set, real-real edges beyond each node's k nearest neighbors
    are pruned (weights set to infinity); boundary edges are never pruned.
    Distances follow metric (default: the unit metric).
    """
    if not events:
        return MatchingGraph(graph or "", lat.d, [], 0, np.zeros((0, 0), np.int64), np.zeros(0, np.int64))
    tagged = {ev.graph for ev in events if isinstance(ev, DetectionEvent)}
    if graph is not None:
        tagged.add(graph)
    if len(tagged) != 1:
        raise ValueError("events must all belong to one declared graph type")
    graph = tagged.pop()
    # normalize: accept DetectionEvent or raw (t, r, c) triples
    triples = []
    for ev in events:
        if isinstance(ev, DetectionEvent):
            r, c = stab_rc(ev.stab, lat.qubits[ev.stab])
            triples.append((ev.t, r, c))
        else:
            triples.append(tuple(ev))
    triples.sort()
    arr = np.array(triples, dtype=np.int64)
    n = len(triples)
    m = metric or UNIT_METRIC
    w = m.distance(
        arr[:, 0][:, None] - arr[:, 0][None, :],
        arr[:, 1][:, None] - arr[:, 1][None, :],
        arr[:, 2][:, None] - arr[:, 2][None, :],
    ).astype(np.int64)
    bnd = np.array(
        [m.boundary(graph, lat.d, r, c) for _, r, c in triples], dtype=np.int64
    )
    if knn is not None and n > knn + 1:
        keep = np.zeros((n, n), dtype=bool)
        order = np.argsort(w, axis=1, kind="stable")
        for i in range(n):
            keep[i, order[i, 1 : knn + 1]] = True
        keep |= keep.T
        w = np.where(keep, w, _INF)
        np.fill_diagonal(w, 0)
    nodes = [GraphNode(t, r, c) for t, r, c in triples]
    nodes += [GraphNode(t, r, c, boundary=True) for t, r, c in triples]
    return MatchingGraph(graph, lat.d, nodes, n, w, bnd)


def mwpm(graph: MatchingGraph) -> Matching:
    """Exact minimum-weight perfect matching over the full node set.

    The real nodes are first split into clusters: any pair priced strictly
    above the sum of the two boundary prices can be rewired through the
    boundary at no extra cost, so an optimal matching never crosses
    clusters and each cluster is solved independently (bitmask DP for
    small clusters, blossom for large ones).  Ties are broken
    deterministically by preferring the lexicographically smallest
    pairing: a real partner (lowest index first) beats the boundary
    companion at equal weight.
    """
    if graph.n_nodes % 2 != 0:
        raise ValueError("perfect matching needs an even node count")
    m = graph.n_real
    if m == 0:
        return Matching((), 0)
    w, bnd = graph.weights, graph.bnd
    pairs = []
    to_boundary = []
    weight = 0
    for cl in _clusters(w, bnd):
        if len(cl) == 1:
            i = int(cl[0])
            to_boundary.append(i)
            weight += int(bnd[i])
        elif len(cl) == 2:
            # clusters of two exist only when pairing is strictly cheaper
            i, j = int(cl[0]), int(cl[1])
            pairs.append((i, j))
            weight += int(w[i, j])
        elif len(cl) <= _DP_ROUTE_MAX:
            sub_pairs, sub_single, sub_w = _match_folded(w[np.ix_(cl, cl)], bnd[cl])
            pairs += [(int(cl[a]), int(cl[b])) for a, b in sub_pairs]
            to_boundary += [int(cl[a]) for a in sub_single]
            weight += sub_w
        else:
            sub_pairs, sub_single, sub_w = _match_blossom(w, bnd, cl)
            pairs += sub_pairs
            to_boundary += sub_single
            weight += sub_w
    # Weight-neutral tie rewiring: two boundary-matched events whose pairing
    # price exactly equals the sum of their boundary prices are paired
    # instead (lexicographically smallest first).  Cross-cluster pairs always
    # satisfy w >= bnd_a + bnd_b, so this resolves exactly the degenerate
    # ties without inflating the clusters.
    to_boundary.sort()
    rewired = []
    free = []
    taken = [False] * len(to_boundary)
    for a, i in enumerate(to_boundary):
        if taken[a]:
            continue
        for b in range(a + 1, len(to_boundary)):
            j = to_boundary[b]
            if not taken[b] and w[i, j] < _INF and int(w[i, j]) == int(bnd[i]) + int(bnd[j]):
                taken[a] = taken[b] = True
                rewired.append((i, j))
                break
        else:
            free.append(i)
    pairs += rewired
    to_boundary = free
    pairs += [(i, i + m) for i in to_boundary]
    used = {i + m for i in to_boundary}
    spare = [i + m for i in range(m) if i + m not in used]
    pairs += list(zip(spare[0::2], spare[1::2]))  # free companion-companion
    return Matching(tuple(sorted(pairs)), int(weight))


def _clusters(w: np.ndarray, bnd: np.ndarray):
    """Connected components under the 'pairing strictly beats boundary' rule.

    Equal-weight (degenerate) pairs are left unlinked for speed; mwpm
    rewires them after the per-cluster solves.
    """
    m = len(bnd)
    labels = _uf_labels(np.ascontiguousarray(w), bnd)
    order = np.argsort(labels, kind="stable")
    cuts = np.nonzero(np.diff(labels[order]))[0] + 1
    return np.split(order, cuts)


@njit(cache=True)
def _uf_labels(w, bnd):
    """Union-find roots under the strict linking rule, as a label array
    where each component is tagged by its smallest member index."""
    m = len(bnd)
    parent = np.arange(m)
    for i in range(m - 1):
        for j in range(i + 1, m):
            if w[i, j] < bnd[i] + bnd[j]:
                ri = i
                while parent[ri] != ri:
                    parent[ri] = parent[parent[ri]]
                    ri = parent[ri]
                rj = j
                while parent[rj] != rj:
                    parent[rj] = parent[parent[rj]]
                    rj = parent[rj]
                if ri < rj:
                    parent[rj] = ri
                elif rj < ri:
                    parent[ri] = rj
    labels = np.empty(m, dtype=np.int64)
    for i in range(m):
        r = i
        while parent[r] != r:
            r = parent[r]
        labels[i] = r
    return labels


def _match_folded(w: np.ndarray, bnd: np.ndarray):
    """DP over subsets of real nodes; companions absorb the remainder.

    Returns (real-real index pairs, boundary-matched indices, weight).
    """
    m = len(bnd)
    choice = _DP_CHOICE[: 1 << m]
    _dp_folded(np.ascontiguousarray(w), bnd, _DP_COST[: 1 << m], choice)
    pairs = []
    single = []
    mask = (1 << m) - 1
    weight = 0
    while mask:
        i = (mask & -mask).bit_length() - 1
        j = int(choice[mask])
        if j < 0:
            single.append(i)
            weight += int(bnd[i])
            mask &= mask - 1
        else:
            pairs.append((i, j))
            weight += int(w[i, j])
            mask &= ~((1 << i) | (1 << j))
    return pairs, single, weight


# Reused DP scratch buffers; the decoder runs single-threaded per process.
_DP_COST = np.empty(1 << _DP_FOLDED_MAX, dtype=np.int64)
_DP_CHOICE = np.empty(1 << _DP_FOLDED_MAX, dtype=np.int64)


@njit(cache=True)
def _dp_folded(w, bnd, f, choice):
    m = len(bnd)
    size = 1 << m
    f[0] = 0
    for mask in range(1, size):
        i = 0
        while not (mask >> i) & 1:
            i += 1
        rest = mask & ~(1 << i)
        # partners in index order first, boundary last; strict improvement
        # only, so ties resolve to the smallest real partner
        best = np.int64(1) << 60
        pick = -1
        j = i + 1
        sub = rest >> j
        while sub:
            if sub & 1:
                cand = w[i, j] + f[rest & ~(1 << j)]
                if cand < best:
                    best = cand
                    pick = j
            j += 1
            sub >>= 1
        if bnd[i] + f[rest] < best:
            best = bnd[i] + f[rest]
            pick = -1
        f[mask] = best
        choice[mask] = pick


def _match_blossom(w: np.ndarray, bnd: np.ndarray, cl):
    """Blossom solve of one cluster (global real-node indices in cl).

    The cluster is doubled into a companion graph (local node i is real,
    i + k its boundary port; companions pair with each other for free and
    any real node may use any port at its own boundary price) and handed
    to the compiled exact matcher as a max-weight problem.  Costs are
    scaled and real-real edges discounted by one unit so equal-weight
    matchings resolve toward pairing, matching the DP tie-break.

    Returns (real-real global pairs, boundary-matched globals, weight).
    """
    k = len(cl)
    # scaled costs; BIG dominates so the max-weight matching is perfect
    # and never uses a forbidden (weight-0) edge
    scale = 2 * k + 1
    wloc = w[np.ix_(cl, cl)]
    bloc = bnd[cl]
    max_cost = int(bloc.max()) * scale
    finite = wloc < _INF
    if finite.any():
        max_cost = max(max_cost, int(wloc[finite].max()) * scale)
    big = (k + 1) * (max_cost + 2)
    n = 2 * k
    wm = np.zeros((n, n), dtype=np.int64)
    wm[k:, k:] = big  # companion-companion, cost 0
    wm[:k, :k] = np.where(finite, big - (wloc * scale - 1), 0)
    port = big - bloc * scale
    wm[:k, k:] = port[:, None]
    wm[k:, :k] = port[None, :]
    np.fill_diagonal(wm, 0)
    mate = _blossom.max_weight_matching(wm)
    pairs = []
    single = []
    weight = 0
    for a in range(k):
        b = int(mate[a])
        if b < k:
            if a < b:
                pairs.append((int(cl[a]), int(cl[b])))
                weight += int(w[cl[a], cl[b]])
        else:
            single.append(int(cl[a]))
            weight += int(bnd[cl[a]])
    return pairs, single, int(weight)


def correction_data_qubits(graph: str, d: int, a: GraphNode, b: GraphNode):
    """Data qubits flipped by the canonical geodesic correction for a pair.

    Real-real chords walk columns first, then rows (Z graph; transposed
    for the X graph).  A real-boundary chord exits through the cheaper
    edge, low side on ties.  Purely time-like segments flip nothing.
    """
    if a.boundary and b.boundary:
        return []
    if b.boundary:
        a, b = b, a
    if a.boundary:
        r, c = b.r, b.c
        side = _boundary_side(graph, d, r, c)
        if graph == GRAPH_Z:
            cols = range(2 * c, -1, -2) if side == "low" else range(2 * c + 2, 2 * d - 1, 2)
            return [(2 * r, j) for j in cols]
        rows = range(2 * r, -1, -2) if side == "low" else range(2 * r + 2, 2 * d - 1, 2)
        return [(i, 2 * c) for i in rows]
    qubits = []
    if graph == GRAPH_Z:
        c0, c1 = sorted((a.c, b.c))
        qubits += [(2 * a.r, j) for j in range(2 * c0 + 2, 2 * c1 + 1, 2)]
        r0, r1 = sorted((a.r, b.r))
        qubits += [(i, 2 * b.c + 1) for i in range(2 * r0 + 1, 2 * r1, 2)]
    else:
        r0, r1 = sorted((a.r, b.r))
        qubits += [(i, 2 * a.c) for i in range(2 * r0 + 2, 2 * r1 + 1, 2)]
        c0, c1 = sorted((a.c, b.c))
        qubits += [(2 * b.r + 1, j) for j in range(2 * c0 + 1, 2 * c1, 2)]
    return qubits


def logical_flip(matching: Matching, graph: MatchingGraph, lat: Lattice) -> int:
    """Parity of correction-chain crossings with the fixed logical line.

    The Z graph counts crossings of the logical-Z column (data column 0),
    predicting logical X flips; the X graph counts crossings of the
    logical-X row, predicting logical Z flips.
    """
    if not matching.pairs:
        return 0
    support = set(lat.logical_z if graph.graph == GRAPH_Z else lat.logical_x)
    parity = 0
    for i, j in matching.pairs:
        a, b = graph.nodes[i], graph.nodes[j]
        for q in correction_data_qubits(graph.graph, graph.d, a, b):
            if q in support:
                parity ^= 1
    return parity


def decode_graph(
    events,
    lat: Lattice,
    T: int,
    knn: int | None = None,
    graph: str | None = None,
    metric: Metric | None = None,
) -> int:
    """Predicted logical flip parity for one graph type's events."""
    g = build_graph(events, lat, T, knn=knn, graph=graph, metric=metric)
    if g.n_real == 0:
        return 0
    return logical_flip(mwpm(g), g, lat)


def decode_shot(events, lat: Lattice, T: int, true_flips=(0, 0), knn=None, metric=None):
    """Decode both graphs independently; returns (logical X fail, logical Z
    fail) by comparing predictions against the ground-truth flips."""
    ev_z = [e for e in events if e.graph == GRAPH_Z]
    ev_x = [e for e in events if e.graph == GRAPH_X]
    pred_x = decode_graph(ev_z, lat, T, knn=knn, metric=metric)
    pred_z = decode_graph(ev_x, lat, T, knn=knn, metric=metric)
    return pred_x != true_flips[0], pred_z != true_flips[1]
