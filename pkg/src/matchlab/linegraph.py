"""Directed line-graph of a weighted graph and its random coloring processes.

One node per edge; an arc points from each edge to every strictly lighter
edge that shares an endpoint, so the heaviest-first node order is topological.
Two coloring replays are supported:

  * cluster mode (bipartite): whole left-vertex clusters are colored red with
    probability p the first time one of their nodes becomes active; a node is
    active iff its cluster is still uncolored at its turn and no active red
    node points at it.  Red clusters form a vertex sample.
  * node mode (any graph): every node is colored independently; a node is
    active iff no active red node points at it.  Red nodes form an edge
    sample.

``exact_event_probabilities`` computes per-node active / qualifies /
penalized probabilities exactly by enumerating all colorings, grouping them
by red count so one enumeration serves every p.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import BIPARTITE, Instance, edge_order
from .solvers import CapacityError

CLUSTER = "cluster"
NODE = "node"

ENUMERATION_LIMIT = 20


@dataclass(frozen=True)
class LineGraph:
    weights: tuple[float, ...]
    topo: tuple[int, ...]                      # node ids, heaviest first
    in_arcs: tuple[tuple[int, ...], ...]       # arc sources (heavier edges)
    out_arcs: tuple[tuple[int, ...], ...]      # arc targets (lighter edges)
    endpoints: tuple[tuple[int, int], ...]     # canonical vertex keys per node
    clusters: tuple[tuple[int, ...], ...] | None   # bipartite: per left vertex
    cluster_of: tuple[int, ...] | None

    @property
    def node_count(self) -> int:
        return len(self.weights)

    @property
    def cluster_count(self) -> int:
        if self.clusters is None:
            raise ValueError("clusters exist only for bipartite line graphs")
        return len(self.clusters)


def build_line_graph(inst: Instance) -> LineGraph:
    order = edge_order(inst)
    m = inst.m
    nodes_at_vertex: dict[int, list[int]] = {}
    for eid in order.order:  # heaviest first, so lists come out rank-sorted
        for key in inst.endpoint_keys(eid):
            nodes_at_vertex.setdefault(key, []).append(eid)
    in_arcs: list[list[int]] = [[] for _ in range(m)]
    out_arcs: list[list[int]] = [[] for _ in range(m)]
    for nodes in nodes_at_vertex.values():
        for i, heavier in enumerate(nodes):
            for lighter in nodes[i + 1:]:
                out_arcs[heavier].append(lighter)
                in_arcs[lighter].append(heavier)
    clusters = cluster_of = None
    if inst.kind == BIPARTITE:
        per_left: list[list[int]] = [[] for _ in range(inst.left_size)]
        cluster_of_l = [0] * m
        for eid, (a, _, _) in enumerate(inst.edges):
            per_left[a].append(eid)
            cluster_of_l[eid] = a
        clusters = tuple(tuple(c) for c in per_left)
        cluster_of = tuple(cluster_of_l)
    return LineGraph(
        weights=tuple(w for _, _, w in inst.edges),
        topo=order.order,
        in_arcs=tuple(tuple(sorted(a)) for a in in_arcs),
        out_arcs=tuple(tuple(sorted(a)) for a in out_arcs),
        endpoints=tuple(inst.endpoint_keys(e) for e in range(m)),
        clusters=clusters,
        cluster_of=cluster_of,
    )


@dataclass(frozen=True)
class ColoringTrace:
    mode: str
    color: tuple[str, ...]                  # "red" / "blue" per node, final
    active: tuple[bool, ...]
    qualifies: tuple[bool, ...]
    penalized: tuple[bool, ...] | None      # node mode only


def replay_coloring(lg: LineGraph, sample_mask: int, mode: str) -> ColoringTrace:
    """Deterministically replay one coloring realization.

    ``sample_mask`` indexes clusters (cluster mode) or nodes (node mode);
    sampled items are the red ones.  Leftover clusters that never produce an
    active node are still colored from the mask, so the final trace always
    carries a full coloring.
    """
    n = lg.node_count
    if mode == NODE:
        red = [bool((sample_mask >> i) & 1) for i in range(n)]
        active = [False] * n
        for i in lg.topo:
            active[i] = not any(active[j] and red[j] for j in lg.in_arcs[i])
        penalized = _penalized_flags(lg, red, active)
    elif mode == CLUSTER:
        if lg.cluster_of is None:
            raise ValueError("cluster mode requires a bipartite line graph")
        red = [bool((sample_mask >> lg.cluster_of[i]) & 1) for i in range(n)]
        colored = [False] * lg.cluster_count
        active = [False] * n
        for i in lg.topo:
            c = lg.cluster_of[i]
            if colored[c]:
                continue
            if not any(active[j] and red[j] for j in lg.in_arcs[i]):
                active[i] = True
                colored[c] = True
        penalized = None
    else:
        raise ValueError(f"unknown coloring mode {mode!r}")
    qualifies = _qualify_flags(lg, red, active)
    color = tuple("red" if r else "blue" for r in red)
    return ColoringTrace(mode, color, tuple(active), tuple(qualifies), penalized)


def _qualify_flags(lg, red, active):
    return [
        active[i] and not red[i]
        and not any(active[j] and not red[j] for j in lg.out_arcs[i])
        for i in range(lg.node_count)
    ]


def _penalized_flags(lg, red, active):
    qual = _qualify_flags(lg, red, active)
    flags = [False] * lg.node_count
    for j in range(lg.node_count):
        if not (active[j] and not red[j]):
            continue
        ka, kb = lg.endpoints[j]
        hit_a = hit_b = False
        for i in lg.out_arcs[j]:
            if not qual[i]:
                continue
            if ka in lg.endpoints[i]:
                hit_a = True
            if kb in lg.endpoints[i]:
                hit_b = True
        flags[j] = hit_a and hit_b
    return tuple(flags)


@dataclass(frozen=True)
class EventProbabilities:
    active: np.ndarray
    qualifies: np.ndarray
    penalized: np.ndarray | None


def exact_event_probabilities(lg: LineGraph, p: float, mode: str,
                              limit: int = ENUMERATION_LIMIT) -> EventProbabilities:
    """Exact per-node event probabilities by full coloring enumeration.

    Every coloring is weighted p^{#red} (1-p)^{#blue}; colorings are grouped
    by red count, so the enumeration itself is independent of p.  The
    reduction order over colorings is fixed by index, hence deterministic.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    act_cnt, qual_cnt, pen_cnt, k = _event_counts(lg, mode, limit)
    cs = np.arange(k + 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        pw = np.where(cs == 0, 1.0, float(p) ** cs) * \
             np.where(k - cs == 0, 1.0, float(1.0 - p) ** (k - cs))
    active = act_cnt @ pw
    qualifies = qual_cnt @ pw
    penalized = pen_cnt @ pw if pen_cnt is not None else None
    return EventProbabilities(active, qualifies, penalized)


def _coloring_sweep(lg: LineGraph, mode: str, limit: int):
    """Replay the coloring process for every mask at once.

    Returns (k, red_nodes, act_set, qual_set) where each array holds one
    node-indexed bitset per mask; k is the number of colored items.
    """
    n = lg.node_count
    if mode == NODE:
        k = n
    elif mode == CLUSTER:
        if lg.cluster_of is None:
            raise ValueError("cluster mode requires a bipartite line graph")
        k = lg.cluster_count
    else:
        raise ValueError(f"unknown coloring mode {mode!r}")
    if k > limit:
        raise CapacityError(f"{k} colored items exceed enumeration limit {limit}")

    masks = np.arange(1 << k, dtype=np.uint32)
    in_bits = np.array([_bits(a) for a in lg.in_arcs], dtype=np.uint32)
    out_bits = np.array([_bits(a) for a in lg.out_arcs], dtype=np.uint32)

    if mode == NODE:
        red_nodes = masks
    else:
        red_nodes = np.zeros_like(masks)
        for i in range(n):
            bit = ((masks >> np.uint32(lg.cluster_of[i])) & np.uint32(1)).astype(bool)
            red_nodes |= np.where(bit, np.uint32(1 << i), np.uint32(0))
        colored = np.zeros_like(masks)

    act_set = np.zeros_like(masks)
    act_red = np.zeros_like(masks)
    for i in lg.topo:
        bit_i = np.uint32(1 << i)
        act = (act_red & in_bits[i]) == 0
        if mode == CLUSTER:
            cbit = np.uint32(1 << lg.cluster_of[i])
            act &= (colored & cbit) == 0
            colored |= np.where(act, cbit, np.uint32(0))
        act_set |= np.where(act, bit_i, np.uint32(0))
        red_i = (red_nodes & bit_i) != 0
        act_red |= np.where(act & red_i, bit_i, np.uint32(0))

    act_blue = act_set & ~red_nodes
    qual_set = np.zeros_like(masks)
    for i in range(n):
        bit_i = np.uint32(1 << i)
        q = ((act_blue & bit_i) != 0) & ((act_blue & out_bits[i]) == 0)
        qual_set |= np.where(q, bit_i, np.uint32(0))
    return k, red_nodes, act_set, qual_set


def active_table(lg: LineGraph, mode: str,
                 limit: int = ENUMERATION_LIMIT) -> np.ndarray:
    """active[mask, node] over every coloring mask (bulk replay_coloring)."""
    k, _, act_set, _ = _coloring_sweep(lg, mode, limit)
    n = lg.node_count
    out = np.zeros((1 << k, n), dtype=bool)
    for i in range(n):
        out[:, i] = (act_set & np.uint32(1 << i)) != 0
    return out


def qualifying_table(lg: LineGraph, mode: str,
                     limit: int = ENUMERATION_LIMIT) -> np.ndarray:
    """qualifies[mask, node] over every coloring mask."""
    k, _, _, qual_set = _coloring_sweep(lg, mode, limit)
    n = lg.node_count
    out = np.zeros((1 << k, n), dtype=bool)
    for i in range(n):
        out[:, i] = (qual_set & np.uint32(1 << i)) != 0
    return out


def _event_counts(lg: LineGraph, mode: str, limit: int):
    """Per-node counts of colorings, split by red count, where events hold."""
    n = lg.node_count
    k, red_nodes, act_set, qual_set = _coloring_sweep(lg, mode, limit)
    pop = np.bitwise_count(np.arange(1 << k, dtype=np.uint32)).astype(np.int64)
    act_blue = act_set & ~red_nodes

    act_cnt = np.zeros((n, k + 1), dtype=np.int64)
    qual_cnt = np.zeros((n, k + 1), dtype=np.int64)
    for i in range(n):
        bit_i = np.uint32(1 << i)
        act_cnt[i] = np.bincount(pop[(act_set & bit_i) != 0], minlength=k + 1)
        qual_cnt[i] = np.bincount(pop[(qual_set & bit_i) != 0], minlength=k + 1)

    pen_cnt = None
    if mode == NODE:
        pen_cnt = np.zeros((n, k + 1), dtype=np.int64)
        for j in range(n):
            ka, kb = lg.endpoints[j]
            side_a = _bits([i for i in lg.out_arcs[j] if ka in lg.endpoints[i]])
            side_b = _bits([i for i in lg.out_arcs[j] if kb in lg.endpoints[i]])
            bit_j = np.uint32(1 << j)
            pen = (((act_blue & bit_j) != 0)
                   & ((qual_set & np.uint32(side_a)) != 0)
                   & ((qual_set & np.uint32(side_b)) != 0))
            pen_cnt[j] = np.bincount(pop[pen], minlength=k + 1)
    return act_cnt, qual_cnt, pen_cnt, k


def _bits(ids) -> int:
    mask = 0
    for i in ids:
        mask |= 1 << i
    return mask


def stealing_assignment(lg: LineGraph, trace: ColoringTrace,
                        matched_ids: frozenset[int] | set[int]) -> dict[int, tuple[int, ...]]:
    """Map each output edge to the qualifying edges whose slot it took.

    An output edge steals a qualifying edge when the latter is missing from
    the output and the two intersect, the output edge being strictly heavier.
    """
    stolen: dict[int, list[int]] = {}
    for q in range(lg.node_count):
        if not trace.qualifies[q] or q in matched_ids:
            continue
        for j in lg.in_arcs[q]:
            if j in matched_ids:
                stolen.setdefault(j, []).append(q)
    return {j: tuple(sorted(v)) for j, v in stolen.items()}
