"""Sample-based online matching algorithms.

All of them share one scheme: a sample fixes a candidate edge per arriving
item (computed offline from the sample plus the arrival alone, never from
earlier online rounds), and the candidate is accepted iff it is still
feasible.  Variants: vertex arrivals driven by offline greedy, its
price-threshold twin, edge arrivals driven by offline greedy, and the
non-competitive variant that swaps greedy for an exact optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import BIPARTITE, Instance, Matching, edge_order, mask_members
from .solvers import greedy_matching, greedy_on_vertex_subset

OPT_TIE_TOL = 1e-9


def candidate_of_vertex(inst: Instance, sample_mask: int, u: int) -> int | None:
    """The edge at u in the greedy matching over sample-plus-u, if any."""
    matched = greedy_on_vertex_subset(inst, sample_mask | (1 << u))
    for eid in matched.edge_ids:
        if inst.edges[eid][0] == u:
            return eid
    return None


def compute_candidates_vertex(inst: Instance, sample_mask: int) -> dict[int, int | None]:
    """Candidate edge per online (non-sample) left vertex; None = no candidate."""
    if inst.kind != BIPARTITE:
        raise ValueError("vertex-arrival candidates require a bipartite instance")
    return {u: candidate_of_vertex(inst, sample_mask, u)
            for u in range(inst.left_size) if not (sample_mask >> u) & 1}


def _check_order(order, online_ids) -> None:
    if sorted(order) != sorted(online_ids):
        raise ValueError("arrival order must be a permutation of the online items")


def run_vertex_arrival(inst: Instance, sample_mask: int, order,
                       per_round: bool = False) -> Matching:
    """Greedy-based vertex arrivals: accept u's candidate iff its right
    vertex is still free.

    ``per_round=True`` recomputes each candidate at arrival time instead of
    once upfront; the results are identical because candidates depend only on
    the sample and the arriving vertex (kept for differential testing).
    """
    online = [u for u in range(inst.left_size) if not (sample_mask >> u) & 1]
    _check_order(order, online)
    candidates = None if per_round else compute_candidates_vertex(inst, sample_mask)
    taken_right: set[int] = set()
    picked = []
    for u in order:
        eid = (candidate_of_vertex(inst, sample_mask, u) if per_round
               else candidates[u])
        if eid is None:
            continue
        r = inst.edges[eid][1]
        if r not in taken_right:
            taken_right.add(r)
            picked.append(eid)
    return Matching.from_ids(inst, picked)


@dataclass(frozen=True)
class ThresholdMap:
    """Per right-vertex price: the weight of its edge in greedy-on-sample.

    ``edge_ids`` keeps the threshold edge itself so comparisons can use the
    strict edge order rather than raw weights; an unmatched right vertex has
    price 0 and no edge, which every edge beats.
    """

    prices: tuple[float, ...]
    edge_ids: tuple[int | None, ...]


def price_thresholds(inst: Instance, sample_mask: int) -> ThresholdMap:
    if inst.kind != BIPARTITE:
        raise ValueError("price thresholds require a bipartite instance")
    prices = [0.0] * inst.right_size
    ids: list[int | None] = [None] * inst.right_size
    for eid in greedy_on_vertex_subset(inst, sample_mask).edge_ids:
        _, r, w = inst.edges[eid]
        prices[r] = w
        ids[r] = eid
    return ThresholdMap(tuple(prices), tuple(ids))


def threshold_candidate(inst: Instance, thresholds: ThresholdMap, u: int) -> int | None:
    """Heaviest edge at u that strictly beats its right vertex's threshold."""
    order = edge_order(inst)
    best = None
    for eid, (a, r, _) in enumerate(inst.edges):
        if a != u:
            continue
        t = thresholds.edge_ids[r]
        if t is not None and not order.heavier(eid, t):
            continue
        if best is None or order.heavier(eid, best):
            best = eid
    return best


def run_vertex_arrival_thresholded(inst: Instance, sample_mask: int, order) -> Matching:
    """Price-threshold twin of ``run_vertex_arrival``; same output matching."""
    online = [u for u in range(inst.left_size) if not (sample_mask >> u) & 1]
    _check_order(order, online)
    thresholds = price_thresholds(inst, sample_mask)
    taken_right: set[int] = set()
    picked = []
    for u in order:
        eid = threshold_candidate(inst, thresholds, u)
        if eid is None:
            continue
        r = inst.edges[eid][1]
        if r not in taken_right:
            taken_right.add(r)
            picked.append(eid)
    return Matching.from_ids(inst, picked)


def edge_is_candidate(inst: Instance, sample_mask: int, eid: int) -> bool:
    return eid in greedy_matching(inst, sample_mask | (1 << eid)).edge_ids


def compute_candidates_edge(inst: Instance, sample_mask: int) -> frozenset[int]:
    """Online edges that survive greedy on sample-plus-self."""
    return frozenset(e for e in range(inst.m)
                     if not (sample_mask >> e) & 1
                     and edge_is_candidate(inst, sample_mask, e))


def run_edge_arrival(inst: Instance, sample_mask: int, order,
                     per_round: bool = False) -> Matching:
    """Greedy-based edge arrivals: accept a candidate iff both endpoints free."""
    online = [e for e in range(inst.m) if not (sample_mask >> e) & 1]
    _check_order(order, online)
    candidates = None if per_round else compute_candidates_edge(inst, sample_mask)
    used: set[int] = set()
    picked = []
    for eid in order:
        is_cand = (edge_is_candidate(inst, sample_mask, eid) if per_round
                   else eid in candidates)
        if not is_cand:
            continue
        a, b = inst.endpoint_keys(eid)
        if a not in used and b not in used:
            used.add(a)
            used.add(b)
            picked.append(eid)
    return Matching.from_ids(inst, picked)


def _left_submatrix(inst: Instance, left_ids: list[int]):
    nr = inst.right_size
    weights = np.zeros((len(left_ids), nr))
    pos = {u: i for i, u in enumerate(left_ids)}
    for a, b, w in inst.edges:
        if a in pos:
            weights[pos[a], b] = w
    return weights


def _assignment_value(weights: np.ndarray) -> float:
    if weights.size == 0:
        return 0.0
    rows, cols = linear_sum_assignment(weights, maximize=True)
    return float(weights[rows, cols].sum())


def opt_candidate(inst: Instance, sample_mask: int, u: int) -> int | None:
    """u's edge under the exact-optimum candidate rule.

    Among maximum-weight matchings of the sample-plus-u subgraph, ties are
    broken toward u's smallest-id edge that some maximum matching contains
    (weights compared within 1e-9).
    """
    left_ids = sorted(set(mask_members(sample_mask)) | {u})
    weights = _left_submatrix(inst, left_ids)
    best = _assignment_value(weights)
    tol = OPT_TIE_TOL * max(1.0, abs(best))
    row = left_ids.index(u)
    for eid, (a, r, w) in enumerate(inst.edges):
        if a != u:
            continue
        forced = weights.copy()
        forced[row, :] = 0.0
        forced[:, r] = 0.0
        if w + _assignment_value(forced) >= best - tol:
            return eid
    return None


def compute_candidates_optbased(inst: Instance, sample_mask: int) -> dict[int, int | None]:
    if inst.kind != BIPARTITE:
        raise ValueError("opt-based candidates require a bipartite instance")
    return {u: opt_candidate(inst, sample_mask, u)
            for u in range(inst.left_size) if not (sample_mask >> u) & 1}


def run_vertex_arrival_optbased(inst: Instance, sample_mask: int, order) -> Matching:
    """Vertex arrivals with greedy replaced by an exact maximum matching."""
    online = [u for u in range(inst.left_size) if not (sample_mask >> u) & 1]
    _check_order(order, online)
    taken_right: set[int] = set()
    picked = []
    for u in order:
        eid = opt_candidate(inst, sample_mask, u)
        if eid is None:
            continue
        r = inst.edges[eid][1]
        if r not in taken_right:
            taken_right.add(r)
            picked.append(eid)
    return Matching.from_ids(inst, picked)
