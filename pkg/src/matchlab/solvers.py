"""Offline solvers: greedy matching and exact maximum-weight matching.

Bipartite optima use the O(n^3) assignment method (scipy); general graphs use
a dynamic program over vertex subsets, capped at ``GENERAL_EXACT_LIMIT``
vertices.  Large instances must carry an ``opt_certificate`` to be usable as
benchmarks (see ``optimum_weight``).
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import (BIPARTITE, GENERAL, Instance, Matching, edge_order,
                    full_mask, mask_members)

GENERAL_EXACT_LIMIT = 22
CERTIFICATE_TOL = 1e-9


class CapacityError(RuntimeError):
    """An exact computation exceeds its configured enumeration limit."""


def greedy_matching(inst: Instance, allowed_edges: int | None = None) -> Matching:
    """Scan edges heaviest-first and keep every edge whose endpoints are free.

    ``allowed_edges`` is an edge-id bitmask restricting the scan; None means
    all edges.  Deterministic: ties are already broken by the edge order.
    """
    order = edge_order(inst).order
    used: set[int] = set()
    picked = []
    for eid in order:
        if allowed_edges is not None and not (allowed_edges >> eid) & 1:
            continue
        a, b = inst.endpoint_keys(eid)
        if a in used or b in used:
            continue
        used.add(a)
        used.add(b)
        picked.append(eid)
    return Matching.from_ids(inst, picked)


def greedy_on_vertex_subset(inst: Instance, left_mask: int) -> Matching:
    """Greedy on the subgraph induced by left vertices in ``left_mask``.

    Bipartite only; the whole right side is always present.
    """
    if inst.kind != BIPARTITE:
        raise ValueError("greedy_on_vertex_subset requires a bipartite instance")
    allowed = 0
    for eid, (a, _, _) in enumerate(inst.edges):
        if (left_mask >> a) & 1:
            allowed |= 1 << eid
    return greedy_matching(inst, allowed)


def _assignment_matching(inst: Instance, allowed_edges: int | None,
                         left_mask: int | None) -> Matching:
    nl, nr = inst.left_size, inst.right_size
    weights = np.zeros((nl, nr))
    eids = np.full((nl, nr), -1, dtype=np.int64)
    for eid, (a, b, w) in enumerate(inst.edges):
        if allowed_edges is not None and not (allowed_edges >> eid) & 1:
            continue
        if left_mask is not None and not (left_mask >> a) & 1:
            continue
        weights[a, b] = w
        eids[a, b] = eid
    if nl == 0 or nr == 0:
        return Matching.empty()
    rows, cols = linear_sum_assignment(weights, maximize=True)
    picked = [int(eids[r, c]) for r, c in zip(rows, cols) if eids[r, c] >= 0]
    return Matching.from_ids(inst, picked)


def _subset_dp_matching(inst: Instance, allowed_edges: int | None) -> Matching:
    n = inst.vertex_count
    adj: list[list[tuple[int, int, float]]] = [[] for _ in range(n)]
    for eid, (a, b, w) in enumerate(inst.edges):
        if allowed_edges is not None and not (allowed_edges >> eid) & 1:
            continue
        adj[min(a, b)].append((max(a, b), eid, w))
    # best[S] = max matching weight among vertices not in S (S = used set)
    size = 1 << n
    best = [0.0] * size
    for s in range(size - 1, -1, -1):
        free = ~s & (size - 1)
        if free == 0:
            continue
        v = (free & -free).bit_length() - 1
        val = best[s | (1 << v)]
        for u, _, w in adj[v]:
            if not (s >> u) & 1:
                cand = w + best[s | (1 << v) | (1 << u)]
                if cand > val:
                    val = cand
        best[s] = val
    # reconstruct one optimal edge set
    picked = []
    s = 0
    while True:
        free = ~s & (size - 1)
        if free == 0:
            break
        v = (free & -free).bit_length() - 1
        if best[s] == best[s | (1 << v)]:
            s |= 1 << v
            continue
        for u, eid, w in adj[v]:
            if not (s >> u) & 1 and best[s] == w + best[s | (1 << v) | (1 << u)]:
                picked.append(eid)
                s |= (1 << v) | (1 << u)
                break
        else:  # float noise fallback: leave v unmatched
            s |= 1 << v
    return Matching.from_ids(inst, picked)


def max_weight_matching(inst: Instance, allowed_edges: int | None = None,
                        limit: int = GENERAL_EXACT_LIMIT) -> Matching:
    """Exact maximum-weight matching, optionally restricted to an edge mask.

    Raises CapacityError for general instances beyond ``limit`` vertices.  If
    the instance carries an optimum certificate and the full edge set is used,
    the solved weight is asserted to match it within 1e-9.
    """
    if inst.kind == BIPARTITE:
        result = _assignment_matching(inst, allowed_edges, None)
    else:
        if inst.vertex_count > limit:
            raise CapacityError(
                f"general instance with {inst.vertex_count} vertices exceeds "
                f"exact-solver limit {limit}")
        result = _subset_dp_matching(inst, allowed_edges)
    if inst.opt_certificate is not None and allowed_edges is None:
        if abs(result.total_weight - inst.opt_certificate) > CERTIFICATE_TOL:
            raise AssertionError(
                f"solver weight {result.total_weight!r} disagrees with "
                f"certificate {inst.opt_certificate!r}")
    return result


def max_weight_on_left_subset(inst: Instance, left_mask: int) -> Matching:
    """Maximum-weight matching of the left-induced subgraph (bipartite)."""
    if inst.kind != BIPARTITE:
        raise ValueError("left-subset optimum requires a bipartite instance")
    return _assignment_matching(inst, None, left_mask)


def optimum_weight(inst: Instance, limit: int = GENERAL_EXACT_LIMIT) -> float:
    """Benchmark OPT weight; falls back to the certificate when too large."""
    if inst.kind == GENERAL and inst.vertex_count > limit:
        if inst.opt_certificate is not None:
            return inst.opt_certificate
        raise CapacityError(
            f"general instance with {inst.vertex_count} vertices exceeds "
            f"exact-solver limit {limit} and carries no certificate")
    return max_weight_matching(inst, limit=limit).total_weight


def greedy_is_maximal(inst: Instance, matching: Matching,
                      allowed_edges: int | None = None) -> bool:
    """True iff no allowed edge has both endpoints free (testing helper)."""
    used = set()
    for eid in matching.edge_ids:
        a, b = inst.endpoint_keys(eid)
        used.add(a)
        used.add(b)
    edges = range(inst.m) if allowed_edges is None else mask_members(allowed_edges)
    for eid in edges:
        a, b = inst.endpoint_keys(eid)
        if a not in used and b not in used:
            return False
    return True
