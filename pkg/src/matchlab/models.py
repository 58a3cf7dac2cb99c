"""The four online models: sampling, adversary orders, batched environments,
and the reduction from order-oblivious algorithms to the two-faced model.

Randomness flows through counter-based streams keyed by (seed, *path), so a
draw is reproducible regardless of execution interleaving or worker count.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .graph import BIPARTITE, Instance, Matching, edge_order, mask_members
from .online import run_edge_arrival
from .solvers import CapacityError

BRUTE_WORST_LIMIT = 8

SQRT2 = math.sqrt(2.0)


class ContractViolation(RuntimeError):
    """A wrapped online algorithm accepted an infeasible element set."""


def rng_stream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator keyed by (seed, *path)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SampleDraw:
    mask: int
    p: float
    stream: tuple[int, ...]


def draw_sample(item_count: int, p: float, rng: np.random.Generator) -> int:
    """Independent Bernoulli(p) inclusion per item, as a bitmask.

    This per-item form is the canonical sampling phase throughout: it is
    distributionally identical to drawing k ~ Binom(n, p) and taking the
    first k items of a uniform arrival order.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if item_count == 0:
        return 0
    hits = rng.random(item_count) < p
    return int(sum(1 << i for i in range(item_count) if hits[i]))


def worst_order_vertex(inst: Instance, candidates: dict[int, int | None]) -> tuple[int, ...]:
    """Arrival order making each right vertex see its lightest candidate first.

    Vertices holding candidates come first, lightest candidate edge first
    (strictly, via the edge order); candidate-less vertices follow by id.
    Because every vertex holds at most one candidate, this realizes the
    per-right-vertex worst case simultaneously.
    """
    rank = edge_order(inst).rank
    with_cand = sorted((u for u, e in candidates.items() if e is not None),
                       key=lambda u: -rank[candidates[u]])
    without = sorted(u for u, e in candidates.items() if e is None)
    return tuple(with_cand + without)


def order_edge(inst: Instance, sample_mask: int, candidates: frozenset[int],
               policy: str, rng: np.random.Generator | None = None,
               limit: int = BRUTE_WORST_LIMIT) -> tuple[int, ...]:
    """Arrival order over online edges under a fixed adversary policy.

    Policies: "ascending" (lightest first), "descending", "random", and
    "brute_worst" which exhaustively minimizes the realized matching weight
    (factorial search, capped at ``limit`` online edges).
    """
    online = [e for e in range(inst.m) if not (sample_mask >> e) & 1]
    rank = edge_order(inst).rank
    if policy == "ascending":
        return tuple(sorted(online, key=lambda e: -rank[e]))
    if policy == "descending":
        return tuple(sorted(online, key=lambda e: rank[e]))
    if policy == "random":
        if rng is None:
            raise ValueError("random policy needs an rng")
        perm = list(online)
        rng.shuffle(perm)
        return tuple(int(e) for e in perm)
    if policy == "brute_worst":
        if len(online) > limit:
            raise CapacityError(
                f"{len(online)} online edges exceed brute_worst limit {limit}")
        best_order = tuple(online)
        best_w = math.inf
        for perm in itertools.permutations(online):
            w = run_edge_arrival(inst, sample_mask, perm).total_weight
            if w < best_w:
                best_w = w
                best_order = perm
        return best_order
    raise ValueError(f"unknown edge order policy {policy!r}")


def worst_edge_outcome(inst: Instance, candidates: frozenset[int]) -> float:
    """Minimum realized weight over all arrival orders of the online edges.

    The outcomes reachable by arrival orders are exactly the maximal
    matchings of the candidate subgraph (a candidate with both endpoints
    free on arrival is always taken), so the worst order realizes the
    minimum-weight maximal matching.  Computed by branching on the first
    uncovered candidate, memoized on the used-vertex set.
    """
    cand = sorted(candidates)
    ends = [inst.endpoint_keys(e) for e in cand]
    keys = sorted({k for ab in ends for k in ab})
    pos = {k: i for i, k in enumerate(keys)}
    vbits = [(1 << pos[a]) | (1 << pos[b]) for a, b in ends]
    weights = [inst.weight(e) for e in cand]
    memo: dict[int, float] = {}

    def go(used: int) -> float:
        if used in memo:
            return memo[used]
        first = None
        for i, vb in enumerate(vbits):
            if not vb & used:
                first = i
                break
        if first is None:
            memo[used] = 0.0
            return 0.0
        best = math.inf
        fb = vbits[first]
        for i, vb in enumerate(vbits):
            if vb & used or not vb & fb:
                continue
            best = min(best, weights[i] + go(used | vb))
        memo[used] = best
        return best

    return go(0)


def aosp_keep_probability(p: float, arrival: str) -> float:
    """Probability of keeping a history item in the algorithm's sample.

    1.0 up to the model's threshold (1/2 for vertex arrivals, 1/sqrt(2) for
    edge arrivals); beyond it, history is subsampled so the effective
    sampling rate falls back to the threshold.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if arrival == "vertex":
        return 1.0 if p <= 0.5 else (1.0 - p) / p
    if arrival == "edge":
        return 1.0 if p <= 1.0 / SQRT2 else (1.0 + SQRT2) * (1.0 - p) / p
    raise ValueError(f"unknown arrival kind {arrival!r}")


@dataclass(frozen=True)
class AospDraw:
    history_mask: int     # items revealed upfront
    sample_mask: int      # subset of history actually used as the sample
    online_mask: int      # complement of history; arrives adversarially
    p: float
    keep_probability: float
    arrival: str


def aosp_prepare(inst: Instance, p: float, rng: np.random.Generator,
                 arrival: str) -> AospDraw:
    """Draw a history set, subsample it if p is past the threshold, and name
    the online set the benchmark optimum is taken over."""
    n = inst.left_size if arrival == "vertex" else inst.m
    if arrival == "vertex" and inst.kind != BIPARTITE:
        raise ValueError("vertex arrivals require a bipartite instance")
    keep = aosp_keep_probability(p, arrival)
    history = draw_sample(n, p, rng)
    if keep >= 1.0:
        sample = history
    else:
        sample = 0
        for i in mask_members(history):
            if rng.random() < keep:
                sample |= 1 << i
    online = ~history & ((1 << n) - 1)
    return AospDraw(history, sample, online, p, keep, arrival)


@dataclass(eq=False)
class BatchedEnvironment:
    """Universe of elements, a partition into items, and a feasibility oracle."""

    universe_size: int
    items: tuple[tuple[int, ...], ...]
    feasible: Callable[[frozenset[int]], bool]

    def __post_init__(self):
        flat = [e for item in self.items for e in item]
        if sorted(flat) != list(range(self.universe_size)):
            raise ValueError("items must partition the element universe")


def matching_environment(inst: Instance, arrival: str) -> BatchedEnvironment:
    """Edges as the universe, feasibility = vertex-disjointness; items are
    per-left-vertex bundles (vertex arrivals) or singleton edges."""

    def feasible(ids: frozenset[int]) -> bool:
        used = set()
        for eid in ids:
            a, b = inst.endpoint_keys(eid)
            if a in used or b in used:
                return False
            used.add(a)
            used.add(b)
        return True

    if arrival == "vertex":
        if inst.kind != BIPARTITE:
            raise ValueError("vertex arrivals require a bipartite instance")
        bundles: list[list[int]] = [[] for _ in range(inst.left_size)]
        for eid, (a, _, _) in enumerate(inst.edges):
            bundles[a].append(eid)
        items = tuple(tuple(b) for b in bundles)
    elif arrival == "edge":
        items = tuple((e,) for e in range(inst.m))
    else:
        raise ValueError(f"unknown arrival kind {arrival!r}")
    return BatchedEnvironment(inst.m, items, feasible)


@dataclass(eq=False)
class TwoFacedInstance:
    """Per item, the adversary's pair of weight vectors over its elements."""

    environment: BatchedEnvironment
    faces: tuple[tuple[tuple[float, ...], tuple[float, ...]], ...]

    def __post_init__(self):
        if len(self.faces) != len(self.environment.items):
            raise ValueError("one face pair per item is required")
        for item, (f1, f2) in zip(self.environment.items, self.faces):
            if len(f1) != len(item) or len(f2) != len(item):
                raise ValueError("face vector length must match item size")
            if any(w < 0 or not math.isfinite(w) for w in (*f1, *f2)):
                raise ValueError("face weights must be finite and non-negative")

    @property
    def item_count(self) -> int:
        return len(self.environment.items)


def iid_pair_wrapper(samplers: Sequence[Callable[[np.random.Generator], Sequence[float]]],
                     env: BatchedEnvironment,
                     rng: np.random.Generator) -> TwoFacedInstance:
    """Draw two independent faces per item from its distribution sampler.

    Two-faced guarantees then carry over to the single-sample batched
    prophet inequality for those per-item distributions.
    """
    faces = []
    for sampler in samplers:
        f1 = tuple(float(x) for x in sampler(rng))
        f2 = tuple(float(x) for x in sampler(rng))
        faces.append((f1, f2))
    return TwoFacedInstance(env, tuple(faces))


class GreedyVertexOnline:
    """Order-oblivious greedy-based runner over a vertex-arrival environment.

    Exposes the protocol the two-faced reduction needs: a sampling-phase
    length draw, sample consumption, and per-arrival accept/reject.  All
    decisions use only the sample and the arriving item, with observed
    weights (the sample may mix faces freely).
    """

    def __init__(self, inst: Instance, p: float):
        if inst.kind != BIPARTITE:
            raise ValueError("vertex arrivals require a bipartite instance")
        self.inst = inst
        self.p = p
        self.sample: list[tuple[int, tuple[float, ...]]] = []
        self.taken_right: set[int] = set()

    def sample_length(self, n_items: int, rng: np.random.Generator) -> int:
        return int(rng.binomial(n_items, self.p))

    def observe_sample(self, item: int, weights: tuple[float, ...]) -> None:
        self.sample.append((item, weights))

    def arrive(self, item: int, weights: tuple[float, ...]) -> tuple[int, ...]:
        candidate = self._candidate(item, weights)
        if candidate is None:
            return ()
        r = self.inst.edges[candidate][1]
        if r in self.taken_right:
            return ()
        self.taken_right.add(r)
        return (candidate,)

    def _candidate(self, item: int, weights: tuple[float, ...]) -> int | None:
        # offline greedy over sampled bundles plus the arrival, observed weights
        pool: list[tuple[float, int, int, int]] = []
        for u, wvec in self.sample + [(item, weights)]:
            a = u
            for eid, w in self._bundle(a, wvec):
                pool.append((-w, eid, a, self.inst.edges[eid][1]))
        pool.sort()
        used_left: set[int] = set()
        used_right: set[int] = set()
        for negw, eid, a, b in pool:
            if a in used_left or b in used_right:
                continue
            used_left.add(a)
            used_right.add(b)
            if a == item:
                return eid
        return None

    def _bundle(self, left: int, wvec: tuple[float, ...]):
        eids = [eid for eid, (a, _, _) in enumerate(self.inst.edges) if a == left]
        return list(zip(eids, wvec, strict=True))


def greedy_vertex_factory(inst: Instance, p: float) -> Callable[[], GreedyVertexOnline]:
    return lambda: GreedyVertexOnline(inst, p)


class GreedyEdgeOnline:
    """Order-oblivious greedy-based runner over an edge-arrival environment
    (singleton items); same protocol as ``GreedyVertexOnline``."""

    def __init__(self, inst: Instance, p: float):
        self.inst = inst
        self.p = p
        self.sample: list[tuple[int, float]] = []   # (edge id, observed weight)
        self.used_keys: set[int] = set()

    def sample_length(self, n_items: int, rng: np.random.Generator) -> int:
        return int(rng.binomial(n_items, self.p))

    def observe_sample(self, item: int, weights: tuple[float, ...]) -> None:
        self.sample.append((item, weights[0]))

    def arrive(self, item: int, weights: tuple[float, ...]) -> tuple[int, ...]:
        if not self._is_candidate(item, weights[0]):
            return ()
        a, b = self.inst.endpoint_keys(item)
        if a in self.used_keys or b in self.used_keys:
            return ()
        self.used_keys.update((a, b))
        return (item,)

    def _is_candidate(self, item: int, weight: float) -> bool:
        pool = sorted(self.sample + [(item, weight)],
                      key=lambda ew: (-ew[1], ew[0]))
        used: set[int] = set()
        for eid, _ in pool:
            a, b = self.inst.endpoint_keys(eid)
            if a in used or b in used:
                continue
            used.update((a, b))
            if eid == item:
                return True
        return False


def greedy_edge_factory(inst: Instance, p: float) -> Callable[[], GreedyEdgeOnline]:
    return lambda: GreedyEdgeOnline(inst, p)


def run_two_faced_reduction(tf: TwoFacedInstance, make_run: Callable[[], object],
                            adversary, rng: np.random.Generator) -> Matching:
    """Feed a fresh order-oblivious run a fake sampling phase, then stream the
    online faces adversarially, skipping items already used as sample.

    ``adversary`` is either an order policy name ("ascending" by item id,
    "descending", "random") or a callable (online_items, s, w) -> order; it
    may inspect both realized face assignments.  Returns the accepted
    elements weighted by their online faces.
    """
    n = tf.item_count
    env = tf.environment
    coins = [int(rng.integers(0, 2)) for _ in range(n)]
    s = [tf.faces[i][coins[i]] for i in range(n)]
    w = [tf.faces[i][1 - coins[i]] for i in range(n)]

    run = make_run()
    k = run.sample_length(n, rng)
    if not 0 <= k <= n:
        raise ContractViolation(f"sampling-phase length {k} out of range")
    perm = [int(j) for j in rng.permutation(n)]
    sample_idx = set(perm[:k])
    for j in perm[:k]:
        run.observe_sample(j, s[j])

    order = _adversary_order(adversary, list(range(n)), s, w, rng)
    accepted: set[int] = set()
    total = 0.0
    for i in order:
        if i in sample_idx:
            continue  # the index has already been consumed as sample
        got = tuple(run.arrive(i, w[i]))
        if any(e not in env.items[i] for e in got):
            raise ContractViolation("accepted element outside the arriving item")
        accepted |= set(got)
        if not env.feasible(frozenset(accepted)):
            raise ContractViolation("accepted set became infeasible")
        elem_pos = {e: t for t, e in enumerate(env.items[i])}
        total += sum(w[i][elem_pos[e]] for e in got)
    return Matching(frozenset(accepted), total)


def _adversary_order(adversary, items, s, w, rng):
    if callable(adversary):
        order = list(adversary(items, s, w))
        if sorted(order) != sorted(items):
            raise ValueError("adversary returned a non-permutation")
        return order
    if adversary == "ascending":
        return items
    if adversary == "descending":
        return items[::-1]
    if adversary == "random":
        return [items[int(i)] for i in rng.permutation(len(items))]
    raise ValueError(f"unknown adversary policy {adversary!r}")
