"""Exact and Monte Carlo competitive-ratio estimation, and the closed-form
theoretical curves the measurements are checked against.

Exact mode enumerates every sample realization (the mask space is swept and
reduced in fixed index order, so results are deterministic); Monte Carlo mode
draws each trial from its own counter-based RNG stream and reduces into an
index-ordered array, so results are bit-identical for a fixed (seed, trials)
regardless of worker count (capped by MATCHLAB_THREADS).
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .graph import BIPARTITE, Instance, edge_order, full_mask, mask_members
from .models import (GreedyEdgeOnline, GreedyVertexOnline, TwoFacedInstance,
                     aosp_keep_probability, matching_environment, order_edge,
                     rng_stream, run_two_faced_reduction, worst_edge_outcome,
                     worst_order_vertex)
from .online import (compute_candidates_edge, compute_candidates_optbased,
                     compute_candidates_vertex, run_edge_arrival)
from .solvers import CapacityError, max_weight_matching, optimum_weight

ENUMERATION_LIMIT = 20

MODELS = ("random-order", "aosp", "two-faced")
ARRIVALS = ("vertex", "edge")
ALGORITHMS = ("greedy-based", "thresholded", "opt-based")

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
INV_SQRT2 = 1.0 / math.sqrt(2.0)

CSV_HEADER = ("model,arrival,algorithm,p,mode,trials,seed,"
              "e_alg,benchmark,ratio,std_error,instance_id")


def theoretical_curve(model: str, arrival: str, p: float) -> float:
    """Closed-form competitive-ratio lower bound of the greedy-based
    algorithm in the given model; the two-faced value equals the random-order
    one because the reduction preserves it."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if arrival not in ARRIVALS:
        raise ValueError(f"unknown arrival kind {arrival!r}")
    if model == "two-faced":
        model = "random-order"
    if model == "random-order":
        if arrival == "vertex":
            return p * (1.0 - p) / (1.0 + p)
        if p <= GOLDEN:
            return p * p * (1.0 - p) / 2.0
        return (1.0 - p) * (2.0 * p - 1.0) / (2.0 * p)
    if model == "aosp":
        if arrival == "vertex":
            return p * (1.0 - p) if p <= 0.5 else 0.25
        if p <= 1.0 / 3.0:
            return p * p / 2.0
        if p <= 0.5:
            return p * (1.0 - p) / 4.0
        if p <= GOLDEN:
            return p * p * (1.0 - p) / 2.0
        if p <= INV_SQRT2:
            return (1.0 - p) * (2.0 * p - 1.0) / (2.0 * p)
        return 1.5 - math.sqrt(2.0)
    raise ValueError(f"unknown model {model!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    arrival: str
    p: float
    algorithm: str = "greedy-based"
    adversary: str = "worst"
    mode: str = "exact"
    trials: int = 0
    seed: int = 0
    enumeration_limit: int = ENUMERATION_LIMIT
    second_face: tuple[float, ...] | None = None  # per-edge online face (two-faced)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.arrival not in ARRIVALS:
            raise ValueError(f"unknown arrival kind {self.arrival!r}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        if self.algorithm == "opt-based" and self.arrival != "vertex":
            raise ValueError("the opt-based algorithm only supports vertex arrivals")
        if self.mode not in ("exact", "monte-carlo"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "monte-carlo" and self.trials < 1:
            raise ValueError("monte-carlo mode needs trials >= 1")


@dataclass(frozen=True)
class RatioEstimate:
    e_alg: float
    benchmark: float
    ratio: float
    std_error: float
    trials: int
    seed: int


def _ratio(e_alg: float, benchmark: float) -> float:
    if benchmark == 0.0:
        return math.nan if e_alg == 0.0 else math.inf
    return e_alg / benchmark


def _exact_estimate(e_alg: float, benchmark: float, seed: int) -> RatioEstimate:
    return RatioEstimate(e_alg, benchmark, _ratio(e_alg, benchmark), 0.0, 0, seed)


def _estimate_from_trials(alg: np.ndarray, bench: np.ndarray | float,
                          seed: int) -> RatioEstimate:
    t = len(alg)
    e_alg = float(np.mean(alg))
    if isinstance(bench, np.ndarray):
        benchmark = float(np.mean(bench))
        ratio = _ratio(e_alg, benchmark)
        if t > 1 and benchmark != 0.0 and math.isfinite(ratio):
            cov = np.cov(alg, bench, ddof=1)
            var = (cov[0, 0] + ratio * ratio * cov[1, 1]
                   - 2.0 * ratio * cov[0, 1]) / t
            se = math.sqrt(max(var, 0.0)) / benchmark
        else:
            se = math.nan
    else:
        benchmark = float(bench)
        ratio = _ratio(e_alg, benchmark)
        se = (float(np.std(alg, ddof=1)) / math.sqrt(t) / benchmark
              if t > 1 and benchmark != 0.0 else 0.0)
    return RatioEstimate(e_alg, benchmark, ratio, se, t, seed)


def csv_row(config: ExperimentConfig, est: RatioEstimate, instance_id: str) -> str:
    fields = [config.model, config.arrival, config.algorithm,
              f"{config.p:.10g}", config.mode, str(est.trials), str(est.seed),
              f"{est.e_alg:.12g}", f"{est.benchmark:.12g}", f"{est.ratio:.12g}",
              f"{est.std_error:.12g}", instance_id]
    return ",".join(fields)


# ---------------------------------------------------------------------------
# exact enumeration over sample masks
# ---------------------------------------------------------------------------

def _mask_probs(n: int, p: float) -> np.ndarray:
    """Pr of each of the 2^n Bernoulli(p) masks, indexed by mask value."""
    pop = np.bitwise_count(np.arange(1 << n, dtype=np.uint32)).astype(np.int64)
    cs = np.arange(n + 1)
    with np.errstate(divide="ignore"):
        pw = np.where(cs == 0, 1.0, float(p) ** cs) * \
             np.where(n - cs == 0, 1.0, float(1.0 - p) ** (n - cs))
    return pw[pop]


def left_subset_greedy(inst: Instance, limit: int = ENUMERATION_LIMIT) -> np.ndarray:
    """Greedy weight on every left-vertex sample mask, vectorized over masks."""
    if inst.kind != BIPARTITE:
        raise ValueError("left-subset enumeration requires a bipartite instance")
    nl = inst.left_size
    if nl > limit:
        raise CapacityError(f"{nl} left vertices exceed enumeration limit {limit}")
    size = 1 << nl
    masks = np.arange(size, dtype=np.uint32)
    used_l = np.zeros(size, dtype=np.uint32)
    used_r = np.zeros(size, dtype=np.uint64)
    weights = np.zeros(size)
    for eid in edge_order(inst).order:
        a, b, w = inst.edges[eid]
        take = (((masks >> np.uint32(a)) & 1) != 0)
        take &= (used_l & np.uint32(1 << a)) == 0
        take &= (used_r & np.uint64(1 << b)) == 0
        used_l |= np.where(take, np.uint32(1 << a), np.uint32(0))
        used_r |= np.where(take, np.uint64(1 << b), np.uint64(0))
        weights += w * take
    return weights


def edge_subset_scan(inst: Instance, limit: int = ENUMERATION_LIMIT):
    """For every edge sample mask: the greedy weight on the mask, and the
    per-edge membership of each edge in greedy-on-mask-plus-self.

    Membership falls out of the same scan: an edge joins greedy on
    mask-plus-self iff both its endpoints are still free when its rank comes
    up, and inserting the edge cannot disturb the processing of heavier ones.
    """
    m = inst.m
    if m > limit:
        raise CapacityError(f"{m} edges exceed enumeration limit {limit}")
    if inst.vertex_count > 64:
        raise CapacityError("edge enumeration supports at most 64 vertices")
    size = 1 << m
    masks = np.arange(size, dtype=np.uint32)
    used = np.zeros(size, dtype=np.uint64)
    weights = np.zeros(size)
    member = np.zeros((size, m), dtype=bool)
    for eid in edge_order(inst).order:
        a, b = inst.endpoint_keys(eid)
        w = inst.weight(eid)
        vb = np.uint64((1 << a) | (1 << b))
        free = (used & vb) == 0
        member[:, eid] = free
        take = free & (((masks >> np.uint32(eid)) & 1) != 0)
        used |= np.where(take, vb, np.uint64(0))
        weights += w * take
    return weights, member


def vertex_membership_table(inst: Instance, limit: int = 16) -> np.ndarray:
    """member[mask, e] = e belongs to greedy on sample ``mask`` plus e's own
    left vertex, for every left-vertex sample mask."""
    if inst.kind != BIPARTITE:
        raise ValueError("vertex membership requires a bipartite instance")
    nl = inst.left_size
    if nl > limit:
        raise CapacityError(f"{nl} left vertices exceed membership-table limit {limit}")
    size = 1 << nl
    masks = np.arange(size, dtype=np.uint32)
    member = np.zeros((size, inst.m), dtype=bool)
    for u in range(nl):
        present = masks | np.uint32(1 << u)
        used_l = np.zeros(size, dtype=np.uint32)
        used_r = np.zeros(size, dtype=np.uint64)
        for eid in edge_order(inst).order:
            a, b, _ = inst.edges[eid]
            take = (((present >> np.uint32(a)) & 1) != 0)
            take &= (used_l & np.uint32(1 << a)) == 0
            take &= (used_r & np.uint64(1 << b)) == 0
            used_l |= np.where(take, np.uint32(1 << a), np.uint32(0))
            used_r |= np.where(take, np.uint64(1 << b), np.uint64(0))
            if a == u:
                member[:, eid] = take
    return member


def vertex_candidate_table(inst: Instance, limit: int = 16) -> np.ndarray:
    """candidate[mask, u] = edge id of u's candidate under sample ``mask``
    (-1 when u is sampled or has none), for every left mask."""
    member = vertex_membership_table(inst, limit)
    nl = inst.left_size
    size = member.shape[0]
    masks = np.arange(size, dtype=np.uint32)
    table = np.full((size, nl), -1, dtype=np.int32)
    for eid, (a, _, _) in enumerate(inst.edges):
        hit = member[:, eid]
        table[hit, a] = eid  # at most one member edge per left vertex
    for u in range(nl):
        table[((masks >> np.uint32(u)) & 1) != 0, u] = -1
    return table


def expected_sample_greedy(inst: Instance, p: float, over: str,
                           limit: int = ENUMERATION_LIMIT) -> float:
    """Exact E[greedy weight on a Bernoulli(p) sample] of vertices or edges."""
    if over == "vertices":
        vals = left_subset_greedy(inst, limit)
        n = inst.left_size
    elif over == "edges":
        vals, _ = edge_subset_scan(inst, limit)
        n = inst.m
    else:
        raise ValueError(f"unknown sample universe {over!r}")
    return float(vals @ _mask_probs(n, p))


def _worst_vertex_value(inst: Instance, candidates: dict[int, int | None]) -> float:
    """Output weight under the worst arrival order: every right vertex ends
    up holding its lightest online candidate."""
    rank = edge_order(inst).rank
    best: dict[int, int] = {}
    for u, eid in candidates.items():
        if eid is None:
            continue
        r = inst.edges[eid][1]
        if r not in best or rank[eid] > rank[best[r]]:
            best[r] = eid
    return sum(inst.weight(e) for e in best.values())


def _vertex_alg_values(inst: Instance, algorithm: str, adversary: str,
                       limit: int) -> np.ndarray:
    """Per-sample-mask output weight for vertex arrivals, online = complement."""
    nl = inst.left_size
    if nl > limit:
        raise CapacityError(f"{nl} left vertices exceed enumeration limit {limit}")
    if adversary != "worst":
        raise ValueError("exact vertex enumeration supports the worst adversary only")
    vals = np.zeros(1 << nl)
    if algorithm in ("greedy-based", "thresholded") and nl <= 16:
        table = vertex_candidate_table(inst)
        for mask in range(1 << nl):
            cands = {u: (int(table[mask, u]) if table[mask, u] >= 0 else None)
                     for u in range(nl) if not (mask >> u) & 1}
            vals[mask] = _worst_vertex_value(inst, cands)
        return vals
    for mask in range(1 << nl):
        if algorithm == "opt-based":
            cands = compute_candidates_optbased(inst, mask)
        else:
            cands = compute_candidates_vertex(inst, mask)
        vals[mask] = _worst_vertex_value(inst, cands)
    return vals


def _edge_alg_values(inst: Instance, adversary: str, limit: int) -> np.ndarray:
    """Per-sample-mask output weight for edge arrivals.

    Under the worst adversary the realizable outcomes are exactly the maximal
    matchings of the candidate subgraph (a candidate arriving with both
    endpoints free is always taken), so the per-mask value is the
    minimum-weight maximal matching; this matches, and scales past, the
    factorial brute_worst search.
    """
    m = inst.m
    _, member = edge_subset_scan(inst, limit)
    vals = np.zeros(1 << m)
    cache: dict[frozenset[int], float] = {}
    for mask in range(1 << m):
        cands = frozenset(e for e in range(m)
                          if not (mask >> e) & 1 and member[mask, e])
        if adversary in ("worst", "brute_worst"):
            if cands not in cache:
                cache[cands] = worst_edge_outcome(inst, cands)
            vals[mask] = cache[cands]
        elif adversary in ("ascending", "descending"):
            order = order_edge(inst, mask, cands, adversary)
            vals[mask] = run_edge_arrival(inst, mask, order).total_weight
        else:
            raise ValueError(f"unknown exact edge adversary {adversary!r}")
    return vals


def _aosp_benchmark_values(inst: Instance, arrival: str, limit: int) -> np.ndarray:
    """Optimum weight on the online set, for every history mask."""
    n = inst.left_size if arrival == "vertex" else inst.m
    if n > limit:
        raise CapacityError(f"{n} items exceed enumeration limit {limit}")
    vals = np.zeros(1 << n)
    for hist in range(1 << n):
        online = ~hist & full_mask(n)
        if arrival == "vertex":
            allowed = 0
            for eid, (a, _, _) in enumerate(inst.edges):
                if (online >> a) & 1:
                    allowed |= 1 << eid
        else:
            allowed = online
        vals[hist] = max_weight_matching(inst, allowed_edges=allowed).total_weight
    return vals


def _submasks(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _history_alg_value(inst: Instance, config: ExperimentConfig, hist: int,
                       sample: int, alg_vals: np.ndarray) -> float:
    """Algorithm value when the sample is ``sample`` but only the complement
    of ``hist`` arrives online (sample is a subset of the history)."""
    if sample == hist:
        return float(alg_vals[hist])
    if config.arrival == "vertex":
        if config.algorithm == "opt-based":
            cands = compute_candidates_optbased(inst, sample)
        else:
            cands = compute_candidates_vertex(inst, sample)
        online = {u: cands[u] for u in cands if not (hist >> u) & 1}
        return _worst_vertex_value(inst, online)
    cands = frozenset(e for e in compute_candidates_edge(inst, sample)
                      if not (hist >> e) & 1)
    return worst_edge_outcome(inst, cands)


def exact_report(inst: Instance, config: ExperimentConfig) -> RatioEstimate:
    """Exact expectation over every sample realization.

    Benchmarks follow each model's definition: whole-graph optimum
    (random-order), expected optimum of the online set (sampled-history
    model), expected optimum of the online faces (two-faced).
    """
    p, limit = config.p, config.enumeration_limit
    if config.model == "two-faced":
        faces2 = config.second_face or tuple(w for _, _, w in inst.edges)
        e_alg, bench = exact_two_faced(inst, faces2, p, config.arrival)
        return _exact_estimate(e_alg, bench, config.seed)

    if config.arrival == "vertex":
        if inst.kind != BIPARTITE:
            raise ValueError("vertex arrivals require a bipartite instance")
        alg_vals = _vertex_alg_values(inst, config.algorithm, config.adversary, limit)
        n = inst.left_size
    else:
        if config.algorithm != "greedy-based":
            raise ValueError("edge arrivals use the greedy-based algorithm")
        alg_vals = _edge_alg_values(inst, config.adversary, limit)
        n = inst.m

    if config.model == "random-order":
        e_alg = float(alg_vals @ _mask_probs(n, p))
        return _exact_estimate(e_alg, optimum_weight(inst), config.seed)

    # sampled-history model
    keep = aosp_keep_probability(p, config.arrival)
    opt_vals = _aosp_benchmark_values(inst, config.arrival, limit)
    hist_probs = _mask_probs(n, p)
    bench = float(opt_vals @ hist_probs)
    e_alg = 0.0
    for hist in range(1 << n):
        hp = hist_probs[hist]
        if hp == 0.0:
            continue
        if keep >= 1.0:
            e_alg += hp * _history_alg_value(inst, config, hist, hist, alg_vals)
            continue
        h_size = hist.bit_count()
        for sub in _submasks(hist):
            s = sub.bit_count()
            q = keep ** s * (1.0 - keep) ** (h_size - s)
            e_alg += hp * q * _history_alg_value(inst, config, hist, sub, alg_vals)
    return _exact_estimate(e_alg, bench, config.seed)


# ---------------------------------------------------------------------------
# two-faced model
# ---------------------------------------------------------------------------

def two_faced_instance(inst: Instance, faces2, arrival: str = "vertex") -> TwoFacedInstance:
    """Pair the instance's own weights (face one) with per-edge ``faces2``."""
    env = matching_environment(inst, arrival)
    faces = []
    for item in env.items:
        f1 = tuple(inst.weight(e) for e in item)
        f2 = tuple(float(faces2[e]) for e in item)
        faces.append((f1, f2))
    return TwoFacedInstance(env, tuple(faces))


def _wrapped_factory(inst: Instance, p: float, arrival: str):
    if arrival == "vertex":
        return lambda: GreedyVertexOnline(inst, p)
    return lambda: GreedyEdgeOnline(inst, p)


def _online_opt(inst: Instance, items, w_face) -> float:
    weights = [0.0] * inst.m
    for i, item in enumerate(items):
        for pos, e in enumerate(item):
            weights[e] = w_face[i][pos]
    return max_weight_matching(inst.with_weights(weights)).total_weight


def exact_two_faced(inst: Instance, faces2, p: float, arrival: str = "vertex",
                    item_limit: int = 10) -> tuple[float, float]:
    """Exact (E[ALG'], E[OPT over online faces]) for the reduction wrapping
    the greedy-based algorithm, against a fully adaptive adversary.

    Enumerates face coins x sampling-phase lengths x ordered sample prefixes
    and, per realization, takes the worst order of the remaining items.
    """
    tf = two_faced_instance(inst, faces2, arrival)
    items = tf.environment.items
    n = len(items)
    if n > item_limit:
        raise CapacityError(f"{n} items exceed two-faced enumeration capacity")
    make_run = _wrapped_factory(inst, p, arrival)
    e_opt = 0.0
    e_alg = 0.0
    coin_prob = 0.5 ** n
    for coins in itertools.product((0, 1), repeat=n):
        s_face = [tf.faces[i][coins[i]] for i in range(n)]
        w_face = [tf.faces[i][1 - coins[i]] for i in range(n)]
        e_opt += coin_prob * _online_opt(inst, items, w_face)
        for k in range(n + 1):
            k_prob = math.comb(n, k) * p ** k * (1.0 - p) ** (n - k)
            if k_prob == 0.0:
                continue
            prefix_prob = math.factorial(n - k) / math.factorial(n)
            for prefix in itertools.permutations(range(n), k):
                rest = [i for i in range(n) if i not in prefix]
                worst = math.inf if rest else 0.0
                for online in itertools.permutations(rest):
                    run = make_run()
                    for j in prefix:
                        run.observe_sample(j, s_face[j])
                    total = 0.0
                    for i in online:
                        got = run.arrive(i, w_face[i])
                        pos = {e: t for t, e in enumerate(items[i])}
                        total += sum(w_face[i][pos[e]] for e in got)
                    worst = min(worst, total)
                e_alg += coin_prob * k_prob * prefix_prob * worst
    return e_alg, e_opt


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def _worker_count() -> int:
    raw = os.environ.get("MATCHLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parallel_trials(fn, trials: int) -> np.ndarray:
    """fn(t) per trial index, reduced into an index-ordered array."""
    out = np.zeros(trials)
    workers = _worker_count()
    if workers == 1:
        for t in range(trials):
            out[t] = fn(t)
        return out
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for t, val in enumerate(pool.map(fn, range(trials))):
            out[t] = val
    return out


@dataclass(frozen=True)
class _FastBipartite:
    """Rank-ordered edge arrays for the trial-batched vertex kernels."""

    left: np.ndarray
    right: np.ndarray
    weight: np.ndarray
    by_left: tuple[np.ndarray, ...]        # ranks per left vertex, ascending
    by_left_right: tuple[np.ndarray, ...]  # right endpoints aligned with by_left


def _fast_bipartite(inst: Instance) -> _FastBipartite:
    order = edge_order(inst).order
    left = np.array([inst.edges[e][0] for e in order], dtype=np.int64)
    right = np.array([inst.edges[e][1] for e in order], dtype=np.int64)
    weight = np.array([inst.edges[e][2] for e in order])
    by_left = []
    by_left_right = []
    for u in range(inst.left_size):
        ranks = np.nonzero(left == u)[0].astype(np.int64)
        by_left.append(ranks)
        by_left_right.append(right[ranks])
    return _FastBipartite(left, right, weight, tuple(by_left), tuple(by_left_right))


def _sample_rows(n: int, p: float, trials: int, seed: int, stream: int) -> np.ndarray:
    rows = np.zeros((trials, n), dtype=bool)
    for t in range(trials):
        rows[t] = rng_stream(seed, stream, t).random(n) < p
    return rows


def _batch_vertex_greedy(fb: _FastBipartite, nr: int, samples: np.ndarray):
    """Greedy on left samples, vectorized across trials.

    Returns (greedy weight per trial, per-right threshold rank per trial; a
    right vertex greedy leaves unmatched keeps rank m, beaten by any edge).
    """
    trials = samples.shape[0]
    m = len(fb.weight)
    used_l = np.zeros(samples.shape, dtype=bool)
    used_r = np.zeros((trials, nr), dtype=bool)
    thr = np.full((trials, nr), m, dtype=np.int64)
    total = np.zeros(trials)
    for t in range(m):
        a, b = fb.left[t], fb.right[t]
        take = samples[:, a] & ~used_l[:, a] & ~used_r[:, b]
        if not take.any():
            continue
        used_l[take, a] = True
        used_r[take, b] = True
        thr[take, b] = t
        total += fb.weight[t] * take
    return total, thr


def _batch_vertex_candidates(fb: _FastBipartite, thr: np.ndarray,
                             online: np.ndarray) -> np.ndarray:
    """Candidate edge rank per (trial, left vertex); m = no candidate."""
    trials, nl = online.shape
    m = len(fb.weight)
    cand = np.full((trials, nl), m, dtype=np.int64)
    for u in range(nl):
        ranks = fb.by_left[u]
        if len(ranks) == 0:
            continue
        beats = ranks[None, :] < thr[:, fb.by_left_right[u]]
        has = beats.any(axis=1)
        first = ranks[np.argmax(beats, axis=1)]
        ok = has & online[:, u]
        cand[ok, u] = first[ok]
    return cand


def _batch_vertex_worst(fb: _FastBipartite, nr: int, cand: np.ndarray) -> np.ndarray:
    """Worst-order output weight per trial: lightest candidate per right."""
    m = len(fb.weight)
    trials = cand.shape[0]
    tt, uu = np.nonzero(cand < m)
    ranks = cand[tt, uu]
    best = np.full((trials, nr), -1, dtype=np.int64)
    np.maximum.at(best, (tt, fb.right[ranks]), ranks)  # lightest = largest rank
    vals = np.where(best >= 0, fb.weight[np.clip(best, 0, m - 1)], 0.0)
    return vals.sum(axis=1)


def _mc_vertex_worst(inst: Instance, samples: np.ndarray, online: np.ndarray):
    fb = _fast_bipartite(inst)
    greedy_w, thr = _batch_vertex_greedy(fb, inst.right_size, samples)
    cand = _batch_vertex_candidates(fb, thr, online)
    alg_w = _batch_vertex_worst(fb, inst.right_size, cand)
    return alg_w, greedy_w


def _batch_edge_greedy(inst: Instance, samples: np.ndarray) -> np.ndarray:
    """Greedy on edge samples, vectorized across trials."""
    trials = samples.shape[0]
    used = np.zeros((trials, inst.vertex_count), dtype=bool)
    total = np.zeros(trials)
    for eid in edge_order(inst).order:
        a, b = inst.endpoint_keys(eid)
        take = samples[:, eid] & ~used[:, a] & ~used[:, b]
        if not take.any():
            continue
        used[take, a] = True
        used[take, b] = True
        total += inst.weight(eid) * take
    return total


def sample_greedy_estimate(inst: Instance, p: float, over: str, trials: int,
                           seed: int) -> RatioEstimate:
    """Monte Carlo E[greedy on a Bernoulli(p) sample] over the whole-graph
    optimum (complements ``expected_sample_greedy`` at scale)."""
    if over == "vertices":
        samples = _sample_rows(inst.left_size, p, trials, seed, stream=1)
        fb = _fast_bipartite(inst)
        vals, _ = _batch_vertex_greedy(fb, inst.right_size, samples)
    elif over == "edges":
        samples = _sample_rows(inst.m, p, trials, seed, stream=1)
        vals = _batch_edge_greedy(inst, samples)
    else:
        raise ValueError(f"unknown sample universe {over!r}")
    return _estimate_from_trials(vals, optimum_weight(inst), seed)


def _dense_weights(inst: Instance) -> np.ndarray:
    w = np.zeros((inst.left_size, inst.right_size))
    for a, b, ww in inst.edges:
        w[a, b] = ww
    return w


def _prune_dominated_rows(w: np.ndarray) -> np.ndarray:
    """Drop rows that can never matter in a maximum-weight matching.

    Rows sharing one support pattern and forming an elementwise domination
    chain are interchangeable: any matching can be rewritten to use only the
    top min(chain length, support size) of them (swap a matched lower row for
    an unmatched higher one; the weight never drops).  Exact, and collapses
    the many parallel rows the tight generators produce.
    """
    n, m = w.shape
    if n <= m:
        return w
    support = w > 0
    groups: dict[bytes, list[int]] = {}
    for i in range(n):
        groups.setdefault(support[i].tobytes(), []).append(i)
    keep: list[int] = []
    for idx in groups.values():
        cap = max(int(support[idx[0]].sum()), 1)
        if len(idx) <= cap:
            keep.extend(idx)
            continue
        order = sorted(idx, key=lambda i: -w[i].sum())
        run = [order[0]]
        for i in order[1:]:
            if (w[run[-1]] >= w[i]).all():
                run.append(i)
            else:
                keep.extend(run[:cap])
                run = [i]
        keep.extend(run[:cap])
    return w[np.array(sorted(keep), dtype=np.int64)]


def _max_weight_value(weights: np.ndarray) -> float:
    """Maximum-weight matching value of a dense non-negative matrix
    (zero entries double as non-edges)."""
    if weights.size == 0:
        return 0.0
    weights = _prune_dominated_rows(weights)
    r, c = linear_sum_assignment(weights, maximize=True)
    return float(weights[r, c].sum())


def _mask_from_row(row: np.ndarray) -> int:
    mask = 0
    for i in np.nonzero(row)[0]:
        mask |= 1 << int(i)  # plain int: numpy shifts overflow past bit 62
    return mask


def _mc_aosp_vertex(inst: Instance, p: float, trials: int, seed: int):
    keep = aosp_keep_probability(p, "vertex")
    nl = inst.left_size
    hist = _sample_rows(nl, p, trials, seed, stream=1)
    samples = hist
    if keep < 1.0:
        samples = hist & _sample_rows(nl, keep, trials, seed, stream=2)
    online = ~hist
    alg_w, _ = _mc_vertex_worst(inst, samples, online)
    dense = _dense_weights(inst)

    def bench_one(t: int) -> float:
        rows = np.nonzero(online[t])[0]
        if len(rows) == 0:
            return 0.0
        return _max_weight_value(dense[rows])

    opt_w = _parallel_trials(bench_one, trials)
    return alg_w, opt_w


def _mc_optbased(inst: Instance, p: float, trials: int, seed: int) -> np.ndarray:
    nl = inst.left_size

    def one(t: int) -> float:
        row = rng_stream(seed, 1, t).random(nl) < p
        mask = _mask_from_row(row)
        cands = compute_candidates_optbased(inst, mask)
        return _worst_vertex_value(inst, cands)

    return _parallel_trials(one, trials)


def _mc_edge_arrival(inst: Instance, config: ExperimentConfig) -> np.ndarray:
    def one(t: int) -> float:
        rng = rng_stream(config.seed, 1, t)
        mask = _mask_from_row(rng.random(inst.m) < config.p)
        cands = compute_candidates_edge(inst, mask)
        if config.adversary in ("worst", "brute_worst"):
            return worst_edge_outcome(inst, cands)
        order = order_edge(inst, mask, cands, config.adversary, rng)
        return run_edge_arrival(inst, mask, order).total_weight

    return _parallel_trials(one, config.trials)


def _mc_aosp_edge(inst: Instance, config: ExperimentConfig) -> RatioEstimate:
    p, trials, seed = config.p, config.trials, config.seed
    keep = aosp_keep_probability(p, "edge")
    if config.adversary not in ("worst", "brute_worst"):
        raise ValueError("sampled-history edge Monte Carlo supports the worst adversary only")
    alg = np.zeros(trials)
    bench = np.zeros(trials)
    for t in range(trials):
        rng = rng_stream(seed, 1, t)
        hrow = rng.random(inst.m) < p
        hist = _mask_from_row(hrow)
        sample = hist
        if keep < 1.0:
            krow = rng.random(inst.m) < keep
            sample = hist & _mask_from_row(krow)
        online_mask = ~hist & full_mask(inst.m)
        cands = frozenset(e for e in compute_candidates_edge(inst, sample)
                          if (online_mask >> e) & 1)
        alg[t] = worst_edge_outcome(inst, cands)
        bench[t] = max_weight_matching(inst, allowed_edges=online_mask).total_weight
    return _estimate_from_trials(alg, bench, seed)


def _mc_two_faced(inst: Instance, config: ExperimentConfig) -> RatioEstimate:
    faces2 = config.second_face or tuple(w for _, _, w in inst.edges)
    tf = two_faced_instance(inst, faces2, config.arrival)
    items = tf.environment.items
    make_run = _wrapped_factory(inst, config.p, config.arrival)
    alg = np.zeros(config.trials)
    bench = np.zeros(config.trials)
    for t in range(config.trials):
        # the benchmark re-reads the same coins the reduction draws first
        # from its stream, so both sides see the same face realization
        rng = rng_stream(config.seed, 1, t)
        coins = [int(rng.integers(0, 2)) for _ in range(len(items))]
        w_face = [tf.faces[i][1 - coins[i]] for i in range(len(items))]
        bench[t] = _online_opt(inst, items, w_face)
        alg[t] = run_two_faced_reduction(
            tf, make_run, "ascending", rng_stream(config.seed, 1, t)).total_weight
    return _estimate_from_trials(alg, bench, config.seed)


def monte_carlo(inst: Instance, config: ExperimentConfig) -> RatioEstimate:
    """Monte Carlo estimate of the same expectations ``exact_report`` computes.

    Trial t draws all of its randomness from stream (seed, ., t); the mean is
    an index-ordered reduction, so the result is bit-identical for a fixed
    (seed, trials) regardless of worker count.
    """
    p, trials, seed = config.p, config.trials, config.seed
    if config.model == "two-faced":
        return _mc_two_faced(inst, config)
    if config.model == "aosp":
        if config.arrival == "edge":
            return _mc_aosp_edge(inst, config)
        if config.algorithm == "opt-based":
            raise ValueError("opt-based runs are supported in the random-order model")
        alg, bench = _mc_aosp_vertex(inst, p, trials, seed)
        return _estimate_from_trials(alg, bench, seed)

    bench = optimum_weight(inst)
    if config.arrival == "vertex":
        if config.adversary != "worst":
            raise ValueError("vertex Monte Carlo supports the worst adversary only")
        if config.algorithm == "opt-based":
            alg = _mc_optbased(inst, p, trials, seed)
        else:
            samples = _sample_rows(inst.left_size, p, trials, seed, stream=1)
            alg, _ = _mc_vertex_worst(inst, samples, ~samples)
    else:
        alg = _mc_edge_arrival(inst, config)
    return _estimate_from_trials(alg, bench, seed)
