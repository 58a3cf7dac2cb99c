"""Instance families realizing the tight bounds, plus random corpora.

All tight families are essentially unweighted: weights sit in a band of
width ``eps`` around 1 and only encode a prescribed strict edge order (the
i-th edge in that order gets weight 1 + eps*(m-i)/m, or the mirrored sub-1
band).  Each generator attaches an analytic ``opt_certificate``.
"""

from __future__ import annotations

import math

import numpy as np

from .graph import BIPARTITE, GENERAL, Instance


def _check(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


def _banded_weights(count: int, eps: float, above_one: bool) -> list[float]:
    # rank 0 is heaviest; strictly monotone, all within eps of 1
    if above_one:
        return [1.0 + eps * (count - t) / count for t in range(count)]
    return [1.0 - eps * (t + 1.0) / (count + 1.0) for t in range(count)]


def gen_tight_vertex(k: int, p: float, eps: float = 1e-6) -> Instance:
    """Three-part left side against which the vertex algorithm is tight.

    L1 (k vertices) and L2 (floor(k(1-p)/p)) see the whole right side of
    k + floor(k/p) vertices; L3 (k) sees only the first k right vertices.
    The k diagonal edges (u_i, r_i) are heaviest (index-ascending among
    themselves); every other edge is ordered lexicographically by
    (part, left index, right index).  A perfect matching exists and all
    perfect matchings weigh the same, which gives the certificate.
    """
    return _three_part_instance(k, p, eps, l3_size=k)


def gen_tight_aosp(k: int, p: float, eps: float = 1e-6) -> Instance:
    """Tight instance for the sampled-history model: an enlarged third part
    (floor(k^2/(1-p)) vertices) keeps the benchmark side busy."""
    _check(0.0 < p < 1.0, "p must lie strictly inside (0, 1)")
    return _three_part_instance(k, p, eps, l3_size=int(k * k / (1.0 - p)))


def _three_part_instance(k: int, p: float, eps: float, l3_size: int) -> Instance:
    _check(k >= 1, "k must be at least 1")
    _check(0.0 < p < 1.0, "p must lie strictly inside (0, 1)")
    _check(0.0 < eps < 1.0, "eps must lie strictly inside (0, 1)")
    l2_size = int(k * (1.0 - p) / p)
    nl = k + l2_size + l3_size
    nr = k + int(k / p)
    pairs: list[tuple[int, int]] = []
    pairs.extend((i, i) for i in range(k))                       # diagonals
    pairs.extend((i, j) for i in range(k)                        # L1 off-diag
                 for j in range(nr) if j != i)
    pairs.extend((k + i, j) for i in range(l2_size)              # L2
                 for j in range(nr))
    pairs.extend((k + l2_size + i, j) for i in range(l3_size)    # L3
                 for j in range(k))
    weights = _banded_weights(len(pairs), eps, above_one=True)
    edges = [(a, b, w) for (a, b), w in zip(pairs, weights)]

    # Optimum: a matching saturating the right side, avoiding diagonals so L3
    # can take the first k right vertices; all such matchings weigh the same.
    wmap = {(a, b): w for a, b, w in edges}
    cert = sum(wmap[(k + l2_size + i, i)] for i in range(min(k, l3_size)))
    cert += sum(wmap[(i, k + i)] for i in range(k))
    cert += sum(wmap[(k + i, 2 * k + i)] for i in range(l2_size))
    return Instance.bipartite(nl, nr, edges, cert)


def gen_greedy_tight_vertex(k: int, eps: float = 1e-6) -> Instance:
    """Nested-neighborhood square instance misleading greedy on samples.

    u_i sees r_1..r_{k-i+1}; edges of u_i beat those of u_{i+1} and fall off
    within each u_i as the right index grows.  The unique perfect matching
    is the anti-diagonal, giving the certificate.
    """
    _check(k >= 1, "k must be at least 1")
    _check(0.0 < eps < 1.0, "eps must lie strictly inside (0, 1)")
    pairs = [(i, j) for i in range(k) for j in range(k - i)]
    weights = _banded_weights(len(pairs), eps, above_one=True)
    edges = [(a, b, w) for (a, b), w in zip(pairs, weights)]
    wmap = {(a, b): w for a, b, w in edges}
    cert = sum(wmap[(i, k - i - 1)] for i in range(k))
    return Instance.bipartite(k, k, edges, cert)


def gen_trap_edge(k: int, eps: float = 1e-6) -> Instance:
    """Trap instance for greedy on edge samples.

    k fully connected vertices with weights just above 1 bait greedy away
    from the k vertices below them (weights just below 1) that only reach
    the first k of 2k right vertices.  The certificate is the weight of the
    perfect matching sending the heavy part to the back half.
    """
    _check(k >= 1, "k must be at least 1")
    _check(0.0 < eps < 1.0, "eps must lie strictly inside (0, 1)")
    nr = 2 * k
    heavy = [(i, j) for i in range(k) for j in range(nr)]
    light = [(k + i, j) for i in range(k) for j in range(k)]
    edges = [(a, b, w) for (a, b), w in
             zip(heavy, _banded_weights(len(heavy), eps, above_one=True))]
    edges += [(a, b, w) for (a, b), w in
              zip(light, _banded_weights(len(light), eps, above_one=False))]
    wmap = {(a, b): w for a, b, w in edges}
    cert = sum(wmap[(i, k + i)] for i in range(k))
    cert += sum(wmap[(k + i, i)] for i in range(k))
    return Instance.bipartite(2 * k, nr, edges, cert)


def gen_optbased_counterexample(k: int, a: float) -> Instance:
    """Star of weight-a edges plus k pendant unit edges.

    The exact-optimum candidate rule steers the star center onto a right
    vertex whose pendant partner is online, which then blocks it; the
    certificate is a + k - 1.
    """
    _check(k >= 1, "k must be at least 1")
    _check(a > 1.0, "a must exceed the unit pendant weight")
    edges = [(0, j, float(a)) for j in range(k)]
    edges += [(1 + i, i, 1.0) for i in range(k)]
    return Instance.bipartite(1 + k, k, edges, float(a) + (k - 1))


def gen_random(kind: str, sizes: tuple[int, ...], density: float,
               rng: np.random.Generator, weight_law: str = "uniform") -> Instance:
    """Random instance: each potential edge kept independently with
    probability ``density``, i.i.d. weights (uniform on (0, 1] by default)."""
    _check(0.0 <= density <= 1.0, "density must be in [0, 1]")
    if weight_law != "uniform":
        raise ValueError(f"unknown weight law {weight_law!r}")
    if kind == BIPARTITE:
        nl, nr = sizes
        potential = [(i, j) for i in range(nl) for j in range(nr)]
    elif kind == GENERAL:
        (n,) = sizes
        potential = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        raise ValueError(f"unknown instance kind {kind!r}")
    edges = []
    for a, b in potential:
        if rng.random() < density:
            edges.append((a, b, float(1.0 - rng.random())))
    if kind == BIPARTITE:
        return Instance.bipartite(nl, nr, edges)
    return Instance.general(n, edges)


GENERATOR_NAMES = ("tight-vertex", "tight-aosp", "greedy-tight", "trap-edge",
                   "optbased-counterexample", "random")


def parse_generator_spec(spec: str) -> Instance:
    """Build an instance from a spec string like "tight-vertex k=50 p=0.4"."""
    tokens = spec.split()
    if not tokens:
        raise ValueError("empty generator spec")
    name, kv = tokens[0], {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ValueError(f"malformed generator parameter {tok!r}")
        key, val = tok.split("=", 1)
        kv[key] = val
    try:
        if name == "tight-vertex":
            return gen_tight_vertex(int(kv["k"]), float(kv["p"]),
                                    float(kv.get("eps", 1e-6)))
        if name == "tight-aosp":
            return gen_tight_aosp(int(kv["k"]), float(kv["p"]),
                                  float(kv.get("eps", 1e-6)))
        if name == "greedy-tight":
            return gen_greedy_tight_vertex(int(kv["k"]), float(kv.get("eps", 1e-6)))
        if name == "trap-edge":
            return gen_trap_edge(int(kv["k"]), float(kv.get("eps", 1e-6)))
        if name == "optbased-counterexample":
            return gen_optbased_counterexample(int(kv["k"]), float(kv["a"]))
        if name == "random":
            from .models import rng_stream
            kind = kv.get("kind", BIPARTITE)
            seed = int(kv.get("seed", 0))
            if kind == BIPARTITE:
                sizes: tuple[int, ...] = (int(kv["nl"]), int(kv["nr"]))
            else:
                sizes = (int(kv["n"]),)
            return gen_random(kind, sizes, float(kv.get("density", 0.5)),
                              rng_stream(seed, 0))
    except KeyError as missing:
        raise ValueError(f"generator {name!r} missing parameter {missing}") from None
    raise ValueError(f"unknown generator {name!r} (expected one of {GENERATOR_NAMES})")
