"""Weighted matching instances with a strict total edge order, plus file I/O.

Instances are immutable after construction and safe to share across threads.
Edge subsets and vertex subsets are passed around as plain int bitmasks
(bit i = item i), which keeps exhaustive enumeration cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

BIPARTITE = "bipartite"
GENERAL = "general"


class InstanceParseError(ValueError):
    """Malformed instance file; the message names the offending line."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def mask_of(ids: Iterable[int]) -> int:
    mask = 0
    for i in ids:
        mask |= 1 << i
    return mask


def mask_members(mask: int) -> Iterator[int]:
    """Yield set bit positions of a bitmask in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def full_mask(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True)
class Instance:
    """A weighted graph whose edges carry ids 0..m-1 in input order.

    For bipartite instances an edge (a, b, w) connects left vertex a to right
    vertex b; for general instances it connects vertices a and b.  Weights are
    non-negative finite floats.  ``opt_certificate`` optionally records a known
    maximum-matching weight supplied by a generator.
    """

    kind: str
    left_size: int
    right_size: int
    vertex_count: int
    edges: tuple[tuple[int, int, float], ...]
    opt_certificate: float | None = None

    @staticmethod
    def bipartite(left_size: int, right_size: int,
                  edges: Iterable[tuple[int, int, float]],
                  opt_certificate: float | None = None) -> "Instance":
        return Instance(BIPARTITE, left_size, right_size,
                        left_size + right_size, tuple(edges), opt_certificate)

    @staticmethod
    def general(vertex_count: int,
                edges: Iterable[tuple[int, int, float]],
                opt_certificate: float | None = None) -> "Instance":
        return Instance(GENERAL, 0, 0, vertex_count, tuple(edges),
                        opt_certificate)

    def __post_init__(self):
        if self.kind not in (BIPARTITE, GENERAL):
            raise ValueError(f"unknown instance kind {self.kind!r}")
        seen = set()
        for eid, (a, b, w) in enumerate(self.edges):
            if self.kind == BIPARTITE:
                if not (0 <= a < self.left_size and 0 <= b < self.right_size):
                    raise ValueError(f"edge {eid}: endpoint out of range")
                key = (a, b)
            else:
                if not (0 <= a < self.vertex_count and 0 <= b < self.vertex_count):
                    raise ValueError(f"edge {eid}: endpoint out of range")
                if a == b:
                    raise ValueError(f"edge {eid}: self-loop")
                key = (min(a, b), max(a, b))
            if key in seen:
                raise ValueError(f"edge {eid}: duplicate edge {key}")
            seen.add(key)
            if not (math.isfinite(w) and w >= 0.0):
                raise ValueError(f"edge {eid}: negative weight or non-finite")

    @property
    def m(self) -> int:
        return len(self.edges)

    def weight(self, eid: int) -> float:
        return self.edges[eid][2]

    def endpoint_keys(self, eid: int) -> tuple[int, int]:
        """Canonical vertex keys of an edge (right side offset by left_size)."""
        a, b, _ = self.edges[eid]
        if self.kind == BIPARTITE:
            return a, self.left_size + b
        return a, b

    def with_weights(self, weights: Iterable[float]) -> "Instance":
        """Same topology, new weights; drops any optimum certificate."""
        new = tuple((a, b, float(w))
                    for (a, b, _), w in zip(self.edges, weights, strict=True))
        return Instance(self.kind, self.left_size, self.right_size,
                        self.vertex_count, new, None)


@dataclass(frozen=True)
class EdgeOrder:
    """Strict total order on edges: weight descending, id ascending on ties."""

    order: tuple[int, ...]   # edge ids, heaviest first
    rank: tuple[int, ...]    # rank[eid] = position in `order`

    def heavier(self, e1: int, e2: int) -> bool:
        return self.rank[e1] < self.rank[e2]


@lru_cache(maxsize=64)
def edge_order(inst: Instance) -> EdgeOrder:
    """The instance's consistent tie-broken edge order; deterministic."""
    order = sorted(range(inst.m), key=lambda e: (-inst.edges[e][2], e))
    rank = [0] * inst.m
    for pos, e in enumerate(order):
        rank[e] = pos
    return EdgeOrder(tuple(order), tuple(rank))


@dataclass(frozen=True)
class Matching:
    """A set of pairwise vertex-disjoint edge ids and its total weight."""

    edge_ids: frozenset[int]
    total_weight: float

    @staticmethod
    def from_ids(inst: Instance, ids: Iterable[int]) -> "Matching":
        ids = sorted(set(ids))
        used = set()
        total = 0.0
        for eid in ids:
            a, b = inst.endpoint_keys(eid)
            if a in used or b in used:
                raise ValueError(f"edges are not vertex-disjoint at edge {eid}")
            used.add(a)
            used.add(b)
            total += inst.weight(eid)
        return Matching(frozenset(ids), total)

    @staticmethod
    def empty() -> "Matching":
        return Matching(frozenset(), 0.0)


def is_matching(inst: Instance, ids: Iterable[int]) -> bool:
    used = set()
    for eid in ids:
        a, b = inst.endpoint_keys(eid)
        if a in used or b in used:
            return False
        used.add(a)
        used.add(b)
    return True


def parse_instance(text: str) -> Instance:
    """Parse the line-based instance format (see ``serialize_instance``)."""
    header = None
    header_line = 0
    edges: list[tuple[int, int, float]] = []
    opt: float | None = None
    seen_pairs: dict[tuple[int, int], int] = {}
    expected_m = 0

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if header is None:
            if tokens[0] == BIPARTITE:
                if len(tokens) != 4:
                    raise InstanceParseError(lineno, "malformed bipartite header")
                try:
                    nl, nr, expected_m = (int(t) for t in tokens[1:])
                except ValueError:
                    raise InstanceParseError(lineno, "malformed bipartite header") from None
            elif tokens[0] == GENERAL:
                if len(tokens) != 3:
                    raise InstanceParseError(lineno, "malformed general header")
                try:
                    nv, expected_m = (int(t) for t in tokens[1:])
                except ValueError:
                    raise InstanceParseError(lineno, "malformed general header") from None
            else:
                raise InstanceParseError(lineno, f"malformed header {tokens[0]!r}")
            if expected_m < 0 or min(int(t) for t in tokens[1:-1]) < 0:
                raise InstanceParseError(lineno, "negative count in header")
            header = tokens[0]
            header_line = lineno
            continue
        if tokens[0] == "OPT":
            if len(tokens) != 2:
                raise InstanceParseError(lineno, "malformed OPT line")
            if opt is not None:
                raise InstanceParseError(lineno, "duplicate OPT line")
            try:
                opt = float(tokens[1])
            except ValueError:
                raise InstanceParseError(lineno, "malformed OPT value") from None
            continue
        if opt is not None:
            raise InstanceParseError(lineno, "edge line after OPT line")
        if len(edges) >= expected_m:
            raise InstanceParseError(lineno, "more edge lines than declared")
        if len(tokens) != 3:
            raise InstanceParseError(lineno, "malformed edge line")
        try:
            a, b = int(tokens[0]), int(tokens[1])
            w = float(tokens[2])
        except ValueError:
            raise InstanceParseError(lineno, "malformed edge line") from None
        if header == BIPARTITE:
            if not (0 <= a < nl and 0 <= b < nr):
                raise InstanceParseError(lineno, "out-of-range endpoint")
            key = (a, b)
        else:
            if not (0 <= a < nv and 0 <= b < nv):
                raise InstanceParseError(lineno, "out-of-range endpoint")
            if a == b:
                raise InstanceParseError(lineno, "self-loop")
            key = (min(a, b), max(a, b))
        if w < 0:
            raise InstanceParseError(lineno, "negative weight")
        if not math.isfinite(w):
            raise InstanceParseError(lineno, "non-finite weight")
        if key in seen_pairs:
            raise InstanceParseError(lineno, f"duplicate edge line (first at line {seen_pairs[key]})")
        seen_pairs[key] = lineno
        edges.append((a, b, w))

    if header is None:
        raise InstanceParseError(1, "missing header")
    if len(edges) != expected_m:
        raise InstanceParseError(header_line, f"declared {expected_m} edges, found {len(edges)}")
    if header == BIPARTITE:
        return Instance.bipartite(nl, nr, edges, opt)
    return Instance.general(nv, edges, opt)


def serialize_instance(inst: Instance) -> str:
    """Emit the instance file format; round-trips bit-exactly through parse."""
    lines = []
    if inst.kind == BIPARTITE:
        lines.append(f"{BIPARTITE} {inst.left_size} {inst.right_size} {inst.m}")
    else:
        lines.append(f"{GENERAL} {inst.vertex_count} {inst.m}")
    for a, b, w in inst.edges:
        lines.append(f"{a} {b} {w!r}")
    if inst.opt_certificate is not None:
        lines.append(f"OPT {inst.opt_certificate!r}")
    return "\n".join(lines) + "\n"
