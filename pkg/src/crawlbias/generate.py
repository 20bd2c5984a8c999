"""Degree-sequence realization: stub matching and assortativity-targeted rewiring."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .graph import DegreeDistribution, Graph, assortativity


def degree_sequence_from_distribution(d: DegreeDistribution, n: int) -> list[int]:
    """n degrees whose class counts follow d by largest-remainder rounding.

    If the resulting stub total is odd, one node from the class with the
    largest remaining rounding deficit gets its degree incremented by one so
    the sequence stays realizable by stub matching.
    """
    if n < 1:
        raise ValueError("need at least one node")
    exact = {k: p * n for k, p in d.items()}
    counts = {k: int(e) for k, e in exact.items()}
    leftover = n - sum(counts.values())
    by_remainder = sorted(exact, key=lambda k: (-(exact[k] - counts[k]), k))
    for k in by_remainder[:leftover]:
        counts[k] += 1

    if sum(k * c for k, c in counts.items()) % 2:
        eligible = [k for k, c in counts.items() if c > 0]
        bump = max(eligible, key=lambda k: (exact[k] - counts[k], -k))
        counts[bump] -= 1
        counts[bump + 1] = counts.get(bump + 1, 0) + 1

    return [k for k in sorted(counts) for _ in range(counts[k])]


def configuration_model(degrees: Sequence[int], rng: random.Random) -> Graph:
    """Uniform stub matching: shuffle the stub list, pair consecutive entries.

    Self-loops and parallel edges are kept, exactly as the matching produces
    them; a self-loop contributes 2 to its node's degree.
    """
    stubs = [v for v, k in enumerate(degrees) for _ in range(k)]
    if len(stubs) % 2:
        raise ValueError("degree sequence has an odd stub total")
    rng.shuffle(stubs)
    adj: list[list[int]] = [[] for _ in degrees]
    for i in range(0, len(stubs), 2):
        a, b = stubs[i], stubs[i + 1]
        adj[a].append(b)
        adj[b].append(a)
    return Graph(adj)


@dataclass
class RewireResult:
    graph: Graph
    achieved_r: float
    accepted: int
    proposals: int


def rewire_to_assortativity(g: Graph, target_r: float, rng: random.Random,
                            *, tolerance: float = 0.01,
                            max_steps: int | None = None) -> RewireResult:
    """Drive degree assortativity toward target_r by pairwise edge swaps.

    A proposal picks two random edges {a,b}, {c,d} and rewires them to
    {a,d}, {c,b}; it is rejected if it would create a self-loop or an edge
    that already exists, and accepted only if it moves r strictly closer to
    the target. Degrees never change, so |r - target| is non-increasing.
    Stops at |r - target| <= tolerance or after max_steps proposals
    (default 100 * edge_count) and reports the achieved r.
    """
    if g.edge_count < 2:
        raise ValueError("need at least two edges to rewire")
    r0 = assortativity(g)
    if r0 is None:
        raise ValueError("assortativity undefined on this graph (zero degree variance)")
    if max_steps is None:
        max_steps = 100 * g.edge_count

    edges = [list(e) for e in g.edges()]
    counts: dict[tuple[int, int], int] = {}
    for u, v in edges:
        key = (u, v) if u <= v else (v, u)
        counts[key] = counts.get(key, 0) + 1

    # Pearson r over edge endpoints, both orientations per edge. Only the
    # cross term sum k_u*k_v moves under degree-preserving swaps; the
    # marginal sums are functions of the degree multiset alone.
    deg = g.degrees()
    m = 2 * g.edge_count
    s1 = sum(k * k for k in deg)
    s2 = sum(k ** 3 for k in deg)
    mean = s1 / m
    var = s2 / m - mean * mean
    s11 = 2.0 * sum(deg[u] * deg[v] for u, v in edges)

    def r_of(cross: float) -> float:
        return (cross / m - mean * mean) / var

    cur = r_of(s11)
    gap = abs(cur - target_r)
    accepted = 0
    proposals = 0
    ecount = len(edges)

    while gap > tolerance and proposals < max_steps:
        proposals += 1
        i = rng.randrange(ecount)
        j = rng.randrange(ecount)
        if i == j:
            continue
        a, b = edges[i]
        c, d = edges[j]
        # edge endpoints are unordered; flip so both distinct swaps get proposed
        if rng.random() < 0.5:
            a, b = b, a
        if rng.random() < 0.5:
            c, d = d, c
        if a == d or c == b:
            continue
        k1 = (a, d) if a <= d else (d, a)
        k2 = (c, b) if c <= b else (b, c)
        if k1 == k2 or counts.get(k1) or counts.get(k2):
            continue
        delta = 2.0 * (deg[a] * deg[d] + deg[c] * deg[b] - deg[a] * deg[b] - deg[c] * deg[d])
        new_r = r_of(s11 + delta)
        if abs(new_r - target_r) >= gap:
            continue
        old1 = (a, b) if a <= b else (b, a)
        old2 = (c, d) if c <= d else (d, c)
        for key in (old1, old2):
            counts[key] -= 1
            if not counts[key]:
                del counts[key]
        for key in (k1, k2):
            counts[key] = counts.get(key, 0) + 1
        edges[i] = [a, d]
        edges[j] = [c, b]
        s11 += delta
        cur = new_r
        gap = abs(cur - target_r)
        accepted += 1

    if accepted == 0:
        return RewireResult(g, r0, 0, proposals)
    out = Graph.from_edges(g.node_count, [tuple(e) for e in edges], g.labels)
    achieved = assortativity(out)
    assert achieved is not None
    return RewireResult(out, achieved, accepted, proposals)
