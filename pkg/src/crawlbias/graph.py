"""Undirected multigraph over dense integer ids, edge-list loading, and summary statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Mapping, Sequence


class GraphFormatError(ValueError):
    """An edge-list source could not be parsed."""


class Graph:
    """Undirected multigraph over node ids 0..n-1.

    Adjacency is one neighbor list per node. A parallel edge repeats its
    endpoint in the list and a self-loop at v lists v twice, so
    len(adjacency[v]) is exactly the degree of v and
    sum(degrees) == 2 * edge_count always holds.

    Instances are frozen by convention once built: nothing in this package
    mutates an existing Graph, so concurrent readers need no locking.
    """

    __slots__ = ("adjacency", "edge_count", "labels")

    def __init__(self, adjacency: Sequence[Sequence[int]], labels: Sequence[int] | None = None):
        adj = [list(nbrs) for nbrs in adjacency]
        stubs = sum(len(nbrs) for nbrs in adj)
        if stubs % 2:
            raise ValueError("adjacency is not symmetric: odd number of stub entries")
        if labels is not None and len(labels) != len(adj):
            raise ValueError("labels length does not match node count")
        self.adjacency = adj
        self.edge_count = stubs // 2
        # original node names for reporting; identity when the graph was generated
        self.labels = list(labels) if labels is not None else list(range(len(adj)))

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]],
                   labels: Sequence[int] | None = None) -> "Graph":
        adj: list[list[int]] = [[] for _ in range(node_count)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)  # u == v appends twice: a self-loop adds 2 to the degree
        return cls(adj, labels)

    @property
    def node_count(self) -> int:
        return len(self.adjacency)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> list[int]:
        return [len(nbrs) for nbrs in self.adjacency]

    def neighbors(self, v: int) -> list[int]:
        return self.adjacency[v]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield each edge once as (u, v) with u <= v; parallel edges repeat."""
        for u, nbrs in enumerate(self.adjacency):
            loops = 0
            for w in nbrs:
                if w > u:
                    yield (u, w)
                elif w == u:
                    loops += 1
            # each self-loop contributed two entries
            for _ in range(loops // 2):
                yield (u, u)

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, m={self.edge_count})"


class DegreeDistribution:
    """Per-degree fractions p_k, validated to sum to one.

    Entries with zero mass are dropped; at least one positive-degree class
    must carry mass (the coverage map t -> f(t) is invertible only then).
    p_0 > 0 is allowed and caps reachable coverage at 1 - p_0.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: Mapping[int, float], *, normalize: bool = False):
        cleaned: dict[int, float] = {}
        for k, p in entries.items():
            kk = int(k)
            if kk != k or kk < 0:
                raise ValueError(f"degree must be a nonnegative integer, got {k!r}")
            if p < 0:
                raise ValueError(f"negative fraction for degree {kk}")
            if p > 0:
                cleaned[kk] = cleaned.get(kk, 0.0) + float(p)
        total = sum(cleaned.values())
        if total <= 0:
            raise ValueError("distribution has no mass")
        if normalize:
            cleaned = {k: p / total for k, p in cleaned.items()}
        elif abs(total - 1.0) > 1e-12:
            raise ValueError(f"fractions sum to {total!r}, not 1")
        if not any(k > 0 for k in cleaned):
            raise ValueError("all mass on degree 0")
        self.entries = dict(sorted(cleaned.items()))

    def items(self) -> list[tuple[int, float]]:
        return list(self.entries.items())

    def get(self, k: int) -> float:
        return self.entries.get(k, 0.0)

    def support(self) -> list[int]:
        return list(self.entries)

    def mean(self) -> float:
        return sum(k * p for k, p in self.entries.items())

    def second_moment(self) -> float:
        return sum(k * k * p for k, p in self.entries.items())

    @classmethod
    def from_sequence(cls, degrees: Sequence[int]) -> "DegreeDistribution":
        counts: dict[int, int] = {}
        for k in degrees:
            counts[k] = counts.get(k, 0) + 1
        return cls({k: c / len(degrees) for k, c in counts.items()})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DegreeDistribution) and self.entries == other.entries

    def __repr__(self) -> str:
        return f"DegreeDistribution({self.entries})"


def degree_distribution(g: Graph) -> DegreeDistribution:
    """Empirical p_k of a graph."""
    return DegreeDistribution.from_sequence(g.degrees())


def moments(d: DegreeDistribution) -> tuple[float, float]:
    """Mean degree and the ratio second moment / mean.

    The ratio is the expected degree seen by any stationary degree-weighted
    sampler (random walks, early traversal), so it bounds the sampling bias.
    """
    mean = d.mean()
    if mean <= 0:
        raise ValueError("mean degree is zero")
    return mean, d.second_moment() / mean


def assortativity(g: Graph) -> float | None:
    """Pearson correlation of degrees over edge endpoints.

    Every undirected edge contributes both orderings of its endpoint degrees,
    so the two marginals coincide. Returns None when the endpoint-degree
    variance is zero (e.g. regular graphs), where the correlation is undefined.
    """
    if g.edge_count == 0:
        return None
    deg = g.degrees()
    m = 2 * g.edge_count
    s1 = s2 = s11 = 0.0
    for u, v in g.edges():
        ku, kv = deg[u], deg[v]
        s1 += ku + kv
        s2 += ku * ku + kv * kv
        s11 += 2.0 * ku * kv
    mean = s1 / m
    var = s2 / m - mean * mean
    if var <= 1e-15 * max(1.0, mean * mean):
        return None
    return (s11 / m - mean * mean) / var


def ball(g: Graph, center: int, radius: int) -> set[int]:
    """All nodes within `radius` hops of `center`, center included."""
    if not 0 <= center < g.node_count:
        raise ValueError(f"unknown node {center}")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    seen = {center}
    frontier = [center]
    adj = g.adjacency
    for _ in range(radius):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return seen


def connected_components(g: Graph) -> list[list[int]]:
    """Components as node-id lists, discovered in id order."""
    n = g.node_count
    seen = bytearray(n)
    adj = g.adjacency
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = 1
        comp = [start]
        stack = [start]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = 1
                    comp.append(w)
                    stack.append(w)
        comps.append(comp)
    return comps


def largest_component_nodes(g: Graph) -> list[int]:
    comps = connected_components(g)
    return max(comps, key=len)


def induced_subgraph(g: Graph, nodes: Sequence[int]) -> Graph:
    """Subgraph on `nodes`, remapped to dense ids in the given order."""
    index = {v: i for i, v in enumerate(nodes)}
    adj: list[list[int]] = [[] for _ in nodes]
    for v in nodes:
        row = adj[index[v]]
        for w in g.adjacency[v]:
            if w in index:
                row.append(index[w])
    labels = [g.labels[v] for v in nodes]
    return Graph(adj, labels)


@dataclass(frozen=True)
class LoadOptions:
    """Preprocessing applied while loading an edge list.

    The defaults mirror the usual cleanup for crawled snapshots: direction
    ignored, duplicate edges collapsed, self-loops dropped, and the graph
    restricted to its largest connected component.
    """

    collapse_duplicates: bool = True
    drop_self_loops: bool = True
    largest_component: bool = True


#: Read the file verbatim as a multigraph (round-trips generated edge lists).
RAW = LoadOptions(collapse_duplicates=False, drop_self_loops=False, largest_component=False)


def load_edge_list(source: str | IO[str] | Iterable[str],
                   options: LoadOptions | None = None) -> Graph:
    """Parse whitespace-separated node-id pairs, one edge per line.

    Blank lines and lines starting with '#' are skipped. Node ids may be
    arbitrary integers; they are remapped to dense 0..n-1 ids in first-seen
    order and the original ids kept in Graph.labels.
    """
    if options is None:
        options = LoadOptions()
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            return load_edge_list(fh, options)

    index: dict[int, int] = {}
    labels: list[int] = []
    pairs: list[tuple[int, int]] = []

    def intern(token: str, lineno: int) -> int:
        try:
            raw = int(token)
        except ValueError:
            raise GraphFormatError(f"line {lineno}: non-integer node id {token!r}") from None
        node = index.get(raw)
        if node is None:
            node = len(labels)
            index[raw] = node
            labels.append(raw)
        return node

    for lineno, line in enumerate(source, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected two node ids, got {len(parts)} tokens")
        pairs.append((intern(parts[0], lineno), intern(parts[1], lineno)))

    if options.drop_self_loops:
        pairs = [(u, v) for u, v in pairs if u != v]
    if options.collapse_duplicates:
        seen: set[tuple[int, int]] = set()
        unique = []
        for u, v in pairs:
            key = (u, v) if u <= v else (v, u)
            if key not in seen:
                seen.add(key)
                unique.append(key)
        pairs = unique

    g = Graph.from_edges(len(labels), pairs, labels)
    if options.largest_component:
        if g.node_count == 0:
            raise ValueError("empty graph after preprocessing")
        g = induced_subgraph(g, largest_component_nodes(g))
    if g.node_count == 0 or g.edge_count == 0:
        raise ValueError("empty graph after preprocessing")
    return g


def stats_row(g: Graph) -> dict[str, object]:
    """Summary used by the CLI `stats` command."""
    d = degree_distribution(g)
    mean, ratio = moments(d)
    r = assortativity(g)
    return {
        "nodes": g.node_count,
        "edges": g.edge_count,
        "mean_degree": mean,
        "k2_over_k": ratio,
        "assortativity": "undefined" if r is None else r,
    }
