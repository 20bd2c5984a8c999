"""Exploration techniques: traversals, random walks, degree-weighted draws,
and the stub-level index-scan process that unifies them.

All samplers return a SampleTrace: the ordered node records plus enough
metadata for the estimators to undo the sampling bias later.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .graph import Graph


@dataclass
class SampleTrace:
    """Ordered record of one sampling run.

    coverage is the fraction of distinct sampled nodes over the node count of
    the sampled graph. with_replacement marks walk-style traces whose records
    may repeat; traversal traces never repeat a node.
    """

    technique: str
    seed_node: int
    nodes: list[int]
    degrees: list[int]
    with_replacement: bool
    coverage: float
    x_values: list[float] | None = None

    def __len__(self) -> int:
        return len(self.nodes)

    def distinct_count(self) -> int:
        return len(set(self.nodes))


@dataclass(frozen=True)
class QueueDiscipline:
    """Scheduling rule for the stub queue.

    fifo explores breadth-first, lifo depth-first, randomized_fifo is fifo
    where each stub is enqueued only with probability p (burned-out edges).
    """

    kind: str
    p: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("fifo", "lifo", "randomized_fifo"):
            raise ValueError(f"unknown queue discipline {self.kind!r}")
        if not 0.0 < self.p <= 1.0:
            raise ValueError("stub keep probability must lie in (0, 1]")


FIFO = QueueDiscipline("fifo")
LIFO = QueueDiscipline("lifo")


def randomized_fifo(p: float) -> QueueDiscipline:
    return QueueDiscipline("randomized_fifo", p)


@dataclass(frozen=True)
class StubAssignment:
    """One uniform [0, 1) index per stub, grouped per node."""

    indices: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        flat = [t for row in self.indices for t in row]
        if any(not 0.0 <= t <= 1.0 for t in flat):
            raise ValueError("stub indices must lie in [0, 1]")
        if len(set(flat)) != len(flat):
            raise ValueError("stub indices must be pairwise distinct")

    @property
    def stub_total(self) -> int:
        return sum(len(row) for row in self.indices)


def assign_stub_indices(degrees: Sequence[int], rng: random.Random) -> StubAssignment:
    """Draw one independent uniform index per stub; all indices distinct."""
    while True:
        rows = tuple(tuple(rng.random() for _ in range(k)) for k in degrees)
        flat = [t for row in rows for t in row]
        if len(set(flat)) == len(flat):  # collision has probability ~0; redraw if it happens
            return StubAssignment(rows)


def _check_node(g: Graph, v: int) -> None:
    if not 0 <= v < g.node_count:
        raise ValueError(f"unknown node {v}")


def _make_trace(technique: str, g: Graph, seed: int, nodes: list[int],
                with_replacement: bool) -> SampleTrace:
    degs = [len(g.adjacency[v]) for v in nodes]
    coverage = len(set(nodes)) / g.node_count
    return SampleTrace(technique, seed, nodes, degs, with_replacement, coverage)


def bfs(g: Graph, seed: int, budget: int) -> SampleTrace:
    """Breadth-first trace of min(budget, component size) distinct nodes."""
    _check_node(g, seed)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    adj = g.adjacency
    seen = bytearray(g.node_count)
    seen[seed] = 1
    order = [seed]
    q = deque([seed])
    while q and len(order) < budget:
        u = q.popleft()
        for w in adj[u]:
            if seen[w]:
                continue
            seen[w] = 1
            order.append(w)
            q.append(w)
            if len(order) == budget:
                q.clear()
                break
    return _make_trace("bfs", g, seed, order, False)


def dfs(g: Graph, seed: int, budget: int) -> SampleTrace:
    """Depth-first trace: always descend from the latest discovered node."""
    _check_node(g, seed)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    adj = g.adjacency
    seen = bytearray(g.node_count)
    order: list[int] = []
    stack = [seed]
    while stack and len(order) < budget:
        u = stack.pop()
        if seen[u]:
            continue
        seen[u] = 1
        order.append(u)
        stack.extend(adj[u])
    return _make_trace("dfs", g, seed, order, False)


def _revive(g: Graph, order: list[int], seen: bytearray, rng: random.Random,
            component: set[int] | None) -> tuple[int | None, set[int] | None, bool]:
    """Pick a node to continue a stalled traversal from.

    Prefers an already-sampled node that still has unvisited neighbors; when
    the sampled set is closed (component covered) falls back to an unsampled
    node of the seed's component, if any remains.
    """
    adj = g.adjacency
    candidates = [v for v in order if any(not seen[w] for w in adj[v])]
    if candidates:
        return candidates[rng.randrange(len(candidates))], component, False
    if component is None:
        component = set()
        stack = [order[0]]
        component.add(order[0])
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in component:
                    component.add(w)
                    stack.append(w)
    fresh = sorted(v for v in component if not seen[v])
    if not fresh:
        return None, component, False
    return fresh[rng.randrange(len(fresh))], component, True


def forest_fire(g: Graph, seed: int, budget: int, p: float, rng: random.Random) -> SampleTrace:
    """Burning traversal: each incident edge spreads with probability p.

    The fire is revived from a random already-sampled node whenever it dies
    out before the budget, so the trace always reaches
    min(budget, component size) nodes. With p = 1 this is exactly bfs.
    """
    _check_node(g, seed)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if not 0.0 < p <= 1.0:
        raise ValueError("spread probability must lie in (0, 1]")
    adj = g.adjacency
    seen = bytearray(g.node_count)
    seen[seed] = 1
    order = [seed]
    q = deque([seed])
    component: set[int] | None = None
    while len(order) < budget:
        while q and len(order) < budget:
            u = q.popleft()
            for w in adj[u]:  # one coin per incident edge; parallel edges flip again
                if seen[w]:
                    continue
                if rng.random() < p:
                    seen[w] = 1
                    order.append(w)
                    q.append(w)
                    if len(order) == budget:
                        q.clear()
                        break
        if len(order) >= budget:
            break
        source, component, is_fresh = _revive(g, order, seen, rng, component)
        if source is None:
            break  # seed's component fully sampled
        if is_fresh:
            seen[source] = 1
            order.append(source)
        q.append(source)
    return _make_trace("ff", g, seed, order, False)


def snowball(g: Graph, seed: int, budget: int, names: int, rng: random.Random) -> SampleTrace:
    """Round-based referral: each visited node schedules min(names, k_v)
    uniformly chosen neighbors; revived like forest_fire when stalled.
    With names >= max degree every neighbor is scheduled, i.e. plain bfs.
    """
    _check_node(g, seed)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if names < 1:
        raise ValueError("names must be >= 1")
    adj = g.adjacency
    seen = bytearray(g.node_count)
    seen[seed] = 1
    order = [seed]
    q = deque([seed])
    component: set[int] | None = None
    while len(order) < budget:
        while q and len(order) < budget:
            u = q.popleft()
            nbrs = adj[u]
            take = min(names, len(nbrs))
            picks = nbrs if take == len(nbrs) else [nbrs[i] for i in rng.sample(range(len(nbrs)), take)]
            for w in picks:
                if seen[w]:
                    continue
                seen[w] = 1
                order.append(w)
                q.append(w)
                if len(order) == budget:
                    q.clear()
                    break
        if len(order) >= budget:
            break
        source, component, is_fresh = _revive(g, order, seen, rng, component)
        if source is None:
            break
        if is_fresh:
            seen[source] = 1
            order.append(source)
        q.append(source)
    return _make_trace("sbs", g, seed, order, False)


def random_walk(g: Graph, seed: int, steps: int, rng: random.Random) -> SampleTrace:
    """Simple random walk; records `steps` nodes, the seed first.

    Moves to a uniform incident stub, so parallel edges weight their endpoint
    proportionally and a self-loop is taken with probability 2/k_v.
    """
    _check_node(g, seed)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    adj = g.adjacency
    if steps > 1 and not adj[seed]:
        raise ValueError("walk started on an isolated node")
    nodes = [seed]
    u = seed
    for _ in range(steps - 1):
        nbrs = adj[u]
        u = nbrs[rng.randrange(len(nbrs))]
        nodes.append(u)
    return _make_trace("rw", g, seed, nodes, True)


def mhrw(g: Graph, seed: int, steps: int, rng: random.Random) -> SampleTrace:
    """Degree-corrected walk with uniform stationary law.

    Proposes a uniform neighbor w and accepts with min(1, k_u / k_w); on
    rejection the current node is recorded again. Transition probability to
    each neighbor w is therefore (1/k_u) * min(1, k_u/k_w).
    """
    _check_node(g, seed)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    adj = g.adjacency
    if steps > 1 and not adj[seed]:
        raise ValueError("walk started on an isolated node")
    nodes = [seed]
    u = seed
    ku = len(adj[u])
    for _ in range(steps - 1):
        nbrs = adj[u]
        w = nbrs[rng.randrange(ku)]
        kw = len(adj[w])
        if kw <= ku or rng.random() * kw < ku:
            u = w
            ku = kw
        nodes.append(u)
    return _make_trace("mhrw", g, seed, nodes, True)


class _WeightTree:
    # implicit binary sum-tree over the weights; leaves sit at [m, m + n)
    def __init__(self, weights: Sequence[float]):
        m = 1
        while m < len(weights):
            m <<= 1
        tree = [0.0] * (2 * m)
        tree[m:m + len(weights)] = [float(w) for w in weights]
        for i in range(m - 1, 0, -1):
            tree[i] = tree[2 * i] + tree[2 * i + 1]
        self.m = m
        self.tree = tree

    @property
    def total(self) -> float:
        return self.tree[1]

    def pop(self, rng: random.Random) -> int:
        gas = rng.random() * self.tree[1]
        i = 1
        while i < self.m:
            i <<= 1
            if gas >= self.tree[i]:
                gas -= self.tree[i]
                i += 1
        weight = self.tree[i]
        leaf = i - self.m
        while i:
            self.tree[i] -= weight
            i >>= 1
        return leaf


def weighted_without_replacement(degrees: Sequence[int], budget: int,
                                 rng: random.Random) -> list[int]:
    """Successive degree-proportional draws without replacement.

    Each draw picks a remaining node with probability proportional to its
    degree. Returns `budget` node ids, or fewer if only zero-degree nodes
    remain before the budget is met.
    """
    if budget < 0 or budget > len(degrees):
        raise ValueError("budget must lie in [0, len(degrees)]")
    tree = _WeightTree(degrees)
    out: list[int] = []
    for _ in range(budget):
        if tree.total <= 0:
            break
        out.append(tree.pop(rng))
    return out


def stub_level_traversal(degrees: Sequence[int], assignment: StubAssignment, seed: int,
                         discipline: QueueDiscipline, budget: int,
                         rng: random.Random | None = None,
                         restart: bool = False) -> tuple[Graph, SampleTrace]:
    """Graph realization and node trace from one queue-driven stub scan.

    The pairing of stubs is decided lazily: following a stub matches it with
    the unmatched stub of smallest index anywhere in the graph (possibly one
    of its own node's stubs, realizing a self-loop). A newly hit node joins
    the trace and its remaining stubs are enqueued; a stub of an already
    visited node is simply removed from the queue, so no edge is walked
    twice. Run to completion this realizes exactly a uniform stub matching,
    and the non-seed trace order is the ascending order of per-node minimum
    stub indices - the same law as weighted_without_replacement - whatever
    the queue discipline.

    The queue can drain while unmatched stubs remain (the scan walled itself
    in). By default the trace ends there. With restart=True the scan
    continues from the smallest unmatched stub, hopping to the next node in
    index order, which keeps the equivalence with degree-weighted sampling
    exact on disconnected realizations.
    """
    n = len(degrees)
    if not 0 <= seed < n:
        raise ValueError(f"unknown node {seed}")
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if sum(degrees) % 2:
        raise ValueError("degree sequence has an odd stub total")
    if len(assignment.indices) != n or any(len(row) != k for row, k in zip(assignment.indices, degrees)):
        raise ValueError("stub assignment does not match the degree sequence")
    randomized = discipline.kind == "randomized_fifo"
    if randomized and rng is None:
        raise ValueError("randomized_fifo needs an rng for the stub-loss coins")

    owner: list[int] = []
    tvals: list[float] = []
    node_stubs: list[list[int]] = []
    for v, row in enumerate(assignment.indices):
        ids = []
        for t in row:
            ids.append(len(owner))
            owner.append(v)
            tvals.append(t)
        node_stubs.append(ids)
    total = len(owner)

    order = sorted(range(total), key=tvals.__getitem__)  # scan order
    pos = 0
    matched = bytearray(total)
    visited = bytearray(n)
    visited[seed] = 1
    trace = [seed]
    edges: list[tuple[int, int]] = []
    q: deque[int] = deque()
    lifo = discipline.kind == "lifo"

    def enqueue(s: int) -> None:
        if randomized and rng.random() >= discipline.p:
            return  # stub burned out: never followed, stays matchable
        q.append(s)

    for s in node_stubs[seed]:
        enqueue(s)

    while len(trace) < budget:
        while q and len(trace) < budget:
            a = q.pop() if lifo else q.popleft()
            if matched[a]:
                continue  # was matched as a partner earlier: lazily removed
            while matched[order[pos]] or order[pos] == a:
                pos += 1  # advancing past a is safe: a is matched right below
            b = order[pos]
            matched[a] = 1
            matched[b] = 1
            edges.append((owner[a], owner[b]))
            w = owner[b]
            if not visited[w]:
                visited[w] = 1
                trace.append(w)
                if len(trace) == budget:
                    break
                for s in node_stubs[w]:
                    if s != b:
                        enqueue(s)
        if len(trace) >= budget or not restart:
            break
        while pos < total and matched[order[pos]]:
            pos += 1
        if pos == total:
            break  # every stub matched
        s0 = order[pos]
        w = owner[s0]
        if visited[w]:
            q.append(s0)  # a burned-out stub resurfaces; follow it directly
        else:
            visited[w] = 1
            trace.append(w)
            if len(trace) >= budget:
                break
            for s in node_stubs[w]:
                enqueue(s)

    realized = Graph.from_edges(n, edges)
    degs = [degrees[v] for v in trace]
    sample = SampleTrace("stub", seed, trace, degs, False, len(trace) / n)
    return realized, sample


# --- trace CSV round-trip -------------------------------------------------

def trace_to_csv(trace: SampleTrace, out: IO[str], labels: Sequence[int] | None = None,
                 rng_seed: int | None = None) -> None:
    """Write a trace as CSV with '#' metadata lines before the header."""
    meta = (f"# technique={trace.technique} seed_node={trace.seed_node} "
            f"f={trace.coverage:.12g} with_replacement={str(trace.with_replacement).lower()}")
    if rng_seed is not None:
        meta += f" rng_seed={rng_seed}"
    out.write(meta + "\n")
    out.write("position,node,degree,x_value\n")
    for i, (v, k) in enumerate(zip(trace.nodes, trace.degrees)):
        name = labels[v] if labels is not None else v
        x = "" if trace.x_values is None else f"{trace.x_values[i]:.12g}"
        out.write(f"{i},{name},{k},{x}\n")


def trace_from_csv(source: str | IO[str] | Iterable[str]) -> SampleTrace:
    """Read a trace written by trace_to_csv. Node ids are kept as written."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            return trace_from_csv(fh)
    meta: dict[str, str] = {}
    nodes: list[int] = []
    degrees: list[int] = []
    xs: list[float] = []
    have_x = False
    header_seen = False
    for line in source:
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            for tok in text[1:].split():
                if "=" in tok:
                    key, val = tok.split("=", 1)
                    meta[key] = val
            continue
        if not header_seen:
            header_seen = True  # column header
            continue
        parts = text.split(",")
        if len(parts) != 4:
            raise ValueError(f"malformed trace row: {text!r}")
        nodes.append(int(parts[1]))
        degrees.append(int(parts[2]))
        if parts[3]:
            have_x = True
            xs.append(float(parts[3]))
        else:
            xs.append(0.0)
    if not nodes:
        raise ValueError("trace file holds no records")
    return SampleTrace(
        technique=meta.get("technique", "unknown"),
        seed_node=int(meta.get("seed_node", nodes[0])),
        nodes=nodes,
        degrees=degrees,
        with_replacement=meta.get("with_replacement", "false") == "true",
        coverage=float(meta.get("f", "nan")),
        x_values=xs if have_x else None,
    )
