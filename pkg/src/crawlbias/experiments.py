"""Replicated desk-scale experiments with deterministic seeding and CSV output."""

from __future__ import annotations

import csv
import hashlib
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Callable, Mapping, Sequence

from . import analytic
from .estimators import ConvergenceError, NeighborhoodScheme, bfs_correct, rmse_compare, rw_correct
from .generate import configuration_model, degree_sequence_from_distribution, rewire_to_assortativity
from .graph import DegreeDistribution, Graph, degree_distribution, largest_component_nodes, load_edge_list
from .samplers import (FIFO, SampleTrace, assign_stub_indices, bfs, dfs, forest_fire, mhrw,
                       random_walk, snowball, stub_level_traversal, weighted_without_replacement)


class ConfigError(ValueError):
    """An experiment configuration is malformed."""


def derive_seed(master: int, replica: int, tag: str) -> int:
    """Per-replica, per-technique rng seed.

    First 8 bytes, big-endian, of sha256("{master}|{replica}|{tag}"): stable
    across platforms and runs, and any replica can be recomputed in isolation.
    """
    digest = hashlib.sha256(f"{master}|{replica}|{tag}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def parse_pk_spec(spec: object) -> DegreeDistribution:
    """Degree-distribution shorthand used by configs and the CLI.

    regular:K              all nodes degree K
    bimodal:K1:K2:W1       degree K1 with fraction W1, K2 with 1-W1
    powerlaw:G:KMIN:KMAX   p_k proportional to k^-G on KMIN..KMAX
    {"1": 0.5, "3": 0.5}   explicit fractions (JSON object)
    """
    if isinstance(spec, Mapping):
        return DegreeDistribution({int(k): float(p) for k, p in spec.items()})
    if not isinstance(spec, str):
        raise ConfigError(f"cannot parse degree distribution from {spec!r}")
    parts = spec.split(":")
    try:
        if parts[0] == "regular" and len(parts) == 2:
            return DegreeDistribution({int(parts[1]): 1.0})
        if parts[0] == "bimodal" and len(parts) == 4:
            k1, k2, w1 = int(parts[1]), int(parts[2]), float(parts[3])
            return DegreeDistribution({k1: w1, k2: 1.0 - w1})
        if parts[0] == "powerlaw" and len(parts) == 4:
            return truncated_power_law(float(parts[1]), int(parts[2]), int(parts[3]))
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"bad degree distribution spec {spec!r}: {exc}") from None
    raise ConfigError(f"bad degree distribution spec {spec!r}")


def truncated_power_law(gamma: float, k_min: int, k_max: int) -> DegreeDistribution:
    if k_min < 1 or k_max < k_min:
        raise ConfigError("power law needs 1 <= k_min <= k_max")
    weights = {k: k ** -gamma for k in range(k_min, k_max + 1)}
    return DegreeDistribution(weights, normalize=True)


@dataclass(frozen=True)
class TechniqueSpec:
    """One sampling technique plus its parameters."""

    name: str
    p: float | None = None       # forest fire spread probability
    names: int | None = None     # snowball referrals per node

    _KNOWN = ("bfs", "dfs", "ff", "sbs", "rw", "mhrw", "wwor", "stub")

    def __post_init__(self) -> None:
        if self.name not in self._KNOWN:
            raise ConfigError(f"unknown technique {self.name!r}")
        if self.name == "ff" and self.p is None:
            raise ConfigError("technique ff needs its spread probability p")
        if self.name == "sbs" and self.names is None:
            raise ConfigError("technique sbs needs its referral count")

    @property
    def tag(self) -> str:
        if self.name == "ff":
            return f"ff:p={self.p:g}"
        if self.name == "sbs":
            return f"sbs:n={self.names}"
        return self.name

    @classmethod
    def from_json(cls, obj: object) -> "TechniqueSpec":
        if isinstance(obj, str):
            return cls(obj)
        if isinstance(obj, Mapping):
            return cls(obj.get("name", ""), p=obj.get("p"), names=obj.get("names"))
        raise ConfigError(f"bad technique entry {obj!r}")


@dataclass(frozen=True)
class GraphSource:
    kind: str                    # generate | file
    pk: str | None = None
    nodes: int = 0
    target_assortativity: float | None = None
    path: str | None = None

    def __post_init__(self) -> None:
        if self.kind == "generate":
            if not self.pk or self.nodes < 1:
                raise ConfigError("generate source needs pk and nodes >= 1")
        elif self.kind == "file":
            if not self.path:
                raise ConfigError("file source needs a path")
        else:
            raise ConfigError(f"unknown graph source {self.kind!r}")

    def model(self) -> DegreeDistribution | None:
        return parse_pk_spec(self.pk) if self.kind == "generate" else None


@dataclass
class ExperimentConfig:
    """Mirror of the JSON config document."""

    source: GraphSource
    techniques: list[TechniqueSpec]
    f_grid: list[float]
    replicas: int
    master_seed: int
    out_dir: str | None = None
    workers: int = 1
    mode: str = "bias"           # bias | correction | compare | assortativity | analytic
    assortativity_targets: list[float] = field(default_factory=list)
    depth: int = 2
    rewire_tolerance: float = 0.02

    def __post_init__(self) -> None:
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if not self.f_grid and self.mode != "compare":
            raise ConfigError("f_grid must hold at least one coverage value")
        if any(not 0.0 < f <= 1.0 for f in self.f_grid):
            raise ConfigError("coverage values must lie in (0, 1]")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.mode not in ("bias", "correction", "compare", "assortativity", "analytic"):
            raise ConfigError(f"unknown mode {self.mode!r}")

    @classmethod
    def from_json(cls, doc: Mapping) -> "ExperimentConfig":
        if not isinstance(doc, Mapping):
            raise ConfigError("config must be a JSON object")
        graph = doc.get("graph")
        if not isinstance(graph, Mapping):
            raise ConfigError("config needs a graph section")
        if "generate" in graph:
            gen = graph["generate"]
            source = GraphSource("generate", pk=_pk_to_str(gen.get("pk")),
                                 nodes=int(gen.get("nodes", 0)),
                                 target_assortativity=gen.get("assortativity"))
        elif "file" in graph:
            source = GraphSource("file", path=str(graph["file"]))
        else:
            raise ConfigError("graph section needs either 'generate' or 'file'")
        techniques = [TechniqueSpec.from_json(t) for t in doc.get("techniques", [])]
        return cls(
            source=source,
            techniques=techniques,
            f_grid=[float(f) for f in doc.get("f_grid", [])],
            replicas=int(doc.get("replicas", 1)),
            master_seed=int(doc.get("seed", 0)),
            out_dir=doc.get("out_dir"),
            workers=int(doc.get("workers", 1)),
            mode=str(doc.get("mode", "bias")),
            assortativity_targets=[float(r) for r in doc.get("assortativity_targets", [])],
            depth=int(doc.get("depth", 2)),
            rewire_tolerance=float(doc.get("rewire_tolerance", 0.02)),
        )

    def metadata_line(self) -> str:
        doc = {
            "graph": ({"generate": {"pk": self.source.pk, "nodes": self.source.nodes,
                                    "assortativity": self.source.target_assortativity}}
                      if self.source.kind == "generate" else {"file": self.source.path}),
            "techniques": [t.tag for t in self.techniques],
            "f_grid": self.f_grid,
            "replicas": self.replicas,
            "seed": self.master_seed,
            "mode": self.mode,
        }
        return "config " + json.dumps(doc, sort_keys=True)


def _pk_to_str(pk: object) -> str:
    if isinstance(pk, str):
        return pk
    if isinstance(pk, Mapping):
        return json.dumps(pk, sort_keys=True)
    raise ConfigError(f"bad pk entry {pk!r}")


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    return ExperimentConfig.from_json(doc)


def _parse_pk_maybe_json(spec: str) -> DegreeDistribution:
    if spec.lstrip().startswith("{"):
        return parse_pk_spec(json.loads(spec))
    return parse_pk_spec(spec)


def _build_graph(source: GraphSource, rng: random.Random) -> Graph:
    if source.kind == "file":
        return load_edge_list(source.path)
    d = _parse_pk_maybe_json(source.pk)
    seq = degree_sequence_from_distribution(d, source.nodes)
    g = configuration_model(seq, rng)
    if source.target_assortativity is not None:
        g = rewire_to_assortativity(g, source.target_assortativity, rng).graph
    return g


def run_technique(g: Graph, component: Sequence[int], tech: TechniqueSpec,
                  budget: int, rng: random.Random) -> SampleTrace:
    """One sampling run; the start node is uniform over the largest component."""
    seed = component[rng.randrange(len(component))]
    if tech.name == "bfs":
        return bfs(g, seed, budget)
    if tech.name == "dfs":
        return dfs(g, seed, budget)
    if tech.name == "ff":
        return forest_fire(g, seed, budget, tech.p, rng)
    if tech.name == "sbs":
        return snowball(g, seed, budget, tech.names, rng)
    if tech.name == "rw":
        return random_walk(g, seed, budget, rng)
    if tech.name == "mhrw":
        return mhrw(g, seed, budget, rng)
    if tech.name == "wwor":
        degs = g.degrees()
        nodes = weighted_without_replacement(degs, min(budget, g.node_count), rng)
        return SampleTrace("wwor", seed, nodes, [degs[v] for v in nodes], False,
                           len(set(nodes)) / g.node_count)
    # stub: simulate on this graph's degree sequence under a fresh matching
    degs = g.degrees()
    assignment = assign_stub_indices(degs, rng)
    _, trace = stub_level_traversal(degs, assignment, seed, FIFO, budget, restart=True)
    return trace


def _bias_replica(args: tuple) -> tuple[int, dict[str, list[float]], dict[str, int]]:
    cfg, replica, shared_graph = args
    g = shared_graph
    if g is None:
        g = _build_graph(cfg.source, random.Random(derive_seed(cfg.master_seed, replica, "graph")))
    component = sorted(largest_component_nodes(g))
    n = g.node_count
    budgets = {f: max(1, round(f * n)) for f in cfg.f_grid}
    max_budget = max(budgets.values())
    means: dict[str, list[float]] = {}
    short: dict[str, int] = {}
    for tech in cfg.techniques:
        rng = random.Random(derive_seed(cfg.master_seed, replica, tech.tag))
        trace = run_technique(g, component, tech, max_budget, rng)
        row = []
        shortfall = 0
        for f in cfg.f_grid:
            m = budgets[f]
            if m > len(trace.degrees):
                shortfall += 1
                m = len(trace.degrees)
            row.append(sum(trace.degrees[:m]) / m)
        means[tech.tag] = row
        short[tech.tag] = shortfall
    return replica, means, short


def run_bias_curves(cfg: ExperimentConfig) -> list[dict[str, object]]:
    """Mean sampled degree against coverage, per technique, with the
    analytic curve, the stationary walk level, and the true mean alongside."""
    if not cfg.techniques:
        raise ConfigError("bias curves need at least one technique")
    shared = None
    if cfg.source.kind == "file":
        shared = _build_graph(cfg.source, random.Random(derive_seed(cfg.master_seed, 0, "graph")))
    model = cfg.source.model() if cfg.source.kind == "generate" else degree_distribution(shared)

    jobs = [(cfg, r, shared) for r in range(cfg.replicas)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_bias_replica, jobs))
    else:
        results = [_bias_replica(job) for job in jobs]
    results.sort(key=lambda item: item[0])  # aggregation independent of completion order

    rw_mean = analytic.rw_expected(model)[1]
    true_mean = model.mean()
    rows = []
    for tech in cfg.techniques:
        per_f = list(zip(*(means[tech.tag] for _, means, _ in results)))
        flagged = sum(short[tech.tag] > 0 for _, _, short in results)
        for f, vals in zip(cfg.f_grid, per_f):
            mean = sum(vals) / len(vals)
            var = sum((v - mean) ** 2 for v in vals) / len(vals)
            if tech.name == "rw":
                analytic_mean = rw_mean       # stationary visit law is degree-weighted
            elif tech.name == "mhrw":
                analytic_mean = true_mean     # corrected walk targets the uniform law
            else:
                analytic_mean = analytic.mean_q_of_f(model, f)
            rows.append({
                "technique": tech.tag,
                "f": f,
                "replicas": len(vals),
                "empirical_mean": mean,
                "empirical_std": var ** 0.5,
                "analytic_mean": analytic_mean,
                "rw_mean": rw_mean,
                "true_mean": true_mean,
                "flagged": flagged,
            })
    return rows


def _correction_replica(args: tuple) -> tuple[int, list[dict[str, object]]]:
    cfg, replica, shared_graph = args
    g = shared_graph
    if g is None:
        g = _build_graph(cfg.source, random.Random(derive_seed(cfg.master_seed, replica, "graph")))
    component = sorted(largest_component_nodes(g))
    n = g.node_count
    rows = []
    for f in cfg.f_grid:
        rng = random.Random(derive_seed(cfg.master_seed, replica, f"correction:{f:g}"))
        budget = max(1, round(f * n))
        seed = component[rng.randrange(len(component))]
        trace = bfs(g, seed, budget)
        f_real = len(trace.nodes) / n
        sampled_mean = sum(trace.degrees) / len(trace.degrees)
        row = {
            "f": f,
            "replica": replica,
            "sampled_mean": sampled_mean,
            "rw_corrected": rw_correct(trace).mean,
            "bfs_corrected": "",
            "converged": 1,
            "iterations": 0,
            "residual": "",
        }
        try:
            rep = bfs_correct(trace, f_real)
            row["bfs_corrected"] = rep.mean
            row["iterations"] = rep.iterations
            row["residual"] = rep.residual
        except ConvergenceError as exc:            # recorded, not fatal
            row["converged"] = 0
            row["iterations"] = exc.iterations
            row["residual"] = exc.residual
        rows.append(row)
    return replica, rows


def run_correction_eval(cfg: ExperimentConfig) -> list[dict[str, object]]:
    """Sampled vs corrected mean degree of traversal samples at each coverage.

    Emits one row per (f, replica) plus an averaged row per f (replica='avg');
    the true mean degree rides along in every row.
    """
    shared = None
    if cfg.source.kind == "file":
        shared = _build_graph(cfg.source, random.Random(derive_seed(cfg.master_seed, 0, "graph")))
    model = cfg.source.model() if cfg.source.kind == "generate" else degree_distribution(shared)
    true_mean = model.mean()

    jobs = [(cfg, r, shared) for r in range(cfg.replicas)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_correction_replica, jobs))
    else:
        results = [_correction_replica(job) for job in jobs]
    results.sort(key=lambda item: item[0])

    rows: list[dict[str, object]] = []
    for _, reps in results:
        for row in reps:
            row["true_mean"] = true_mean
            rows.append(row)
    for i, f in enumerate(cfg.f_grid):
        group = [reps[i] for _, reps in results]
        ok = [r for r in group if r["converged"]]
        rows.append({
            "f": f,
            "replica": "avg",
            "sampled_mean": _avg(group, "sampled_mean"),
            "rw_corrected": _avg(group, "rw_corrected"),
            "bfs_corrected": _avg(ok, "bfs_corrected") if ok else "",
            "converged": len(ok),
            "iterations": _avg(group, "iterations"),
            "residual": "",
            "true_mean": true_mean,
        })
    return rows


def _avg(rows: Sequence[Mapping[str, object]], key: str) -> float:
    return sum(float(r[key]) for r in rows) / len(rows)


def run_compare(cfg: ExperimentConfig) -> list[dict[str, object]]:
    """Neighborhood estimator vs coverage-corrected traversal at equal sample
    sizes, on a fully known graph."""
    rng = random.Random(derive_seed(cfg.master_seed, 0, "graph"))
    g = _build_graph(cfg.source, rng)
    x = [float(k) for k in g.degrees()]
    cmp_rng = random.Random(derive_seed(cfg.master_seed, 0, "compare"))
    return rmse_compare(g, x, cfg.replicas, cmp_rng, depth=cfg.depth)


def run_assortativity_sweep(cfg: ExperimentConfig) -> list[dict[str, object]]:
    """Bias curves after rewiring one generated graph to each target r.

    Target r = 0 (or an empty target list entry) means the unrewired graph.
    A target the rewiring cannot reach within tolerance is reported with
    rewire_ok=0 and its curve rows are skipped.
    """
    if cfg.source.kind != "generate":
        raise ConfigError("assortativity sweep needs a generated graph source")
    if not cfg.assortativity_targets:
        raise ConfigError("assortativity sweep needs assortativity_targets")
    base = _build_graph(cfg.source, random.Random(derive_seed(cfg.master_seed, 0, "graph")))
    model = cfg.source.model()
    rows: list[dict[str, object]] = []
    for target in cfg.assortativity_targets:
        if target == 0.0:
            g, achieved, ok = base, _safe_r(base), 1
        else:
            rng = random.Random(derive_seed(cfg.master_seed, 0, f"rewire:{target:g}"))
            result = rewire_to_assortativity(base, target, rng, tolerance=cfg.rewire_tolerance)
            g, achieved = result.graph, result.achieved_r
            ok = int(abs(achieved - target) <= cfg.rewire_tolerance)
        if not ok:
            rows.append({"target_r": target, "achieved_r": achieved, "rewire_ok": 0,
                         "technique": "", "f": "", "replicas": "", "empirical_mean": "",
                         "analytic_mean": "", "rw_mean": "", "true_mean": ""})
            continue
        sub = ExperimentConfig(
            source=cfg.source, techniques=cfg.techniques, f_grid=cfg.f_grid,
            replicas=cfg.replicas, master_seed=derive_seed(cfg.master_seed, 0, f"sweep:{target:g}"),
            workers=cfg.workers, mode="bias",
        )
        for row in _bias_rows_on_fixed_graph(sub, g, model):
            row.update({"target_r": target, "achieved_r": achieved, "rewire_ok": 1})
            rows.append(row)
    return rows


def _safe_r(g: Graph) -> float:
    from .graph import assortativity
    r = assortativity(g)
    return float("nan") if r is None else r


def _bias_rows_on_fixed_graph(cfg: ExperimentConfig, g: Graph,
                              model: DegreeDistribution) -> list[dict[str, object]]:
    results = [_bias_replica((cfg, r, g)) for r in range(cfg.replicas)]
    results.sort(key=lambda item: item[0])
    rw_mean = analytic.rw_expected(model)[1]
    true_mean = model.mean()
    rows = []
    for tech in cfg.techniques:
        per_f = list(zip(*(means[tech.tag] for _, means, _ in results)))
        flagged = sum(short[tech.tag] > 0 for _, _, short in results)
        for f, vals in zip(cfg.f_grid, per_f):
            mean = sum(vals) / len(vals)
            rows.append({
                "technique": tech.tag, "f": f, "replicas": len(vals),
                "empirical_mean": mean,
                "analytic_mean": analytic.mean_q_of_f(model, f),
                "rw_mean": rw_mean, "true_mean": true_mean, "flagged": flagged,
            })
    return rows


def write_rows_csv(rows: Sequence[Mapping[str, object]], columns: Sequence[str],
                   out: IO[str], metadata: Sequence[str] = ()) -> None:
    """Deterministic CSV: '#' metadata lines, header, then rows in order."""
    for line in metadata:
        out.write(f"# {line}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt_cell(row.get(c, "")) for c in columns])


def _fmt_cell(v: object) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


BIAS_COLUMNS = ["technique", "f", "replicas", "empirical_mean", "empirical_std",
                "analytic_mean", "rw_mean", "true_mean", "flagged"]
CORRECTION_COLUMNS = ["f", "replica", "sampled_mean", "bfs_corrected", "rw_corrected",
                      "true_mean", "converged", "iterations", "residual"]
SWEEP_COLUMNS = ["target_r", "achieved_r", "rewire_ok", "technique", "f", "replicas",
                 "empirical_mean", "analytic_mean", "rw_mean", "true_mean"]
