"""Bias-corrected estimation from sample traces and neighborhood samples."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import IO, Mapping, Sequence

from .analytic import _inclusion, f_of_t, t_of_f
from .graph import DegreeDistribution, Graph, ball
from .samplers import SampleTrace, bfs


class ConvergenceError(RuntimeError):
    """The coverage-matching solve did not reach tolerance."""

    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


@dataclass
class EstimationReport:
    """Outcome of one correction: point estimate plus solver diagnostics."""

    technique: str
    mean: float
    distribution: DegreeDistribution | None = None
    mean_degree: float | None = None
    total: float | None = None
    iterations: int = 0
    t_value: float | None = None
    residual: float | None = None


def empirical_q(trace: SampleTrace) -> DegreeDistribution:
    """Observed degree mix of a trace, with multiplicity."""
    return DegreeDistribution.from_sequence(trace.degrees)


def _resolve_x(trace: SampleTrace, x: Sequence[float] | None) -> list[float]:
    # explicit argument wins; then values carried on the trace; then degrees
    if x is None:
        x = trace.x_values
    if x is None:
        return [float(k) for k in trace.degrees]
    if len(x) != len(trace.nodes):
        raise ValueError("x must supply one value per trace record")
    return [float(v) for v in x]


def rw_correct(trace: SampleTrace, x: Sequence[float] | None = None) -> EstimationReport:
    """Undo stationary degree-proportional inclusion (random-walk samples).

    Every record is weighted by 1/k_v:

        x_hat = sum(x(v)/k_v) / sum(1/k_v)

    With x omitted the estimate is the mean degree |S| / sum(1/k_v). The
    corrected degree distribution reweights the observed mix by 1/k. Being a
    ratio estimator, the output is invariant under duplicating the trace.
    """
    if not trace.nodes:
        raise ValueError("empty trace")
    if any(k <= 0 for k in trace.degrees):
        raise ValueError("zero-degree record: 1/k weight undefined")
    xs = _resolve_x(trace, x)
    inv = [1.0 / k for k in trace.degrees]
    denom = sum(inv)
    est = sum(xv * w for xv, w in zip(xs, inv)) / denom
    q = empirical_q(trace)
    p_hat = DegreeDistribution({k: qk / k for k, qk in q.items()}, normalize=True)
    return EstimationReport("rw-corrected", est, p_hat, p_hat.mean())


def mhrw_correct(trace: SampleTrace, x: Sequence[float] | None = None) -> EstimationReport:
    """Plain mean: the degree-corrected walk already samples uniformly."""
    if not trace.nodes:
        raise ValueError("empty trace")
    xs = _resolve_x(trace, x)
    q = empirical_q(trace)
    return EstimationReport("mhrw", sum(xs) / len(xs), q, q.mean())


def bfs_correct_at_t(q_hat: DegreeDistribution, t: float) -> DegreeDistribution:
    """Invert the coverage-time inclusion at a known scan time t.

    A degree-k node is included by time t with probability 1 - (1-t)^k, so

        p_hat_k  proportional to  q_hat_k / (1 - (1-t)^k)

    Feeding p_hat forward through the same inclusion map returns q_hat.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError("t must lie in (0, 1]: inclusion weights vanish at t = 0")
    weighted = {}
    for k, qk in q_hat.items():
        w = _inclusion(t, k)
        if w <= 0.0:
            raise ValueError(f"degree {k} has zero inclusion probability at t={t}")
        weighted[k] = qk / w
    return DegreeDistribution(weighted, normalize=True)


def bfs_correct(trace: SampleTrace, f_real: float, x: Sequence[float] | None = None,
                *, tol: float = 1e-8, max_iter: int = 500) -> EstimationReport:
    """Correct an early traversal sample using its known coverage f_real.

    The scan time t is not observable, but it is pinned by consistency: the
    corrected distribution p_hat(t) must predict the observed coverage,
    f(p_hat(t), t) = f_real. That residual is negative near t = 0 and equals
    1 - f_real at t = 1, so a sign-changing bracket always exists and
    bisection locates t*. (A damped fixed-point fallback covers the defensive
    case of a missing bracket.) Records are then weighted by
    1 / (1 - (1-t*)^k_v) and averaged as a ratio estimator.
    """
    if trace.with_replacement:
        raise ValueError("coverage-based correction needs a without-replacement trace")
    if not trace.nodes:
        raise ValueError("empty trace")
    if not 0.0 < f_real <= 1.0:
        raise ValueError("f_real must lie in (0, 1]")
    if any(k <= 0 for k in trace.degrees):
        raise ValueError("zero-degree record cannot be coverage-corrected")
    q_hat = empirical_q(trace)

    def residual(t: float) -> float:
        return f_of_t(bfs_correct_at_t(q_hat, t), t) - f_real

    iterations = 0
    t_star = None
    res_star = None

    r_hi = residual(1.0)
    iterations += 1
    if abs(r_hi) <= tol:
        t_star, res_star = 1.0, r_hi
    elif r_hi > 0.0:
        lo, hi = 0.0, 1.0  # residual(0+) = -f_real < 0 <= residual(1)
        while iterations < max_iter:
            iterations += 1
            mid = 0.5 * (lo + hi)
            r = residual(mid)
            if abs(r) <= tol:
                t_star, res_star = mid, r
                break
            if r < 0.0:
                lo = mid
            else:
                hi = mid
        else:
            raise ConvergenceError(f"no t with |f residual| <= {tol} after {max_iter} iterations",
                                   iterations, residual(0.5 * (lo + hi)))
    else:
        # no sign change (cannot occur for traces free of zero degrees);
        # damped fixed point on t <- t + 0.5 * (t_of_f(p_hat(t), f_real) - t)
        t = 0.5
        r = r_hi
        while iterations < max_iter:
            iterations += 1
            p_hat = bfs_correct_at_t(q_hat, t)
            t = t + 0.5 * (t_of_f(p_hat, min(f_real, 1.0 - p_hat.get(0))) - t)
            r = residual(t)
            if abs(r) <= tol:
                t_star, res_star = t, r
                break
        else:
            raise ConvergenceError(f"fixed point did not reach |f residual| <= {tol}",
                                   iterations, r)

    p_hat = bfs_correct_at_t(q_hat, t_star)
    xs = _resolve_x(trace, x)
    inv = [1.0 / _inclusion(t_star, k) for k in trace.degrees]
    denom = sum(inv)
    est = sum(xv * w for xv, w in zip(xs, inv)) / denom
    return EstimationReport("bfs-corrected", est, p_hat, p_hat.mean(),
                            iterations=iterations, t_value=t_star, residual=res_star)


# --- arbitrary-topology unbiased totals ------------------------------------

_VARIANTS = ("trivial", "extreme", "half_radius", "half_radius_extended")


@dataclass(frozen=True)
class NeighborhoodScheme:
    """Maps each possible seed w to an estimation set Q(w) built from balls.

    depth i is the sampling radius: the observed sample around a seed is the
    full ball B_i(seed). Variants:

      trivial               Q(w) = {w}
      extreme               Q(special) = B_i(special), else {w}
      half_radius           Q(w) = B_{i//2}(w)
      half_radius_extended  Q(w) = B_{i//2}(w) union {v : B_i(v) subset B_i(w)}

    seed_probs is the seed-selection law p(w) (uniform when None).
    """

    variant: str
    depth: int
    special: int | None = None
    seed_probs: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown scheme variant {self.variant!r}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.variant == "extreme" and self.special is None:
            raise ValueError("extreme scheme needs its special node")
        if self.seed_probs is not None:
            if any(p <= 0 for p in self.seed_probs):
                raise ValueError("seed probabilities must be positive")
            if abs(sum(self.seed_probs) - 1.0) > 1e-9:
                raise ValueError("seed probabilities must sum to 1")


def _seed_probs(scheme: NeighborhoodScheme, n: int) -> Sequence[float]:
    if scheme.seed_probs is None:
        return [1.0 / n] * n
    if len(scheme.seed_probs) != n:
        raise ValueError("seed_probs length must equal the node count")
    return scheme.seed_probs


def arbitrary_topology_estimate(g: Graph, x: Sequence[float], seed: int,
                                scheme: NeighborhoodScheme,
                                mode: str = "sample_only") -> EstimationReport:
    """Unbiased total from one neighborhood sample on a known-size graph.

    With inclusion weight pi(v) = sum of p(w) over seeds w whose Q(w)
    contains v, the estimate

        x_hat_tot = sum_{v in Q(seed)} x(v) / pi(v)

    satisfies E[x_hat_tot] = sum_v x(v) exactly, for any scheme. The report
    carries the total and its per-node mean x_hat_tot / |V|.

    mode 'sample_only' additionally asserts that every x value read and
    every ball entering a pi lies inside the observed sample B_depth(seed);
    the extended variant needs global ball comparisons, hence mode 'oracle'.
    """
    if mode not in ("sample_only", "oracle"):
        raise ValueError(f"unknown mode {mode!r}")
    if len(x) != g.node_count:
        raise ValueError("x must supply one value per node")
    n = g.node_count
    sample_only = mode == "sample_only"
    if sample_only and scheme.variant == "half_radius_extended":
        raise ValueError("extended scheme needs oracle mode: its inclusion sets "
                         "compare balls of unsampled nodes")
    probs = _seed_probs(scheme, n)
    if sample_only and scheme.variant == "half_radius" and scheme.seed_probs is not None:
        if any(abs(p - 1.0 / n) > 1e-15 for p in scheme.seed_probs):
            raise ValueError("half_radius inclusion weights are sample-computable "
                             "only under uniform seed selection")

    sample = ball(g, seed, scheme.depth)

    if scheme.variant == "trivial":
        q_set = [seed]
        pi = {seed: probs[seed]}
    elif scheme.variant == "extreme":
        v_star = scheme.special
        if not 0 <= v_star < n:
            raise ValueError(f"unknown special node {v_star}")
        if seed == v_star:
            q_set = sorted(sample)
            pi = {v: probs[v] + (probs[v_star] if v != v_star else 0.0) for v in q_set}
        else:
            q_set = [seed]
            # ball symmetry: seed lies in B_i(v*) iff v* lies in B_i(seed)
            extra = probs[v_star] if v_star in sample else 0.0
            pi = {seed: probs[seed] + extra}
    elif scheme.variant == "half_radius":
        half = scheme.depth // 2
        q_set = sorted(ball(g, seed, half))
        pi = {}
        for v in q_set:
            bv = ball(g, v, half)
            if sample_only and not bv <= sample:
                raise RuntimeError("half-radius ball escaped the observed sample")
            pi[v] = sum(probs[w] for w in bv)
    else:  # half_radius_extended, oracle only
        half = scheme.depth // 2
        big = [frozenset(ball(g, w, scheme.depth)) for w in range(n)]
        pi_acc = [0.0] * n
        q_of_seed: list[int] | None = None
        for w in range(n):
            q_w = set(ball(g, w, half))
            bw = big[w]
            q_w.update(v for v in range(n) if big[v] <= bw)
            for v in q_w:
                pi_acc[v] += probs[w]
            if w == seed:
                q_of_seed = sorted(q_w)
        q_set = q_of_seed
        pi = {v: pi_acc[v] for v in q_set}

    if sample_only and any(v not in sample for v in q_set):
        raise RuntimeError("estimation set escaped the observed sample")

    total = sum(x[v] / pi[v] for v in q_set)
    return EstimationReport(f"arb-{scheme.variant}", total / n, total=total)


def rmse_compare(g: Graph, x: Sequence[float], replicas: int, rng: random.Random,
                 *, depth: int = 2, schemes: Sequence[NeighborhoodScheme] | None = None,
                 include_corrected_traversal: bool = True) -> list[dict[str, object]]:
    """Head-to-head RMSE of neighborhood estimators and coverage-corrected
    traversal on equal sample sizes.

    Each replica draws a uniform seed; every scheme estimates from B_depth(seed),
    and the corrected-traversal entry consumes a breadth-first sample of the
    same size |B_depth(seed)| from the same seed. Estimates are per-node means
    x_hat_tot / |V|; RMSE is against the true mean of x.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if schemes is None:
        schemes = [NeighborhoodScheme("half_radius", depth)]
    n = g.node_count
    truth = sum(x) / n
    per_method: dict[str, list[float]] = {}
    diags: dict[str, list[tuple[int, float]]] = {}
    for _ in range(replicas):
        seed = rng.randrange(n)
        for scheme in schemes:
            mode = "oracle" if scheme.variant == "half_radius_extended" else "sample_only"
            rep = arbitrary_topology_estimate(g, x, seed, scheme, mode)
            per_method.setdefault(rep.technique, []).append(rep.mean)
        if include_corrected_traversal:
            size = len(ball(g, seed, depth))
            trace = bfs(g, seed, size)
            xs = [x[v] for v in trace.nodes]
            rep = bfs_correct(trace, len(trace) / n, xs)
            per_method.setdefault(rep.technique, []).append(rep.mean)
            diags.setdefault(rep.technique, []).append((rep.iterations, abs(rep.residual)))
    rows = []
    for method, vals in per_method.items():
        rmse = (sum((v - truth) ** 2 for v in vals) / len(vals)) ** 0.5
        dd = diags.get(method)
        rows.append({
            "method": method,
            "mean_estimate": sum(vals) / len(vals),
            "rmse": rmse,
            "replicas": len(vals),
            "diag_iterations": (sum(d[0] for d in dd) / len(dd)) if dd else "",
            "diag_residual": max(d[1] for d in dd) if dd else "",
        })
    return rows


def report_rows_to_csv(rows: Sequence[Mapping[str, object]], out: IO[str],
                       metadata: Sequence[str] = ()) -> None:
    """CSV export for rmse_compare-style rows."""
    for line in metadata:
        out.write(f"# {line}\n")
    cols = ["method", "mean_estimate", "rmse", "replicas", "diag_iterations", "diag_residual"]
    out.write(",".join(cols) + "\n")
    for row in rows:
        out.write(",".join(_fmt(row.get(c, "")) for c in cols) + "\n")


def _fmt(v: object) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)
