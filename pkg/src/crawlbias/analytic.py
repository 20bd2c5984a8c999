"""Closed-form bias curves for degree-weighted exploration.

Model: every stub of every node draws an independent uniform index on [0, 1]
and nodes are discovered in ascending order of their minimum stub index. A
degree-k node is still undiscovered at scan time t with probability
(1 - t)^k, which yields, with p_k the underlying degree fractions:

    f_k(t) = p_k * (1 - (1 - t)^k)        discovered fraction inside class k
    f(t)   = 1 - sum_k p_k * (1 - t)^k    overall discovered fraction
    q_k    = f_k(t) / f(t)                degree mix of the sample at time t

f is strictly increasing on [0, 1], so coverage f maps back to a unique scan
time t(f) (bisection). As f -> 0 the sample degree mix tends to the
stationary degree-weighted law k * p_k / <k>; at f = 1 it equals p_k.
"""

from __future__ import annotations

import json
import math
from typing import Sequence

from .graph import DegreeDistribution


def _survival(t: float, k: int) -> float:
    """(1 - t)^k, evaluated in log space so large k cannot underflow bias in."""
    if k == 0 or t <= 0.0:
        return 1.0
    if t >= 1.0:
        return 0.0
    return math.exp(k * math.log1p(-t))


def _inclusion(t: float, k: int) -> float:
    """1 - (1 - t)^k without cancellation at small t."""
    if k == 0 or t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    return -math.expm1(k * math.log1p(-t))


def _check_t(t: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"scan time t must lie in [0, 1], got {t!r}")


def f_k_of_t(d: DegreeDistribution, t: float) -> dict[int, float]:
    """Per-class discovered fraction f_k(t) = p_k * (1 - (1-t)^k)."""
    _check_t(t)
    return {k: p * _inclusion(t, k) for k, p in d.items()}


def f_of_t(d: DegreeDistribution, t: float) -> float:
    """Overall discovered fraction f(t); equals 1 - p_0 at t = 1."""
    _check_t(t)
    return sum(p * _inclusion(t, k) for k, p in d.items())


def reachable_fraction(d: DegreeDistribution) -> float:
    """Coverage ceiling 1 - p_0: zero-degree nodes are never discovered."""
    return 1.0 - d.get(0)


def t_of_f(d: DegreeDistribution, f: float, *, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Invert f(t) = f by bisection to |f(t) - f| <= tol.

    f must lie in [0, 1 - p_0]; the inverse exists because f(t) is strictly
    increasing wherever some positive-degree class has mass.
    """
    fmax = reachable_fraction(d)
    if f < 0.0 or f > fmax + 1e-12:
        raise ValueError(f"coverage {f!r} outside reachable range [0, {fmax}]")
    if f <= 0.0:
        return 0.0
    if f >= fmax:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        val = f_of_t(d, mid)
        if abs(val - f) <= tol:
            return mid
        if val < f:
            lo = mid
        else:
            hi = mid
    raise RuntimeError(f"t_of_f did not reach tolerance {tol} in {max_iter} iterations")


def q_k_of_t(d: DegreeDistribution, t: float) -> DegreeDistribution:
    """Sample degree mix at scan time t (t > 0)."""
    _check_t(t)
    if t <= 0.0:
        raise ValueError("q_k is a 0/0 limit at t = 0; use q_k_of_f with f = 0")
    return DegreeDistribution(f_k_of_t(d, t), normalize=True)


def q_k_of_f(d: DegreeDistribution, f: float) -> DegreeDistribution:
    """Sample degree mix at coverage f; f = 0 returns the k*p_k/<k> limit."""
    if f == 0.0:
        return rw_expected(d)[0]
    return q_k_of_t(d, t_of_f(d, f))


def mean_q_of_f(d: DegreeDistribution, f: float) -> float:
    """Expected sampled degree at coverage f.

    Decreases from <k^2>/<k> at f -> 0 down to <k> at full coverage; strictly
    decreasing whenever d has more than one positive-degree class.
    """
    return q_k_of_f(d, f).mean()


def rw_expected(d: DegreeDistribution) -> tuple[DegreeDistribution, float]:
    """Stationary degree-weighted law q_k = k * p_k / <k> and its mean <k^2>/<k>."""
    mean = d.mean()
    q = DegreeDistribution({k: k * p / mean for k, p in d.items() if k > 0}, normalize=True)
    return q, d.second_moment() / mean


def exact_step_distribution(degrees: Sequence[int], step: int) -> list[float]:
    """Exact law of the `step`-th draw of degree-weighted sampling without replacement.

    With z the stub total, the chain starts degree-proportionally and each
    later draw is degree-proportional among the nodes not yet drawn:

        P(X1 = u) = k_u / z
        P(X2 = v) = sum_{u != v} k_v / (z - k_u) * P(X1 = u)
        P(X3 = w) = sum_{v != w} sum_{u != w, v}
                        k_w / (z - k_v - k_u) * k_v / (z - k_u) * P(X1 = u)

    Steps 1..3 are supported; the step-3 nested sum restricts the sequence
    length to 12.
    """
    if step not in (1, 2, 3):
        raise ValueError("only steps 1..3 are supported")
    if step == 3 and len(degrees) > 12:
        raise ValueError("step 3 is limited to sequences of at most 12 nodes")
    if any(k < 0 for k in degrees):
        raise ValueError("degrees must be nonnegative")
    z = sum(degrees)
    if z == 0:
        raise ValueError("degree sequence has no stubs")
    n = len(degrees)
    p1 = [k / z for k in degrees]
    if step == 1:
        return p1

    if step == 2:
        p2 = [0.0] * n
        for u in range(n):
            if p1[u] == 0.0:
                continue
            rest = z - degrees[u]
            if rest <= 0:
                continue  # u holds every stub: no second draw exists down this branch
            for v in range(n):
                if v != u:
                    p2[v] += degrees[v] / rest * p1[u]
        _check_total(p2, step)
        return p2

    p3 = [0.0] * n
    for u in range(n):
        if p1[u] == 0.0:
            continue
        rest_u = z - degrees[u]
        if rest_u <= 0:
            continue
        for v in range(n):
            if v == u or degrees[v] == 0:
                continue
            w_uv = degrees[v] / rest_u * p1[u]
            rest_uv = rest_u - degrees[v]
            if rest_uv <= 0:
                continue
            for w in range(n):
                if w != u and w != v:
                    p3[w] += degrees[w] / rest_uv * w_uv
    _check_total(p3, step)
    return p3


def _check_total(probs: list[float], step: int) -> None:
    total = sum(probs)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"step {step} is not always reachable on this sequence "
                         f"(mass {total:.6f} < 1)")


def curve_rows(d: DegreeDistribution, f_grid: Sequence[float]) -> list[dict[str, object]]:
    """Rows for the CSV curve export: f, t, mean_q, q_k_json."""
    rows = []
    for f in f_grid:
        t = t_of_f(d, f) if f > 0 else 0.0
        q = q_k_of_f(d, f)
        rows.append({
            "f": f,
            "t": t,
            "mean_q": q.mean(),
            "q_k_json": json.dumps({str(k): p for k, p in q.items()}),
        })
    return rows
