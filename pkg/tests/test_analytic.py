"""Closed-form coverage/bias curves and the exact small-instance oracle."""

import itertools
import math
import random

import pytest

from crawlbias import (DegreeDistribution, curve_rows, exact_step_distribution, f_k_of_t,
                       f_of_t, mean_q_of_f, moments, q_k_of_f, q_k_of_t, reachable_fraction,
                       rw_expected, t_of_f)

BIMODAL = DegreeDistribution({1: 0.5, 3: 0.5})


def test_f_k_hand_values():
    fk = f_k_of_t(BIMODAL, 0.5)
    assert fk[1] == pytest.approx(0.25)        # 0.5 * (1 - 0.5)
    assert fk[3] == pytest.approx(0.4375)      # 0.5 * (1 - 0.125)


def test_f_k_endpoints_and_monotonicity():
    assert all(v == 0.0 for v in f_k_of_t(BIMODAL, 0.0).values())
    assert f_k_of_t(BIMODAL, 1.0) == {1: pytest.approx(0.5), 3: pytest.approx(0.5)}
    last = -1.0
    for t in [i / 50 for i in range(51)]:
        cur = f_k_of_t(BIMODAL, t)[3]
        assert cur >= last
        last = cur
    with pytest.raises(ValueError):
        f_k_of_t(BIMODAL, 1.5)


def test_f_of_t_hand_value():
    assert f_of_t(BIMODAL, 0.5) == pytest.approx(0.6875)


def test_f_of_t_regular_closed_form():
    d = DegreeDistribution({3: 1.0})
    for t in (0.0, 0.2, 0.7, 1.0):
        assert f_of_t(d, t) == pytest.approx(1 - (1 - t) ** 3)


def test_reachable_fraction_with_isolated_nodes():
    d = DegreeDistribution({0: 0.2, 2: 0.8})
    assert reachable_fraction(d) == pytest.approx(0.8)
    assert f_of_t(d, 1.0) == pytest.approx(0.8)
    with pytest.raises(ValueError):
        t_of_f(d, 0.9)


def test_t_of_f_regular_closed_form():
    d = DegreeDistribution({2: 1.0})
    assert t_of_f(d, 0.75) == pytest.approx(0.5, abs=1e-9)


def test_t_of_f_endpoints():
    assert t_of_f(BIMODAL, 0.0) == 0.0
    assert t_of_f(BIMODAL, 1.0) == 1.0


def test_t_of_f_inverts_hand_value():
    assert t_of_f(BIMODAL, 0.6875) == pytest.approx(0.5, abs=1e-8)


def test_roundtrip_residual_below_1e10():
    laws = [
        DegreeDistribution({2: 1.0}),
        BIMODAL,
        DegreeDistribution({k: k ** -2.5 for k in range(2, 101)}, normalize=True),
    ]
    for d in laws:
        for f in [0.001 + i * (0.998 / 99) for i in range(100)]:
            assert abs(f_of_t(d, t_of_f(d, f)) - f) <= 1e-10


def test_q_k_hand_values():
    q = q_k_of_t(BIMODAL, 0.5)
    assert q.get(1) == pytest.approx(4 / 11)
    assert q.get(3) == pytest.approx(7 / 11)
    qf = q_k_of_f(BIMODAL, 0.6875)
    assert qf.get(1) == pytest.approx(4 / 11, abs=1e-8)


def test_q_k_rejects_t_zero():
    with pytest.raises(ValueError):
        q_k_of_t(BIMODAL, 0.0)


def test_q_k_limit_at_f_zero_is_degree_weighted():
    q = q_k_of_f(BIMODAL, 0.0)
    assert q.get(1) == pytest.approx(0.25)
    assert q.get(3) == pytest.approx(0.75)


def test_q_k_full_coverage_recovers_p_k():
    q = q_k_of_f(BIMODAL, 1.0)
    assert q.get(1) == pytest.approx(0.5)
    assert q.get(3) == pytest.approx(0.5)


def test_mean_q_hand_values():
    assert mean_q_of_f(BIMODAL, 0.6875) == pytest.approx(25 / 11)
    assert mean_q_of_f(BIMODAL, 0.0) == pytest.approx(2.5)
    assert mean_q_of_f(BIMODAL, 1.0) == pytest.approx(2.0)


def test_mean_q_strictly_decreasing_multiclass():
    last = math.inf
    for i in range(1, 101):
        cur = mean_q_of_f(BIMODAL, i / 100)
        assert cur < last
        last = cur


def test_mean_q_constant_for_regular():
    # single degree class: every sample shows the same degree at any coverage
    d = DegreeDistribution({5: 1.0})
    for f in (1e-6, 0.3, 0.9, 1.0):
        assert mean_q_of_f(d, f) == pytest.approx(5.0, abs=1e-12)


def test_rw_expected():
    q, mean = rw_expected(BIMODAL)
    assert q.get(1) == pytest.approx(0.25)
    assert q.get(3) == pytest.approx(0.75)
    assert mean == pytest.approx(2.5)
    assert moments(BIMODAL)[1] == pytest.approx(mean)


def test_numerical_stability_extreme_t():
    d = DegreeDistribution({k: k ** -2.5 for k in range(2, 101)}, normalize=True)
    q = q_k_of_t(d, 1e-12)
    assert abs(sum(p for _, p in q.items()) - 1.0) < 1e-9
    assert q.get(2) == pytest.approx(rw_expected(d)[0].get(2), rel=1e-6)
    assert f_of_t(d, 1e-300) >= 0.0


# --- exact step oracle ----------------------------------------------------

def _brute_force_step(degrees, step):
    """Enumerate every draw order of degree-weighted sampling without
    replacement and accumulate the marginal law of the step-th draw."""
    n = len(degrees)
    probs = [0.0] * n
    nodes = [v for v in range(n) if degrees[v] > 0]
    for order in itertools.permutations(nodes, step):
        p = 1.0
        remaining = sum(degrees)
        for v in order:
            p *= degrees[v] / remaining
            remaining -= degrees[v]
        probs[order[-1]] += p
    return probs


def test_step1_hand_values():
    assert exact_step_distribution([1, 1, 2], 1) == pytest.approx([0.25, 0.25, 0.5])


def test_step2_hand_values():
    assert exact_step_distribution([1, 1, 2], 2) == pytest.approx([1 / 3, 1 / 3, 1 / 3])


def test_step3_hand_values():
    # P(third = v) = 1 - P(first = v) - P(second = v)
    assert exact_step_distribution([1, 1, 2], 3) == pytest.approx([5 / 12, 5 / 12, 1 / 6])


def test_steps_match_brute_force_enumeration():
    rng = random.Random(17)
    for _ in range(30):
        n = rng.randrange(3, 7)
        degrees = [rng.randrange(1, 5) for _ in range(n)]
        for step in (1, 2, 3):
            got = exact_step_distribution(degrees, step)
            want = _brute_force_step(degrees, step)
            assert got == pytest.approx(want, abs=1e-12)


def test_step_rejects_unsupported_inputs():
    with pytest.raises(ValueError):
        exact_step_distribution([1, 1, 2], 4)  # only the first three steps
    with pytest.raises(ValueError):
        exact_step_distribution([1, 1], 3)     # more steps than nodes
    with pytest.raises(ValueError):
        exact_step_distribution(list(range(1, 14)), 3)  # beyond the size cap


def test_curve_rows_shape():
    rows = curve_rows(BIMODAL, [0.25, 0.5, 1.0])
    assert [r["f"] for r in rows] == [0.25, 0.5, 1.0]
    assert rows[-1]["mean_q"] == pytest.approx(2.0)
    assert all(0.0 <= r["t"] <= 1.0 for r in rows)
    import json
    q = json.loads(rows[1]["q_k_json"])
    assert set(q) == {"1", "3"}
