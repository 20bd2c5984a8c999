"""Graph container, degree accounting, and edge-list loading."""

import io
import math

import pytest

from crawlbias import (DegreeDistribution, Graph, GraphFormatError, LoadOptions, RAW,
                       assortativity, ball, connected_components, degree_distribution,
                       induced_subgraph, largest_component_nodes, load_edge_list, moments,
                       stats_row)


def test_from_edges_counts_self_loop_twice():
    g = Graph.from_edges(2, [(0, 1), (1, 1)])
    assert g.degree(0) == 1
    assert g.degree(1) == 3
    assert g.edge_count == 2
    assert sum(g.degrees()) == 2 * g.edge_count


def test_parallel_edges_kept():
    g = Graph.from_edges(2, [(0, 1), (0, 1)])
    assert g.degree(0) == 2
    assert g.edge_count == 2
    assert list(g.neighbors(0)) == [1, 1]


def test_edges_roundtrip_multigraph():
    edges = [(0, 1), (0, 1), (2, 2), (1, 2)]
    g = Graph.from_edges(3, edges)
    assert sorted(g.edges()) == sorted((min(u, v), max(u, v)) for u, v in edges)


def test_odd_stub_total_rejected():
    with pytest.raises(ValueError):
        Graph([[1], []])  # one-sided entry: odd stub total


def test_degree_distribution_triangle():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)])
    assert degree_distribution(g) == DegreeDistribution({2: 1.0})


def test_degree_distribution_path():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    d = degree_distribution(g)
    assert d.get(1) == pytest.approx(2 / 3)
    assert d.get(2) == pytest.approx(1 / 3)


def test_distribution_validation():
    with pytest.raises(ValueError):
        DegreeDistribution({1: 0.7, 2: 0.7})
    with pytest.raises(ValueError):
        DegreeDistribution({-1: 1.0})
    with pytest.raises(ValueError):
        DegreeDistribution({0: 1.0})  # no positive-degree mass
    d = DegreeDistribution({1: 2.0, 3: 2.0}, normalize=True)
    assert d.get(1) == pytest.approx(0.5)


def test_moments_regular():
    d = DegreeDistribution({4: 1.0})
    mean, ratio = moments(d)
    assert mean == pytest.approx(4.0)
    assert ratio == pytest.approx(4.0)


def test_moments_bimodal():
    d = DegreeDistribution({1: 0.5, 3: 0.5})
    mean, ratio = moments(d)
    assert mean == pytest.approx(2.0)
    assert ratio == pytest.approx(2.5)  # (0.5*1 + 0.5*9) / 2


def test_assortativity_star_is_minus_one():
    g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    assert assortativity(g) == pytest.approx(-1.0)


def test_assortativity_path4():
    # hand value: degrees along edges (1,2),(2,2),(2,1) -> r = -1/2
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert assortativity(g) == pytest.approx(-0.5)


def test_assortativity_regular_undefined():
    g = Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)])
    assert assortativity(g) is None


def test_ball_on_path():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert ball(g, 0, 1) == {0, 1}
    assert ball(g, 1, 1) == {0, 1, 2}
    assert ball(g, 0, 0) == {0}
    assert ball(g, 0, 5) == {0, 1, 2}


def test_components_and_induced_subgraph():
    g = Graph.from_edges(5, [(0, 1), (1, 2), (3, 4)])
    comps = connected_components(g)
    assert sorted(map(sorted, comps)) == [[0, 1, 2], [3, 4]]
    assert sorted(largest_component_nodes(g)) == [0, 1, 2]
    sub = induced_subgraph(g, [0, 1, 2])
    assert sub.node_count == 3
    assert sub.edge_count == 2


def test_load_edge_list_basic():
    text = "0 1\n1 2\n# comment\n\n"
    g = load_edge_list(io.StringIO(text))
    assert g.node_count == 3
    assert sorted(g.degrees()) == [1, 1, 2]


def test_load_edge_list_default_cleanup():
    # duplicate (reversed) collapsed, self-loop dropped
    text = "0 1\n1 0\n0 0\n"
    g = load_edge_list(io.StringIO(text))
    assert g.node_count == 2
    assert g.edge_count == 1


def test_load_edge_list_raw_keeps_everything():
    text = "0 1\n1 0\n0 0\n"
    g = load_edge_list(io.StringIO(text), RAW)
    assert g.node_count == 2
    assert g.edge_count == 3
    assert g.degree(0) == 4  # two parallel + self-loop counted twice


def test_load_edge_list_largest_component_only():
    text = "0 1\n1 2\n7 8\n"
    g = load_edge_list(io.StringIO(text))
    assert g.node_count == 3
    assert sorted(g.labels) == [0, 1, 2]
    keep_all = LoadOptions(largest_component=False)
    assert load_edge_list(io.StringIO(text), keep_all).node_count == 5


def test_load_edge_list_remaps_sparse_ids():
    text = "100 7\n7 42\n"
    g = load_edge_list(io.StringIO(text))
    assert g.node_count == 3
    assert g.labels == [100, 7, 42]


def test_load_edge_list_errors():
    with pytest.raises(GraphFormatError) as err:
        load_edge_list(io.StringIO("0 1 2\n"))
    assert "line 1" in str(err.value)
    with pytest.raises(GraphFormatError):
        load_edge_list(io.StringIO("a b\n"))
    with pytest.raises(ValueError):
        load_edge_list(io.StringIO("0 0\n"))  # empty after cleanup


def test_stats_row_fields():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    row = stats_row(g)
    assert row["nodes"] == 3
    assert row["edges"] == 2
    assert row["mean_degree"] == pytest.approx(4 / 3)
    assert row["k2_over_k"] == pytest.approx((2 * 1 + 4) / 4)
    assert isinstance(row["assortativity"], float)
    triangle = Graph.from_edges(3, [(0, 1), (1, 2), (2, 0)])
    assert stats_row(triangle)["assortativity"] == "undefined"


def test_assortativity_matches_direct_pearson():
    # definitional cross-check on an irregular graph: correlate endpoint
    # degrees over both orientations of every edge
    g = Graph.from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 3), (0, 2)])
    pairs = []
    for u, v in g.edges():
        pairs.append((g.degree(u), g.degree(v)))
        pairs.append((g.degree(v), g.degree(u)))
    m = len(pairs)
    mx = sum(a for a, _ in pairs) / m
    my = sum(b for _, b in pairs) / m
    cov = sum((a - mx) * (b - my) for a, b in pairs) / m
    var = sum((a - mx) ** 2 for a, _ in pairs) / m
    assert assortativity(g) == pytest.approx(cov / var)
    assert not math.isnan(assortativity(g))
