import numpy as np
import pytest

from cellnav.conn_graph import (END, START, bottleneck_max_snr, build_feasibility_graph,
                                check_feasibility, gbs_vertex, shortest_association)
from cellnav.errors import Infeasible
from cellnav.scenario import ConnectivityRequirement, coverage_radius, linear_to_db

from conftest import (CHAIN10_RADIUS, make_scenario, random_scenario)
from oracles import bisect_max_snr, brute_force_feasible, enumerate_simple_sequences


def req(radius):
    return ConnectivityRequirement(snr_target=1.0, radius=radius)


def test_single_gbs_edges():
    s = make_scenario([(500.0, 0.0)], (0.0, 0.0), (1000.0, 0.0))
    g = build_feasibility_graph(s, req(600.0))
    assert {(str(u), str(v)) for u, v, _ in g.edges()} == {("U0", "G0"), ("G0", "UF")}
    assert g.weight(START, gbs_vertex(0)) == pytest.approx(500.0)
    assert g.weight(gbs_vertex(0), END) == pytest.approx(500.0)
    assert not g.has_edge(START, END)


def test_tiny_radius_gives_empty_graph(rng):
    s = random_scenario(rng, 6)
    g = build_feasibility_graph(s, req(1e-3))
    assert g.edges() == []
    assert not check_feasibility(g)


def test_chain10_has_expected_chain(chain10):
    g = build_feasibility_graph(chain10, req(CHAIN10_RADIUS))
    chain = [START, gbs_vertex(1), gbs_vertex(2), gbs_vertex(3), gbs_vertex(5),
             gbs_vertex(7), END]
    for u, v in zip(chain, chain[1:]):
        assert g.has_edge(u, v), f"missing edge {u}-{v}"
    assert check_feasibility(g)


def test_chain10_infeasible_at_three_quarters(chain10):
    g = build_feasibility_graph(chain10, req(0.75 * CHAIN10_RADIUS))
    assert not check_feasibility(g)


def test_isolated_start_infeasible():
    s = make_scenario([(5000.0, 5000.0)], (0.0, 0.0), (5000.0, 5500.0))
    g = build_feasibility_graph(s, req(1000.0))
    assert not check_feasibility(g)


def test_feasibility_matches_brute_force(rng):
    # brute-force enumeration of association sequences, small M
    for _ in range(60):
        m = int(rng.integers(1, 9))
        s = random_scenario(rng, m, endpoints="random")
        radius = float(rng.uniform(500, 6000))
        g = build_feasibility_graph(s, req(radius))
        assert check_feasibility(g) == brute_force_feasible(s, radius)


def test_feasibility_monotone_in_radius(rng):
    for _ in range(20):
        s = random_scenario(rng, 6, endpoints="random")
        radii = sorted(rng.uniform(300, 8000, size=4))
        verdicts = [check_feasibility(build_feasibility_graph(s, req(r))) for r in radii]
        for a, b in zip(verdicts, verdicts[1:]):
            assert (not a) or b  # feasible stays feasible as the radius grows


def test_bottleneck_single_gbs():
    s = make_scenario([(1000.0, 0.0)], (0.0, 0.0), (4000.0, 0.0))
    d_star = max(1000.0, 3000.0)
    expected = s.ref_snr / (d_star ** 2 + s.altitude_gap_sq)
    assert bottleneck_max_snr(s) == pytest.approx(expected, rel=1e-8)


def test_bottleneck_collinear_chain():
    spacing = 1600.0
    gbs = [(500.0 + i * spacing, 0.0) for i in range(5)]
    s = make_scenario(gbs, (0.0, 0.0), (500.0 + 4 * spacing + 700.0, 0.0))
    expected = s.ref_snr / ((spacing / 2) ** 2 + s.altitude_gap_sq)
    assert bottleneck_max_snr(s) == pytest.approx(expected, rel=1e-8)


def test_bottleneck_matches_bisection(rng):
    for _ in range(30):
        s = random_scenario(rng, int(rng.integers(2, 20)), endpoints="random")
        exact_db = linear_to_db(bottleneck_max_snr(s))
        bisect_db = linear_to_db(bisect_max_snr(s))
        assert abs(exact_db - bisect_db) < 0.01


def test_bottleneck_boundary_verdicts(rng):
    for _ in range(25):
        s = random_scenario(rng, int(rng.integers(1, 12)), endpoints="random")
        rho = bottleneck_max_snr(s)
        just_below = coverage_radius(s, rho * (1 - 1e-9))
        just_above = coverage_radius(s, rho * (1 + 1e-6))
        assert check_feasibility(build_feasibility_graph(s, just_below))
        assert not check_feasibility(build_feasibility_graph(s, just_above))
        at_value = coverage_radius(s, rho)
        assert check_feasibility(build_feasibility_graph(s, at_value))


def test_shortest_single_gbs():
    s = make_scenario([(500.0, 0.0)], (0.0, 0.0), (1000.0, 0.0))
    g = build_feasibility_graph(s, req(600.0))
    assert shortest_association(g).indices == (0,)


def test_shortest_unique_chain():
    gbs = [(0.0, 6000.0), (3000.0, 6000.0), (6000.0, 6000.0),
           (500.0, 0.0), (0.0, -6000.0), (3000.0, -6000.0),
           (6000.0, -6000.0), (2300.0, 0.0)]
    s = make_scenario(gbs, (0.0, 0.0), (2800.0, 0.0))
    g = build_feasibility_graph(s, req(1000.0))
    assert shortest_association(g).indices == (3, 7)


def test_shortest_matches_enumeration(rng):
    checked = 0
    while checked < 25:
        s = random_scenario(rng, int(rng.integers(2, 9)), endpoints="random")
        radius = float(rng.uniform(1500, 5000))
        g = build_feasibility_graph(s, req(radius))
        if not check_feasibility(g):
            continue
        checked += 1
        seq = shortest_association(g)
        mine = (g.start_dist[seq.indices[0]]
                + sum(g.pair_dist[a, b] for a, b in zip(seq.indices, seq.indices[1:]))
                + g.end_dist[seq.indices[-1]])
        best = min(w for _, w in enumerate_simple_sequences(s, radius))
        assert mine == pytest.approx(best, abs=1e-9)
        assert seq.is_simple()


def test_shortest_raises_when_infeasible():
    s = make_scenario([(5000.0, 5000.0)], (0.0, 0.0), (200.0, 0.0))
    g = build_feasibility_graph(s, req(100.0))
    with pytest.raises(Infeasible):
        shortest_association(g)


def test_shortest_deterministic_tie_break():
    # two mirror-image chains of identical length; the smaller indices win
    gbs = [(2000.0, 1500.0), (2000.0, -1500.0)]
    s = make_scenario(gbs, (0.0, 0.0), (4000.0, 0.0))
    g = build_feasibility_graph(s, req(2600.0))
    assert shortest_association(g).indices == (0,)


def test_edge_list_dump(chain10):
    g = build_feasibility_graph(chain10, req(CHAIN10_RADIUS))
    text = g.to_edge_list()
    lines = text.strip().split("\n")
    assert lines[0].split() == ["U0", "G1", "600.000000"]
    for line in lines:
        u, v, w = line.split()
        assert float(w) > 0
    assert len(lines) == g.edge_count()


def test_zero_weight_edges_for_duplicate_gbs():
    s = make_scenario([(100.0, 0.0), (100.0, 0.0)], (0.0, 0.0), (200.0, 0.0))
    g = build_feasibility_graph(s, req(150.0))
    assert g.has_edge(gbs_vertex(0), gbs_vertex(1))
    assert g.weight(gbs_vertex(0), gbs_vertex(1)) == 0.0
