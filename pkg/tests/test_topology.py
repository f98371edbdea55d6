import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgeplace.model import GEN_HW_RANGE, Infrastructure, Link, Node, ValidationError, infrastructure_to_json
from edgeplace.topology import FAMILIES, GenSpec, ba_edges, er_edges, generate, iag_edges, latency_closure, sample_hw

from oracles import assert_triangle, bottleneck_range, dijkstra, random_digraph


@pytest.mark.parametrize("seed", range(50))
def test_closure_matchesdijkstra(seed):
    raw = random_digraph(seed)
    closed = latency_closure(raw)
    for src in raw.node_ids:
        dist = dijkstra(raw, src)
        lo, hi = bottleneck_range(raw, src, dist)
        for dst in raw.node_ids:
            if dst == src:
                continue
            link = closed.link(src, dst)
            if dst not in dist:
                assert link is None
                continue
            assert round(link.latency_ms * 1000) == dist[dst]
            assert lo[dst] <= round(link.bandwidth_mbps * 1000) <= hi[dst]
            direct = raw.link(src, dst)
            if direct is not None and round(direct.latency_ms * 1000) == dist[dst]:
                assert link == direct


def test_triangle_example():
    nodes = {k: Node(k, "edge") for k in "abc"}
    links = {
        ("a", "b"): Link("a", "b", 2.0, 30.0),
        ("b", "c"): Link("b", "c", 3.0, 10.0),
        ("a", "c"): Link("a", "c", 10.0, 99.0),
    }
    closed = latency_closure(Infrastructure(nodes=nodes, links=links))
    assert closed.link("a", "c") == Link("a", "c", 5.0, 10.0)
    assert closed.link("c", "a") is None


def test_closure_is_idempotent():
    once = latency_closure(random_digraph(3))
    twice = latency_closure(once)
    assert twice.links == once.links


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("n", [20, 64])
def test_generated_infra_obeys_triangle_inequality(family, n):
    assert_triangle(generate(GenSpec(n_nodes=n, family=family, seed=42)))


@pytest.mark.parametrize("seed", range(10))
def test_random_closure_obeys_triangle_inequality(seed):
    assert_triangle(latency_closure(random_digraph(seed, p=0.1)))


@pytest.mark.parametrize("family", FAMILIES)
def test_generation_is_byte_deterministic(family):
    a = json.dumps(infrastructure_to_json(generate(GenSpec(n_nodes=64, family=family, seed=7))))
    b = json.dumps(infrastructure_to_json(generate(GenSpec(n_nodes=64, family=family, seed=7))))
    c = json.dumps(infrastructure_to_json(generate(GenSpec(n_nodes=64, family=family, seed=8))))
    assert a == b and a != c


def test_families_differ_for_one_seed():
    docs = {f: infrastructure_to_json(generate(GenSpec(n_nodes=32, family=f, seed=1)))["nodes"] for f in FAMILIES}
    assert docs["BA"] != docs["ER"] != docs["IAG"]


@pytest.mark.parametrize("n, m", [(10, 1), (30, 2), (64, 3), (5, 4)])
def test_ba_edge_count_matches_networkx(n, m):
    ours = ba_edges(n, m, np.random.default_rng(0))
    ref = nx.barabasi_albert_graph(n, m, seed=0)
    assert len(ours) == ref.number_of_edges() == m * (n - m)
    g = nx.Graph(ours)
    assert nx.is_connected(g) and g.number_of_nodes() == n


def test_er_edges_density():
    edges = er_edges(400, 0.05, np.random.default_rng(1))
    expect = 0.05 * 400 * 399 / 2
    assert abs(len(edges) - expect) < 4 * np.sqrt(expect)
    assert all(i < j for i, j in edges)


def test_iag_core_and_stubs():
    edges, n_core = iag_edges(100, 0.15, 0.6, 2, np.random.default_rng(2))
    assert n_core == 15
    g = nx.Graph(edges)
    assert nx.is_connected(g)
    assert all(g.degree(v) >= 2 for v in range(n_core, 100))
    core_deg = np.mean([g.degree(v) for v in range(n_core)])
    stub_deg = np.mean([g.degree(v) for v in range(n_core, 100)])
    assert core_deg > 2 * stub_deg


def test_iag_core_nodes_are_cloud():
    infra = generate(GenSpec(n_nodes=100, family="IAG", seed=3))
    assert all(infra.nodes[f"n{i:02d}"].node_type == "cloud" for i in range(15))


def test_hardware_samples_stay_in_range():
    lo, hi = GEN_HW_RANGE
    hw = sample_hw(np.random.default_rng(0), 10_000, 256.0, 400.0)
    assert hw.dtype == np.int64
    assert hw.min() == lo and hw.max() == hi
    hw = sample_hw(np.random.default_rng(0), 10_000, 256.0, 128.0)
    assert lo <= hw.min() and hw.max() <= hi and abs(hw.mean() - 256) < 5


@pytest.mark.parametrize("family", FAMILIES)
def test_link_attributes_in_range(family):
    spec = GenSpec(n_nodes=64, family=family, seed=5)
    infra = generate(spec)
    lat_lo, lat_hi = spec.lat_range
    bw_lo, bw_hi = spec.bw_range
    for lk in infra.links.values():
        assert lat_lo <= lk.latency_ms <= lat_hi * (spec.n_nodes - 1)
        assert bw_lo <= lk.bandwidth_mbps <= bw_hi
    hosted = [t for nd in infra.nodes.values() for t in nd.hosted_things]
    assert sorted(hosted) == sorted(spec.things)


def test_connected_families_close_to_complete():
    for family in ("BA", "IAG"):
        infra = generate(GenSpec(n_nodes=40, family=family, seed=9))
        assert len(infra.links) == 40 * 39


@pytest.mark.parametrize(
    "kw",
    [
        {"family": "WS"},
        {"n_nodes": 0},
        {"node_type_weights": (0.5, 0.5, 0.5)},
        {"family": "BA", "family_params": {"m": 0}},
        {"family": "ER", "family_params": {"p": 1.5}},
        {"family": "IAG", "family_params": {"core_fraction": 0}},
        {"bw_range": (0, 10)},
    ],
)
def test_bad_generator_settings(kw):
    with pytest.raises(ValidationError):
        GenSpec(**kw)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(FAMILIES), st.integers(3, 30))
def test_generated_infra_is_valid_and_closed(seed, family, n):
    infra = generate(GenSpec(n_nodes=n, family=family, seed=seed))
    assert infra.generated
    assert_triangle(infra)
