import json
from decimal import Decimal

import pytest
from hypothesis import given
from hypothesis import strategies as st

from edgeplace.instances import random_instance
from edgeplace.model import (
    And,
    Assignment,
    AvgInBandwidthAtLeast,
    DataFlow,
    HasSecCaps,
    Infrastructure,
    Link,
    Node,
    Not,
    Or,
    Placement,
    ProviderIn,
    SchemaError,
    UnresolvableThing,
    ValidationError,
    application_from_json,
    application_to_json,
    dump_requirement,
    infrastructure_from_json,
    infrastructure_to_json,
    load_application,
    parse_requirement,
    placement_violations,
    thing_location,
    to_cost,
)

from conftest import APPS, app_path


@pytest.mark.parametrize("name", APPS)
def test_bundled_app_round_trip(name):
    app = load_application(app_path(name))
    again = application_from_json(json.loads(json.dumps(application_to_json(app))))
    assert application_to_json(again) == application_to_json(app)
    assert again.components == app.components


def test_speak_to_me_shape(speak):
    assert len(speak.function_instances) == 6
    assert len(speak.service_instances) == 5
    assert [t.id for t in speak.thing_instances] == ["iphoneXS"]


def test_required_bandwidth_is_size_times_eight_times_rate(speak):
    fl = next(f for f in speak.flows if (f.src, f.dst) == ("uploadPost", "textBucket"))
    assert fl.required_bw == 16.0
    assert fl.required_bw_kbps == 16_000
    assert fl.max_latency_us == 80_000


def test_small_decimal_bandwidth_stays_exact():
    fl = DataFlow("a", "b", "", frozenset(), 0.1, 3.0, 10.0)
    assert fl.required_bw_kbps == 2_400  # 0.1 * 8 * 3 = 2.4 Mbps, no float drift


def test_infra_round_trip(small_infra):
    text = json.dumps(infrastructure_to_json(small_infra))
    assert json.dumps(infrastructure_to_json(infrastructure_from_json(json.loads(text)))) == text


def test_bidirectional_link_expands():
    obj = {
        "nodes": [
            {"id": "a", "type": "cloud", "arch": "x86", "hwCaps": 1},
            {"id": "b", "type": "edge", "arch": "x86", "hwCaps": 1},
        ],
        "links": [{"src": "a", "dst": "b", "latencyMs": 3, "bandwidthMbps": 9, "bidirectional": True}],
    }
    infra = infrastructure_from_json(obj)
    assert set(infra.links) == {("a", "b"), ("b", "a")}
    assert infra.lat_us[infra.index["b"], infra.index["a"]] == 3000


def test_duplicate_node_rejected():
    obj = {"nodes": [{"id": "a", "type": "cloud", "arch": "x86", "hwCaps": 1}] * 2, "links": []}
    with pytest.raises(ValidationError, match="duplicate"):
        infrastructure_from_json(obj)


def test_bad_node_type_rejected():
    with pytest.raises(ValidationError):
        Infrastructure(nodes={"a": Node("a", "fog")})


def test_thing_hosted_twice_rejected():
    nodes = {n: Node(n, "edge", hosted_things=frozenset({"t"})) for n in "ab"}
    with pytest.raises(ValidationError, match="hosted by both"):
        Infrastructure(nodes=nodes)


def test_generated_flag_enforces_ranges():
    nodes = {"a": Node("a", "edge", hw_caps=2000)}
    with pytest.raises(ValidationError):
        Infrastructure(nodes=nodes, generated=True)
    Infrastructure(nodes=nodes, generated=False)


def test_unknown_flow_endpoint(speak):
    obj = application_to_json(speak)
    obj["flows"].append({"src": "ghost", "dst": "mainDB", "sizeMB": 1, "rateHz": 1, "maxLatencyMs": 1})
    with pytest.raises(ValidationError, match="ghost"):
        application_from_json(obj)


def test_malformed_field_is_schema_error(speak):
    obj = application_to_json(speak)
    obj["services"][0]["hwReqs"] = "lots"
    with pytest.raises(SchemaError):
        application_from_json(obj)


def test_requirement_parse_dump_round_trip():
    expr = And((ProviderIn(frozenset({"aws"})), Or((HasSecCaps(frozenset({"backup"})), Not(AvgInBandwidthAtLeast(5.0))))))
    assert parse_requirement(dump_requirement(expr)) == expr
    with pytest.raises(SchemaError):
        parse_requirement({"op": "xor", "args": []})


def test_thing_location(two_node):
    assert thing_location(two_node, "iphoneXS") == "n2"
    two_node.set_failed({"n2"})
    with pytest.raises(UnresolvableThing):
        thing_location(two_node, "iphoneXS")
    two_node.set_failed(())
    with pytest.raises(UnresolvableThing):
        thing_location(two_node, "nobody")


def test_placement_json_round_trip():
    p = Placement({"a": Assignment("n1", to_cost("1.25")), "b": Assignment("n2", to_cost("0.000001"))})
    q = Placement.from_json(json.loads(json.dumps(p.to_json("fresh", "optimal"))))
    assert q.nodes() == p.nodes()
    assert q.total_cost == Decimal("1.250001")


def test_violations_by_definition():
    nodes = {
        "a": Node("a", "cloud", hw_caps=10, sec_caps=frozenset({"s"})),
        "b": Node("b", "cloud", hw_caps=10),
    }
    links = {("a", "b"): Link("a", "b", 5.0, 1.0)}
    app_obj = {
        "name": "t",
        "services": [{"id": "S", "swReqs": [], "arch": "x86", "hwReqs": 6}],
        "serviceInstances": [{"id": "p", "service": "S"}, {"id": "q", "service": "S"}],
        "flows": [{"src": "p", "dst": "q", "secReqs": [], "sizeMB": 0.1, "rateHz": 1, "maxLatencyMs": 10}],
    }
    app = application_from_json(app_obj)
    infra = Infrastructure(nodes=nodes, links=links)
    assert placement_violations(app, infra, {"p": "a", "q": "b"}) == []
    assert ("hardware", "a") in placement_violations(app, infra, {"p": "a", "q": "a"})
    assert ("latency", 0) in placement_violations(app, infra, {"p": "b", "q": "a"})  # no b->a link
    infra.set_failed({"b"})
    assert ("availability", "q", "b") in placement_violations(app, infra, {"p": "a", "q": "b"})


@given(st.integers(0, 10_000))
def test_random_instances_round_trip(seed):
    app, infra = random_instance(seed)
    assert application_to_json(application_from_json(application_to_json(app))) == application_to_json(app)
    again = infrastructure_from_json(infrastructure_to_json(infra))
    assert again.node_ids == infra.node_ids
    assert (again.lat_us == infra.lat_us).all() and (again.bw_kbps == infra.bw_kbps).all()
