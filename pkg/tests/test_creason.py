import pytest

from edgeplace.creason import CONTINUOUS, FALLBACK, FRESH, cr_step, preprocess
from edgeplace.milp import build_model, solve
from edgeplace.model import Assignment, Placement
from edgeplace.prefilter import compatible_placements, find_compatible, qos_ok
from edgeplace.topology import GenSpec, generate

from conftest import APPS


@pytest.fixture(scope="module")
def er64():
    return generate(GenSpec(n_nodes=64, family="ER", seed=42))


def _optimal(app, infra, table, previous=None):
    outcome = preprocess(app, infra, table, previous)
    return outcome, solve(build_model(outcome, app, infra))


def test_no_previous_is_fresh(speak, two_node, table):
    outcome = preprocess(speak, two_node, table)
    assert outcome.mode == FRESH and outcome.retained == set()
    assert outcome.candidate_sets == find_compatible(speak, two_node, table)


@pytest.mark.parametrize("name", APPS)
def test_unchanged_infra_retains_everything(apps, er64, table, name):
    app = apps[name]
    _, first = _optimal(app, er64, table)
    outcome = preprocess(app, er64, table, first.placement)
    assert outcome.mode == CONTINUOUS
    assert outcome.retained == set(app.components)
    for cs in outcome.candidate_sets:
        assert cs.nodes == [first.placement.node_of(cs.component)]


@pytest.mark.parametrize("name", APPS)
def test_failed_host_reopens_its_components(apps, er64, table, name):
    app = apps[name]
    _, first = _optimal(app, er64, table)
    victim = first.placement.node_of(sorted(app.components)[0])
    hit = {c for c, n in first.placement.nodes().items() if n == victim}
    er64.set_failed({victim})
    try:
        outcome = preprocess(app, er64, table, first.placement)
        if outcome.mode == FALLBACK:
            assert outcome.retained == set()
            return
        assert outcome.mode == CONTINUOUS
        assert not (outcome.retained & hit)
        by = outcome.by_component()
        for c in hit:
            assert by[c] == compatible_placements(c, er64, app, table)
            assert victim not in by[c].nodes
    finally:
        er64.set_failed(())


def test_retained_components_keep_their_cost(apps, er64, table):
    app = apps["speakToMe"]
    _, first = _optimal(app, er64, table)
    outcome = preprocess(app, er64, table, first.placement)
    for cs in outcome.candidate_sets:
        assert cs.candidates == [tuple(first.placement.assignments[cs.component])]


def test_empty_candidate_set_triggers_fallback(speak, two_node, table):
    _, first = _optimal(speak, two_node, table)
    # n1 is the only candidate for some storage component; fail it
    two_node.set_failed({"n1"})
    try:
        assert cr_step(first.placement, speak, two_node, table) is None
        outcome = preprocess(speak, two_node, table, first.placement)
        assert outcome.mode == FALLBACK and outcome.retained == set()
        assert outcome.candidate_sets == find_compatible(speak, two_node, table)
    finally:
        two_node.set_failed(())


def test_component_missing_from_previous_gets_full_set(speak, two_node, table):
    _, first = _optimal(speak, two_node, table)
    partial = Placement({c: a for c, a in first.placement.assignments.items() if c != "mainDB"})
    outcome = preprocess(speak, two_node, table, partial)
    assert "mainDB" not in outcome.retained
    assert outcome.by_component()["mainDB"] == compatible_placements("mainDB", two_node, speak, table)


def test_unknown_components_in_previous_are_ignored(speak, two_node, table):
    _, first = _optimal(speak, two_node, table)
    extra = dict(first.placement.assignments)
    extra["ghost"] = Assignment("n1", first.placement.assignments["mainDB"].cost)
    outcome = preprocess(speak, two_node, table, Placement(extra))
    assert "ghost" not in outcome.by_component()
    assert outcome.retained == set(speak.components)


def test_previous_on_vanished_node_is_recomputed(speak, two_node, table):
    _, first = _optimal(speak, two_node, table)
    moved = {c: Assignment("gone", a.cost) for c, a in first.placement.assignments.items()}
    outcome = preprocess(speak, two_node, table, Placement(moved))
    assert outcome.mode == CONTINUOUS and outcome.retained == set()


def test_retained_prefix_respects_flow_qos(speak, two_node, table):
    """Each retained component passes QoS against the components retained before it."""
    _, first = _optimal(speak, two_node, table)
    outcome = preprocess(speak, two_node, table, first.placement)
    kept = {}
    for comp in sorted(outcome.retained):
        node = first.placement.node_of(comp)
        assert qos_ok(comp, node, kept, speak, two_node)
        kept[comp] = node


def test_cr_solution_never_cheaper_than_fresh(apps, er64, table):
    for app in apps.values():
        _, first = _optimal(app, er64, table)
        er64.set_failed(er64.node_ids[::7])
        try:
            _, fresh = _optimal(app, er64, table)
            _, cont = _optimal(app, er64, table, first.placement)
            if fresh.placement is not None and cont.placement is not None:
                assert cont.objective_value >= fresh.objective_value
        finally:
            er64.set_failed(())
