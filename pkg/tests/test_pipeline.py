import pytest

from edgeplace.creason import CONTINUOUS, FRESH
from edgeplace.milp import INFEASIBLE, OPTIMAL, brute_force_oracle
from edgeplace.model import placement_violations
from edgeplace.pipeline import FEASIBLE, STRATEGIES, first_feasible, plan, search_order
from edgeplace.topology import GenSpec, generate

from conftest import APPS


def test_first_feasible_is_valid_and_never_beats_optimum(random_cases, table):
    both = 0
    for seed, app, infra, outcome in random_cases:
        if not all(len(cs) for cs in outcome.candidate_sets):
            continue
        status, placement, _ = first_feasible(outcome, app, infra)
        oracle = brute_force_oracle(outcome, app, infra, table)
        if oracle.status == INFEASIBLE:
            assert status == INFEASIBLE, seed
            continue
        assert status == FEASIBLE, seed
        assert placement_violations(app, infra, placement.nodes()) == []
        assert placement.total_cost >= oracle.objective_value
        both += 1
    assert both >= 40


def test_search_order_starts_at_thing_flows(speak):
    order = search_order(speak.components, speak)
    assert sorted(order) == sorted(speak.components)
    starters = {c for c in speak.components
                if any(speak.is_thing(f.src) or speak.is_thing(f.dst) for f in speak.flows_of(c))}
    assert order[0] == min(starters)
    # each later component shares a flow with an earlier one, or is a new root
    for pos, c in enumerate(order[1:], 1):
        linked = any({f.src, f.dst} & set(order[:pos]) for f in speak.flows_of(c))
        assert linked or c in starters or not any(
            f.src in speak.components and f.dst in speak.components for f in speak.flows_of(c))


@pytest.mark.parametrize("strategy", STRATEGIES)
def test_plan_on_fixture(speak, two_node, table, strategy):
    res = plan(speak, two_node, table, strategy)
    assert res.ok and res.mode == FRESH
    assert placement_violations(speak, two_node, res.placement.nodes()) == []
    if strategy != "prolog-only":
        assert res.status == OPTIMAL and str(res.placement.total_cost) == "24.812250"
    else:
        assert res.status == FEASIBLE and res.model is None
    assert res.exec_time_ms >= sum(res.timings.values()) - 1e-6


def test_cr_without_previous_is_fresh(speak, two_node, table):
    assert plan(speak, two_node, table, "cr").mode == FRESH


def test_cr_with_previous_is_continuous(speak, two_node, table):
    first = plan(speak, two_node, table, "milp")
    again = plan(speak, two_node, table, "cr", previous=first.placement)
    assert again.mode == CONTINUOUS and again.retained == set(speak.components)
    # milp ignores the previous placement when building candidates
    assert plan(speak, two_node, table, "milp", previous=first.placement).retained == set()


def test_infeasible_model_reported(speak, table):
    from conftest import infra_path
    from edgeplace.model import load_infrastructure

    infra = load_infrastructure(infra_path("twoNode"))
    for strategy in STRATEGIES:
        res = plan(speak, infra, table, strategy)
        assert res.status == INFEASIBLE and not res.ok


def test_unknown_strategy(speak, two_node, table):
    with pytest.raises(ValueError):
        plan(speak, two_node, table, "greedy")


@pytest.mark.parametrize("name", APPS)
def test_baseline_on_generated_infra(apps, table, name):
    infra = generate(GenSpec(n_nodes=64, family="BA", seed=42))
    app = apps[name]
    base = plan(app, infra, table, "prolog-only")
    opt = plan(app, infra, table, "milp")
    assert base.ok == opt.ok
    if opt.ok:
        assert placement_violations(app, infra, base.placement.nodes()) == []
        assert base.placement.total_cost >= opt.placement.total_cost
