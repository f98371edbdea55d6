"""End-to-end placement: preprocess, then optimize or take the first feasible answer.

Strategies
    prolog-only  fresh prefilter + first feasible placement by depth-first search
    milp         fresh prefilter + exact branch-and-bound
    cr           continuous reasoning against ``previous`` + exact branch-and-bound
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .creason import FRESH, PreprocessOutcome, preprocess
from .milp import INFEASIBLE, OPTIMAL, TIMEOUT, InfeasibleModel, MilpModel, build_model, solve
from .model import Assignment, Placement, UnresolvableThing, bandwidth_kbps, thing_location

STRATEGIES = ("prolog-only", "milp", "cr")
FEASIBLE = "feasible"  # a valid placement with no optimality claim


@dataclass
class PlanResult:
    status: str
    placement: Placement | None
    mode: str
    retained: set = field(default_factory=set)
    exec_time_ms: float = 0.0
    nodes_explored: int = 0
    outcome: PreprocessOutcome | None = None
    model: MilpModel | None = None
    timings: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.placement is not None


def search_order(components, app) -> list:
    """Breadth-first over the flow graph, starting from components that talk to things.

    Consecutive components then tend to share a flow, so a latency or
    bandwidth dead end shows up right after the choice that caused it.
    """
    comps = set(components)
    adj = {c: set() for c in comps}
    for fl in app.flows:
        if fl.src in comps and fl.dst in comps:
            adj[fl.src].add(fl.dst)
            adj[fl.dst].add(fl.src)
    roots = sorted(c for c in comps if any(app.is_thing(f.src) or app.is_thing(f.dst) for f in app.flows_of(c)))
    roots += sorted(comps.difference(roots))
    order, seen = [], set()
    for root in roots:
        if root in seen:
            continue
        seen.add(root)
        queue = [root]
        while queue:
            c = queue.pop(0)
            order.append(c)
            for nxt in sorted(adj[c] - seen):
                seen.add(nxt)
                queue.append(nxt)
    return order


def first_feasible(outcome, app, infra, budget_ms: float = 60_000):
    """First placement found by depth-first search, no optimization.

    Components are visited along :func:`search_order` and candidates tried
    cheapest first. Placing a component immediately narrows the candidate
    lists of its unplaced flow partners to nodes that satisfy the flow's
    security and latency, and a branch is abandoned as soon as one of those
    lists empties. Hardware, MAX_BIN and link bandwidth are checked exactly at
    each placement. Returns ``(status, placement, nodes_explored)``.
    """
    deadline = time.perf_counter() + budget_ms / 1000.0
    sets = {cs.component: cs for cs in outcome.candidate_sets}
    order = search_order(list(sets), app)
    if any(len(sets[c]) == 0 for c in order):
        return INFEASIBLE, None, 0
    idx = infra.index
    lat, bw_cap = infra.lat_us, infra.bw_kbps - bandwidth_kbps(infra.bw_threshold)
    cand = {c: np.array([idx[n] for n in sets[c].nodes], dtype=np.int64) for c in order}
    sec = [infra.nodes[n].sec_caps for n in infra.node_ids]
    hw_free = {j: infra.nodes[infra.node_ids[j]].hw_caps - infra.hw_threshold for j in range(len(sec))}

    def sec_ok(c, reqs):
        return np.array([reqs <= sec[j] for j in cand[c]], dtype=bool) if reqs else np.ones(len(cand[c]), bool)

    def lat_ok(row, limit):
        return (row >= 0) & (row <= limit)

    domains = {c: np.ones(len(cand[c]), dtype=bool) for c in order}
    pair_flows = {c: [] for c in order}  # (flow, partner, c is source, sec mask of c, sec mask of partner)
    fixed_bw = {c: [] for c in order}  # (link key builder, kbps) for flows to located things
    for fl in app.flows:
        s_thing, d_thing = app.is_thing(fl.src), app.is_thing(fl.dst)
        if s_thing and d_thing:
            continue
        if not s_thing and not d_thing:
            ms, md = sec_ok(fl.src, fl.sec_reqs), sec_ok(fl.dst, fl.sec_reqs)
            pair_flows[fl.src].append((fl, fl.dst, True, ms, md))
            pair_flows[fl.dst].append((fl, fl.src, False, md, ms))
            continue
        comp, thing = (fl.dst, fl.src) if s_thing else (fl.src, fl.dst)
        try:
            t = idx[thing_location(infra, thing)]
        except UnresolvableThing:
            return INFEASIBLE, None, 0
        nodes = cand[comp]
        row = lat[t, nodes] if s_thing else lat[nodes, t]
        link_bw = bw_cap[t, nodes] if s_thing else bw_cap[nodes, t]
        ok = sec_ok(comp, fl.sec_reqs) & (fl.sec_reqs <= sec[t])
        ok &= (nodes == t) | (lat_ok(row, fl.max_latency_us) & (link_bw >= fl.required_bw_kbps))
        domains[comp] &= ok
        fixed_bw[comp].append((t, s_thing, fl.required_bw_kbps))
    if not all(d.any() for d in domains.values()):
        return INFEASIBLE, None, 0

    placed = {}  # component -> infra node index
    hw_used = {}
    bw_used = {}
    explored = 0

    def try_place(c, j):
        if hw_used.get(j, 0) + app.hw_reqs(c) > hw_free[j]:
            return None
        if infra.max_bin is not None and j not in hw_used and len(hw_used) >= infra.max_bin:
            return None
        incs = {}
        for fl, other, out, _, _ in pair_flows[c]:
            k = placed.get(other)
            if k is not None and k != j:
                key = (j, k) if out else (k, j)
                incs[key] = incs.get(key, 0) + fl.required_bw_kbps
        for t, from_thing, kbps in fixed_bw[c]:
            if t != j:
                key = (t, j) if from_thing else (j, t)
                incs[key] = incs.get(key, 0) + kbps
        for key, inc in incs.items():
            if bw_used.get(key, 0) + inc > bw_cap[key]:
                return None
        for key, inc in incs.items():
            bw_used[key] = bw_used.get(key, 0) + inc
        hw_used[j] = hw_used.get(j, 0) + app.hw_reqs(c)
        placed[c] = j
        return incs

    def undo(c, j, incs):
        for key, inc in incs.items():
            bw_used[key] -= inc
        hw_used[j] -= app.hw_reqs(c)
        if hw_used[j] == 0:
            del hw_used[j]
        del placed[c]

    def narrow(c, a, j, doms):
        new = dict(doms)
        for fl, other, out, mine, theirs in pair_flows[c]:
            if other in placed:
                continue
            if not mine[a]:
                return None
            nodes = cand[other]
            row = lat[j, nodes] if out else lat[nodes, j]
            keep = theirs & ((nodes == j) | lat_ok(row, fl.max_latency_us))
            new[other] = new[other] & keep
            if not new[other].any():
                return None
        return new

    def dfs(depth, doms):
        nonlocal explored
        explored += 1
        if explored % 256 == 0 and time.perf_counter() > deadline:
            raise TimeoutError
        if depth == len(order):
            return True
        c = order[depth]
        for a in np.flatnonzero(doms[c]):
            a = int(a)
            j = int(cand[c][a])
            incs = try_place(c, j)
            if incs is None:
                continue
            new = narrow(c, a, j, doms)
            if new is not None and dfs(depth + 1, new):
                return True
            undo(c, j, incs)
        return False

    try:
        found = dfs(0, domains)
    except TimeoutError:
        return TIMEOUT, None, explored
    if not found:
        return INFEASIBLE, None, explored
    ids = infra.node_ids
    cost_of = {c: dict(sets[c].candidates) for c in order}
    placement = Placement({c: Assignment(ids[j], cost_of[c][ids[j]]) for c, j in sorted(placed.items())})
    return FEASIBLE, placement, explored


def plan(app, infra, table, strategy: str = "milp", previous=None, budget_ms: float = 60_000, seed: int = 0):
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    t0 = time.perf_counter()
    outcome = preprocess(app, infra, table, previous if strategy == "cr" else None)
    t1 = time.perf_counter()
    model = None
    if strategy == "prolog-only":
        t2 = t1  # no model to build
        status, placement, explored = first_feasible(outcome, app, infra, budget_ms)
        t3 = time.perf_counter()
    else:
        try:
            model = build_model(outcome, app, infra)
        except InfeasibleModel:
            t2 = t3 = time.perf_counter()
            status, placement, explored = INFEASIBLE, None, 0
        else:
            t2 = time.perf_counter()
            res = solve(model, budget_ms, seed)
            t3 = time.perf_counter()
            status, placement, explored = res.status, res.placement, res.nodes_explored
    mode = outcome.mode if strategy == "cr" else FRESH
    return PlanResult(
        status=status,
        placement=placement,
        mode=mode,
        retained=set(outcome.retained),
        exec_time_ms=(t3 - t0) * 1000.0,
        nodes_explored=explored,
        outcome=outcome,
        model=model,
        timings={"preprocess_ms": (t1 - t0) * 1000.0, "build_ms": (t2 - t1) * 1000.0, "solve_ms": (t3 - t2) * 1000.0},
    )


__all__ = ["STRATEGIES", "FEASIBLE", "OPTIMAL", "INFEASIBLE", "TIMEOUT", "PlanResult", "first_feasible", "plan"]
