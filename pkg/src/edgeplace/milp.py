"""Placement MILP over prefiltered candidates, an exact branch-and-bound solver,
LP-format export, and a brute-force reference solver.

Variables
    x_i_j      component i runs on node j (only for candidate pairs)
    b_j        node j hosts at least one component
    y_i_j_h_k  x_i_j AND x_h_k, kept only where link bandwidth aggregation needs it

Latency and security requirements of a flow never need y: a violating node
pair is simply excluded with ``x_i_j + x_h_k <= 1``. Flows to or from a thing
have a fixed endpoint, so they reduce to unary terms on x.

All feasibility arithmetic is integral: hardware units, link bandwidth in
kbps, costs in millionths.
"""

from __future__ import annotations

import itertools
import math
import re
import time
from dataclasses import dataclass, field
from decimal import Decimal

import numpy as np

from . import _kernels
from .cost import component_cost
from .model import (
    Assignment,
    ModelError,
    Placement,
    UnresolvableThing,
    bandwidth_kbps,
    cost_units,
    placement_violations,
    thing_location,
)

OPTIMAL, INFEASIBLE, TIMEOUT = "optimal", "infeasible", "timeout"
ORACLE_GUARD = 10**6


class InfeasibleModel(ModelError):
    pass


class SearchSpaceTooLarge(ModelError):
    pass


@dataclass
class FlowTerm:
    """All flows from component ``src`` to component ``dst``, aggregated."""

    src: int
    dst: int
    rbw: int  # kbps
    conflict: np.ndarray  # bool, shape (len(cand[src]), len(cand[dst]))


@dataclass
class ThingTerm:
    """All flows between component ``comp`` and one thing, in one direction."""

    comp: int
    thing: str
    thing_node: int  # infra index, -1 when the thing cannot be located
    outbound: bool  # component -> thing
    rbw: int
    conflict: np.ndarray  # bool, shape (len(cand[comp]),)


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple  # ((var name, coefficient), ...)
    sense: str  # "<=" or "="
    rhs: int


@dataclass
class MilpModel:
    components: list
    hw: list
    cand_nodes: list  # per component: int64 array of infra node indices
    cand_costs: list  # per component: list of Decimal
    node_ids: tuple
    hw_cap: np.ndarray  # per infra node: fhw - hwTh
    bw_cap: np.ndarray  # per ordered infra node pair: fbw - bwTh, kbps
    max_bin: int | None
    flows: list = field(default_factory=list)
    thing_flows: list = field(default_factory=list)

    @property
    def x_vars(self) -> list:
        return [
            (c, self.node_ids[j]) for c, nodes in zip(self.components, self.cand_nodes) for j in nodes
        ]

    @property
    def objective(self) -> dict:
        return {
            (c, self.node_ids[j]): cost
            for c, nodes, costs in zip(self.components, self.cand_nodes, self.cand_costs)
            for j, cost in zip(nodes, costs)
        }

    @property
    def b_vars(self) -> list:
        used = set()
        for nodes in self.cand_nodes:
            used.update(int(j) for j in nodes)
        return sorted(self.node_ids[j] for j in used)

    def y_pairs(self, term: FlowTerm):
        """Candidate positions (a, b) of a flow term that need a y variable."""
        ci, ch = self.cand_nodes[term.src], self.cand_nodes[term.dst]
        free = ~term.conflict & (ci[:, None] != ch[None, :])
        return [(int(a), int(b)) for a, b in zip(*np.nonzero(free))]

    @property
    def y_vars(self) -> list:
        out = []
        for t in self.flows:
            ci, ch = self.cand_nodes[t.src], self.cand_nodes[t.dst]
            for a, b in self.y_pairs(t):
                out.append(
                    (self.components[t.src], self.node_ids[ci[a]], self.components[t.dst], self.node_ids[ch[b]])
                )
        return out

    # -- explicit constraint rows (export, verification) ---------------------

    def constraints(self):
        xs = lambda c, j: xname(self.components[c], self.node_ids[j])  # noqa: E731
        for c, nodes in enumerate(self.cand_nodes):
            yield Constraint(f"assign_{_clean(self.components[c])}", tuple((xs(c, j), 1) for j in nodes), "=", 1)
        for c, nodes in enumerate(self.cand_nodes):
            for j in nodes:
                yield Constraint(
                    f"use_{_clean(self.components[c])}_{_clean(self.node_ids[j])}",
                    ((xs(c, j), 1), (bname(self.node_ids[j]), -1)),
                    "<=",
                    0,
                )
        if self.max_bin is not None:
            yield Constraint("maxbin", tuple((bname(n), 1) for n in self.b_vars), "<=", self.max_bin)
        per_node = {}
        for c, nodes in enumerate(self.cand_nodes):
            for j in nodes:
                per_node.setdefault(int(j), []).append((xs(c, j), self.hw[c]))
        for j in sorted(per_node, key=lambda j: self.node_ids[j]):
            yield Constraint(f"hw_{_clean(self.node_ids[j])}", tuple(per_node[j]), "<=", int(self.hw_cap[j]))
        for t in self.flows:
            ci, ch = self.cand_nodes[t.src], self.cand_nodes[t.dst]
            for a, b in zip(*np.nonzero(t.conflict)):
                xi, xh = xs(t.src, ci[a]), xs(t.dst, ch[b])
                yield Constraint(f"cut_{xi[2:]}_{xh[2:]}", ((xi, 1), (xh, 1)), "<=", 1)
        for n, t in enumerate(self.thing_flows):
            for a in np.flatnonzero(t.conflict):
                xi = xs(t.comp, self.cand_nodes[t.comp][a])
                yield Constraint(f"tcut{n}_{xi[2:]}", ((xi, 1),), "<=", 0)
        bw_rows = {}
        for t in self.flows:
            ci, ch = self.cand_nodes[t.src], self.cand_nodes[t.dst]
            for a, b in self.y_pairs(t):
                j, k = int(ci[a]), int(ch[b])
                y = yname(self.components[t.src], self.node_ids[j], self.components[t.dst], self.node_ids[k])
                bw_rows.setdefault((j, k), []).append((y, t.rbw))
        for t in self.thing_flows:
            if t.thing_node < 0:
                continue
            for a in np.flatnonzero(~t.conflict):
                j = int(self.cand_nodes[t.comp][a])
                if j == t.thing_node:
                    continue
                key = (j, t.thing_node) if t.outbound else (t.thing_node, j)
                bw_rows.setdefault(key, []).append((xs(t.comp, j), t.rbw))
        for (j, k) in sorted(bw_rows, key=lambda jk: (self.node_ids[jk[0]], self.node_ids[jk[1]])):
            name = f"bw_{_clean(self.node_ids[j])}_{_clean(self.node_ids[k])}"
            yield Constraint(name, tuple(bw_rows[(j, k)]), "<=", int(self.bw_cap[j, k]))
        for t in self.flows:
            ci, ch = self.cand_nodes[t.src], self.cand_nodes[t.dst]
            for a, b in self.y_pairs(t):
                xi, xh = xs(t.src, ci[a]), xs(t.dst, ch[b])
                y = yname(self.components[t.src], self.node_ids[ci[a]], self.components[t.dst], self.node_ids[ch[b]])
                yield Constraint(f"ya{y[1:]}", ((y, 1), (xi, -1)), "<=", 0)
                yield Constraint(f"yb{y[1:]}", ((y, 1), (xh, -1)), "<=", 0)
                yield Constraint(f"yc{y[1:]}", ((xi, 1), (xh, 1), (y, -1)), "<=", 1)

    def violated(self, values: dict) -> list:
        """Names of constraints broken by a 0/1 assignment ``{var name: value}``."""
        out = []
        for con in self.constraints():
            lhs = sum(coef * values.get(var, 0) for var, coef in con.terms)
            if (con.sense == "=" and lhs != con.rhs) or (con.sense == "<=" and lhs > con.rhs):
                out.append(con.name)
        return out

    def point(self, nodes: dict) -> dict:
        """The 0/1 vector induced by a component->node mapping, with y = x*x and b = used."""
        values = {xname(c, n): 1 for c, n in nodes.items()}
        for n in set(nodes.values()):
            values[bname(n)] = 1
        for i, j, h, k in self.y_vars:
            if nodes.get(i) == j and nodes.get(h) == k:
                values[yname(i, j, h, k)] = 1
        return values


_LP_BAD = re.compile(r"[^A-Za-z0-9_.]")


def _clean(name: str) -> str:
    return _LP_BAD.sub("_", name)


def xname(comp, node):
    return f"x_{_clean(comp)}_{_clean(node)}"


def bname(node):
    return f"b_{_clean(node)}"


def yname(i, j, h, k):
    return f"y_{_clean(i)}_{_clean(j)}_{_clean(h)}_{_clean(k)}"


def build_model(outcome, app, infra) -> MilpModel:
    sets = outcome.candidate_sets
    for cs in sets:
        if len(cs) == 0:
            raise InfeasibleModel(f"component {cs.component!r} has no candidate node")
    idx = infra.index
    components = [cs.component for cs in sets]
    pos = {c: n for n, c in enumerate(components)}
    cand_nodes = [np.array([idx[nid] for nid, _ in cs.candidates], dtype=np.int64) for cs in sets]
    hw_cap = np.array([infra.nodes[n].hw_caps - infra.hw_threshold for n in infra.node_ids], dtype=np.int64)
    bw_cap = infra.bw_kbps - bandwidth_kbps(infra.bw_threshold)
    sec = [infra.nodes[n].sec_caps for n in infra.node_ids]

    def sec_mask(nodes, reqs):
        return np.array([reqs <= sec[j] for j in nodes], dtype=bool)

    pair_terms = {}
    thing_terms = {}
    lat = infra.lat_us
    for fl in app.flows:
        s_thing, d_thing = app.is_thing(fl.src), app.is_thing(fl.dst)
        if s_thing and d_thing:
            continue
        if not s_thing and not d_thing:
            i, h = pos[fl.src], pos[fl.dst]
            ci, ch = cand_nodes[i], cand_nodes[h]
            conflict = _kernels.pair_conflicts(
                lat, ci, ch, fl.max_latency_us, sec_mask(ci, fl.sec_reqs), sec_mask(ch, fl.sec_reqs)
            )
            if (i, h) in pair_terms:
                prev = pair_terms[(i, h)]
                prev.conflict |= conflict
                prev.rbw += fl.required_bw_kbps
            else:
                pair_terms[(i, h)] = FlowTerm(i, h, fl.required_bw_kbps, conflict)
            continue
        comp, thing = (fl.dst, fl.src) if s_thing else (fl.src, fl.dst)
        c = pos[comp]
        ci = cand_nodes[c]
        try:
            t = idx[thing_location(infra, thing)]
        except UnresolvableThing:
            t = -1
        if t < 0:
            conflict = np.ones(len(ci), dtype=bool)
        else:
            rows, cols = (ci, np.array([t])) if not s_thing else (np.array([t]), ci)
            ok_t = fl.sec_reqs <= sec[t]
            block = _kernels.pair_conflicts(
                lat, rows, cols, fl.max_latency_us,
                sec_mask(rows, fl.sec_reqs) if not s_thing else np.array([ok_t]),
                sec_mask(cols, fl.sec_reqs) if s_thing else np.array([ok_t]),
            )
            conflict = block[:, 0] if not s_thing else block[0, :]
        key = (c, thing, not s_thing)
        if key in thing_terms:
            prev = thing_terms[key]
            prev.conflict |= conflict
            prev.rbw += fl.required_bw_kbps
        else:
            thing_terms[key] = ThingTerm(c, thing, t, not s_thing, fl.required_bw_kbps, conflict)

    return MilpModel(
        components=components,
        hw=[app.hw_reqs(c) for c in components],
        cand_nodes=cand_nodes,
        cand_costs=[[cost for _, cost in cs.candidates] for cs in sets],
        node_ids=infra.node_ids,
        hw_cap=hw_cap,
        bw_cap=bw_cap,
        max_bin=infra.max_bin,
        flows=[pair_terms[k] for k in sorted(pair_terms)],
        thing_flows=[thing_terms[k] for k in sorted(thing_terms)],
    )


# ---------------------------------------------------------------------------
# solving


@dataclass
class SolveResult:
    status: str
    placement: Placement | None = None
    objective_value: Decimal | None = None
    nodes_explored: int = 0
    wall_time_ms: float = 0.0
    seed: int = 0

    @property
    def has_placement(self) -> bool:
        return self.placement is not None


class _Timeout(Exception):
    pass


def solve(model: MilpModel, budget_ms: float = 60_000, seed: int = 0) -> SolveResult:
    """Depth-first branch-and-bound with forward checking.

    Components are branched in descending hardware demand (ties by id), nodes
    in ascending cost. A branch is cut when its cost plus the cheapest
    remaining option of every unassigned component reaches the incumbent, or
    when propagation empties some component's domain. ``seed`` does not
    influence the search; it is echoed back in the result.
    """
    start = time.perf_counter()
    deadline = start + budget_ms / 1000.0
    n = len(model.components)
    if n == 0:
        return SolveResult(OPTIMAL, Placement({}), Decimal("0.000000"), 1, 0.0, seed)

    cand = model.cand_nodes
    costs = [np.array([cost_units(c) for c in cc], dtype=np.int64) for cc in model.cand_costs]
    hw = model.hw
    hw_cap = model.hw_cap
    bw_cap = model.bw_cap
    slot = [{int(j): a for a, j in enumerate(nodes)} for nodes in cand]

    domains = [model.hw_cap[nodes] >= hw[c] for c, nodes in enumerate(cand)]
    for t in model.thing_flows:
        domains[t.comp] &= ~t.conflict
    nbrs = [[] for _ in range(n)]
    for t in model.flows:
        nbrs[t.src].append(t)
        nbrs[t.dst].append(t)
    things_of = [[] for _ in range(n)]
    for t in model.thing_flows:
        if t.thing_node >= 0:
            things_of[t.comp].append(t)

    order = sorted(range(n), key=lambda c: (-hw[c], model.components[c]))
    assigned = [-1] * n  # candidate position per component
    hw_used = {}
    bw_used = {}
    used_nodes = {}
    state = {"best": None, "best_cost": math.inf, "nodes": 0}

    def node_of(c):
        return int(cand[c][assigned[c]])

    def place(c, a):
        """Commit c to candidate a; return the bandwidth increments, or None if a cap breaks."""
        j = int(cand[c][a])
        if hw_used.get(j, 0) + hw[c] > hw_cap[j]:
            return None
        if model.max_bin is not None and j not in used_nodes and len(used_nodes) >= model.max_bin:
            return None
        incs = {}
        for t in nbrs[c]:
            other = t.dst if t.src == c else t.src
            if assigned[other] < 0:
                continue
            k = node_of(other)
            if j != k:
                key = (j, k) if t.src == c else (k, j)
                incs[key] = incs.get(key, 0) + t.rbw
        for t in things_of[c]:
            if j != t.thing_node:
                key = (j, t.thing_node) if t.outbound else (t.thing_node, j)
                incs[key] = incs.get(key, 0) + t.rbw
        for key, inc in incs.items():
            if bw_used.get(key, 0) + inc > bw_cap[key]:
                return None
        for key, inc in incs.items():
            bw_used[key] = bw_used.get(key, 0) + inc
        hw_used[j] = hw_used.get(j, 0) + hw[c]
        used_nodes[j] = used_nodes.get(j, 0) + 1
        assigned[c] = a
        return incs

    def unplace(c, incs):
        j = node_of(c)
        for key, inc in incs.items():
            bw_used[key] -= inc
        hw_used[j] -= hw[c]
        used_nodes[j] -= 1
        if used_nodes[j] == 0:
            del used_nodes[j]
        assigned[c] = -1

    def propagate(c, doms):
        """Shrink unassigned domains after c was placed; False on a wipe-out."""
        a = assigned[c]
        j = node_of(c)
        new = list(doms)
        touched = set()
        for t in nbrs[c]:
            other = t.dst if t.src == c else t.src
            if assigned[other] >= 0:
                continue
            row = ~(t.conflict[a, :] if t.src == c else t.conflict[:, a])
            nodes = cand[other]
            if t.src == c:
                room = bw_cap[j, nodes] - np.array([bw_used.get((j, int(k)), 0) for k in nodes])
            else:
                room = bw_cap[nodes, j] - np.array([bw_used.get((int(k), j), 0) for k in nodes])
            row &= (nodes == j) | (room >= t.rbw)
            new[other] = (new[other] if other in touched else new[other].copy()) & row
            touched.add(other)
        free_hw = hw_cap[j] - hw_used.get(j, 0)
        full = model.max_bin is not None and len(used_nodes) >= model.max_bin
        for u in range(n):
            if assigned[u] >= 0:
                continue
            b = slot[u].get(j)
            if b is not None and new[u][b] and hw[u] > free_hw:
                new[u] = new[u] if u in touched else new[u].copy()
                new[u][b] = False
                touched.add(u)
            if full:
                keep = np.isin(cand[u], list(used_nodes))
                new[u] = new[u] & keep
            if not new[u].any():
                return None
        return new

    def lower_bound(doms, skip=-1):
        total = 0
        for u in range(n):
            if assigned[u] >= 0 or u == skip:
                continue
            m = doms[u]
            first = int(np.argmax(m))
            if not m[first]:
                return None
            total += int(costs[u][first])
        return total

    def dfs(depth, partial, doms):
        state["nodes"] += 1
        if state["nodes"] % 128 == 0 and time.perf_counter() > deadline:
            raise _Timeout
        if depth == n:
            state["best_cost"] = partial
            state["best"] = [int(cand[c][assigned[c]]) for c in range(n)]
            return
        c = order[depth]
        rest = lower_bound(doms, skip=c)
        if rest is None:
            return
        for a in np.flatnonzero(doms[c]):
            a = int(a)
            cost = partial + int(costs[c][a])
            if cost + rest >= state["best_cost"]:
                break
            incs = place(c, a)
            if incs is None:
                continue
            new = propagate(c, doms)
            if new is not None:
                lb = lower_bound(new)
                if lb is not None and cost + lb < state["best_cost"]:
                    dfs(depth + 1, cost, new)
            unplace(c, incs)

    status = OPTIMAL
    if all(d.any() for d in domains):
        try:
            dfs(0, 0, domains)
        except _Timeout:
            status = TIMEOUT
    elapsed = (time.perf_counter() - start) * 1000.0
    if state["best"] is None:
        return SolveResult(INFEASIBLE if status == OPTIMAL else TIMEOUT, None, None, state["nodes"], elapsed, seed)
    assignments = {}
    for c, j in enumerate(state["best"]):
        a = slot[c][j]
        assignments[model.components[c]] = Assignment(model.node_ids[j], model.cand_costs[c][a])
    placement = Placement(assignments)
    return SolveResult(status, placement, placement.total_cost, state["nodes"], elapsed, seed)


# ---------------------------------------------------------------------------
# reference solver


def enumerate_feasible(outcome, app, infra, guard: int = ORACLE_GUARD):
    """Yield every complete candidate assignment with no violated constraint."""
    sets = outcome.candidate_sets
    size = math.prod(len(cs) for cs in sets)
    if size > guard:
        raise SearchSpaceTooLarge(f"{size} assignments exceed the oracle guard of {guard}")
    comps = [cs.component for cs in sets]
    for combo in itertools.product(*[cs.nodes for cs in sets]):
        nodes = dict(zip(comps, combo))
        if not placement_violations(app, infra, nodes):
            yield nodes


def brute_force_oracle(outcome, app, infra, table, guard: int = ORACLE_GUARD) -> SolveResult:
    """Cheapest feasible assignment by exhaustive enumeration, costs recomputed from ``table``."""
    start = time.perf_counter()
    sets = outcome.candidate_sets
    size = math.prod(len(cs) for cs in sets)
    if size > guard:
        raise SearchSpaceTooLarge(f"{size} assignments exceed the oracle guard of {guard}")
    comps = [cs.component for cs in sets]
    best, best_cost, seen = None, None, 0
    for combo in itertools.product(*[cs.nodes for cs in sets]):
        seen += 1
        nodes = dict(zip(comps, combo))
        costs = {c: component_cost(table, infra.nodes[n], c, app) for c, n in nodes.items()}
        total = sum(costs.values(), Decimal(0))
        if best_cost is not None and total >= best_cost:
            continue
        if placement_violations(app, infra, nodes):
            continue
        best, best_cost = costs, total
        best_nodes = nodes
    elapsed = (time.perf_counter() - start) * 1000.0
    if best is None:
        return SolveResult(INFEASIBLE, None, None, seen, elapsed)
    placement = Placement({c: Assignment(best_nodes[c], best[c]) for c in comps})
    return SolveResult(OPTIMAL, placement, placement.total_cost, seen, elapsed)


# ---------------------------------------------------------------------------
# LP export


def _fmt(coef) -> str:
    if isinstance(coef, Decimal):
        text = format(coef.normalize(), "f")
        return "0" if text in ("-0", "0") else text
    return str(coef)


def lp_text(model: MilpModel) -> str:
    lines = ["\\ placement model; hardware in units, bandwidth in kbps", "Minimize"]
    obj = [f"{_fmt(cost)} {xname(c, n)}" for (c, n), cost in model.objective.items()]
    lines.append(" obj: " + (" + ".join(obj) if obj else "0"))
    lines.append("Subject To")
    for con in model.constraints():
        body = ""
        for n, (var, coef) in enumerate(con.terms):
            sign = "-" if coef < 0 else "+"
            mag = abs(coef)
            term = var if mag == 1 else f"{_fmt(mag)} {var}"
            body += (f"{term}" if sign == "+" else f"- {term}") if n == 0 else f" {sign} {term}"
        lines.append(f" {con.name}: {body} {con.sense} {con.rhs}")
    lines.append("Binary")
    for c, n in model.x_vars:
        lines.append(f" {xname(c, n)}")
    for n in model.b_vars:
        lines.append(f" {bname(n)}")
    for i, j, h, k in model.y_vars:
        lines.append(f" {yname(i, j, h, k)}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_lp(model: MilpModel, path) -> str:
    text = lp_text(model)
    with open(path, "w") as fh:
        fh.write(text)
    return text
