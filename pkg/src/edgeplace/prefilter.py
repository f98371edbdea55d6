"""Declarative compatibility filtering.

For every component the prefilter computes the cost-sorted list of nodes that
can host it in isolation: node available, architecture match, software
available, spec policy satisfied, and enough free hardware. Data-flow QoS
(security, latency, bandwidth) is checked by :func:`qos_ok` only against
endpoints that are already placed; flows between two unplaced components are
left to the optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal

from .cost import component_cost
from .model import (
    And,
    AvgInBandwidthAtLeast,
    FunctionInstance,
    HasSecCaps,
    LocationIn,
    NodeTypeIn,
    Not,
    Or,
    Placement,
    ProviderIn,
    UnresolvableThing,
    bandwidth_kbps,
    latency_us,
    thing_location,
)

# order in which component_placement checks, and explain() reports, violations
CONSTRAINTS = ("availability", "architecture", "requirements", "software", "hardware")


@dataclass
class CandidateSet:
    component: str
    candidates: list  # [(node_id, Decimal)] ascending by (cost, node id)

    @property
    def nodes(self) -> list:
        return [n for n, _ in self.candidates]

    def __len__(self):
        return len(self.candidates)


@dataclass
class ResidualState:
    hw_used: dict = field(default_factory=dict)  # node id -> hardware units
    bw_used: dict = field(default_factory=dict)  # (src node, dst node) -> kbps

    def add_bw(self, src: str, dst: str, kbps: int):
        if src != dst:
            self.bw_used[(src, dst)] = self.bw_used.get((src, dst), 0) + kbps


def evaluate_requirement(expr, node, infra) -> bool:
    match expr:
        case None:
            return True
        case ProviderIn(values):
            return node.provider in values
        case LocationIn(values):
            return node.location in values
        case NodeTypeIn(values):
            return node.node_type in values
        case HasSecCaps(values):
            return values <= node.sec_caps
        case AvgInBandwidthAtLeast(mbps):
            avg = infra.avg_in_bw.get(node.id)
            return avg is not None and avg >= mbps
        case And(args):
            return all(evaluate_requirement(a, node, infra) for a in args)
        case Or(args):
            return any(evaluate_requirement(a, node, infra) for a in args)
        case Not(arg):
            return not evaluate_requirement(arg, node, infra)
    raise TypeError(f"not a requirement expression: {expr!r}")


def _as_nodes(partial) -> dict:
    """Normalize a partial placement to {component: node id}."""
    if partial is None:
        return {}
    if isinstance(partial, Placement):
        return partial.nodes()
    return {c: (v if isinstance(v, str) else v[0]) for c, v in partial.items()}


def hw_ok(node, hw_reqs: int, partial, infra, app) -> bool:
    used = sum(app.hw_reqs(c) for c, n in _as_nodes(partial).items() if n == node.id)
    return node.hw_caps >= used + hw_reqs + infra.hw_threshold


def _software_ok(inst, spec, node) -> bool:
    if isinstance(inst, FunctionInstance):
        return spec.sw_platform in node.sw_caps
    return spec.sw_reqs <= node.sw_caps


def explain(component: str, node, partial, infra, app) -> str | None:
    """Name of the first constraint ``component`` violates on ``node``, or None."""
    inst, spec = app.instance(component), app.spec_of(component)
    if not node.available:
        return "availability"
    if spec.arch != node.arch:
        return "architecture"
    if not evaluate_requirement(app.policy_for(component), node, infra):
        return "requirements"
    if not _software_ok(inst, spec, node):
        return "software"
    if not hw_ok(node, spec.hw_reqs, partial, infra, app):
        return "hardware"
    return None


def component_placement(component: str, node, partial, infra, app, table) -> Decimal | None:
    """Cost of hosting ``component`` on ``node`` given ``partial``; None when infeasible."""
    if explain(component, node, partial, infra, app) is not None:
        return None
    return component_cost(table, node, component, app)


def compatible_placements(component: str, infra, app, table) -> CandidateSet:
    by_type = {}
    out = []
    for nid in infra.node_ids:
        node = infra.nodes[nid]
        if explain(component, node, None, infra, app) is not None:
            continue
        if node.node_type not in by_type:
            by_type[node.node_type] = component_cost(table, node, component, app)
        out.append((nid, by_type[node.node_type]))
    out.sort(key=lambda nc: (nc[1], nc[0]))
    return CandidateSet(component, out)


def find_compatible(app, infra, table) -> list:
    """One CandidateSet per component (ascending id), each filtered in isolation."""
    return [compatible_placements(c, infra, app, table) for c in app.components]


def residual_state(placed: dict, app, infra, exclude: str | None = None) -> ResidualState:
    """Hardware and link bandwidth committed by ``placed`` (and flows to located things)."""
    res = ResidualState()
    for comp, nid in placed.items():
        if comp != exclude:
            res.hw_used[nid] = res.hw_used.get(nid, 0) + app.hw_reqs(comp)
    for fl in app.flows:
        ends = []
        for end in (fl.src, fl.dst):
            if end == exclude:
                ends.append(None)
            elif app.is_thing(end):
                try:
                    ends.append(thing_location(infra, end))
                except UnresolvableThing:
                    ends.append(None)
            else:
                ends.append(placed.get(end))
        if None in ends or (app.is_thing(fl.src) and app.is_thing(fl.dst)):
            continue
        res.add_bw(ends[0], ends[1], fl.required_bw_kbps)
    return res


def check_flow(flow, src_node: str, dst_node: str, residual: ResidualState, infra) -> bool:
    a, b = infra.nodes[src_node], infra.nodes[dst_node]
    if not (flow.sec_reqs <= a.sec_caps and flow.sec_reqs <= b.sec_caps):
        return False
    if src_node == dst_node:
        return True
    link = infra.link(src_node, dst_node)
    if link is None or latency_us(link.latency_ms) > flow.max_latency_us:
        return False
    room = bandwidth_kbps(link.bandwidth_mbps) - bandwidth_kbps(infra.bw_threshold)
    return residual.bw_used.get((src_node, dst_node), 0) + flow.required_bw_kbps <= room


def qos_ok(component: str, node_id: str, retained, app, infra) -> bool:
    """Check every flow of ``component`` whose other endpoint is already resolvable."""
    placed = {c: n for c, n in _as_nodes(retained).items() if c != component}
    residual = residual_state(placed, app, infra, exclude=component)
    for fl in app.flows_of(component):
        other = fl.dst if fl.src == component else fl.src
        if app.is_thing(other):
            try:
                other_node = thing_location(infra, other)
            except UnresolvableThing:
                return False
        elif other in placed:
            other_node = placed[other]
        else:
            continue
        src, dst = (node_id, other_node) if fl.src == component else (other_node, node_id)
        if not check_flow(fl, src, dst, residual, infra):
            return False
        residual.add_bw(src, dst, fl.required_bw_kbps)
    return True
