"""Domain types for applications and Cloud-Edge infrastructures.

Everything the prefilter and the optimizer look at lives here: component
specs and instances, data flows, nodes, directed links, placements, and the
closed requirement-expression language used for per-spec placement policies.

Numeric conventions
-------------------
Costs are ``Decimal`` values quantized to 6 fractional digits so totals do not
depend on summation order. Latencies and bandwidths are kept as floats on the
public types (milliseconds / Mbps) but every feasibility comparison goes
through integer microseconds and kbps (:func:`latency_us`,
:func:`bandwidth_kbps`) so that sums are exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Union

import numpy as np

NODE_TYPES = ("cloud", "edge", "thing")
COST_QUANTUM = Decimal("0.000001")

# generator bounds, asserted on load only for infrastructures flagged as generated
GEN_HW_RANGE = (32, 1024)
GEN_BW_RANGE = (20.0, 500.0)
GEN_LAT_MIN = 2.0


class ModelError(ValueError):
    pass


class SchemaError(ModelError):
    """A file does not match the expected JSON layout."""


class ValidationError(ModelError):
    """Cross-reference or invariant violation in otherwise well-formed input."""


class UnresolvableThing(ModelError):
    pass


def to_cost(value) -> Decimal:
    return Decimal(str(value)).quantize(COST_QUANTUM, rounding=ROUND_HALF_EVEN)


def cost_units(cost: Decimal) -> int:
    """Cost in integer millionths."""
    return int(cost.scaleb(6).to_integral_value())


def latency_us(ms: float) -> int:
    return int(round(Decimal(str(ms)) * 1000))


def bandwidth_kbps(mbps: float) -> int:
    return int(round(Decimal(str(mbps)) * 1000))


# ---------------------------------------------------------------------------
# applications


@dataclass(frozen=True)
class ServiceSpec:
    id: str
    sw_reqs: frozenset
    arch: str
    hw_reqs: int


@dataclass(frozen=True)
class FunctionSpec:
    id: str
    sw_platform: str
    arch: str
    hw_reqs: int


@dataclass(frozen=True)
class ServiceInstance:
    id: str
    spec: str


@dataclass(frozen=True)
class FunctionInstance:
    id: str
    spec: str
    monthly_requests: int
    duration_ms: float


@dataclass(frozen=True)
class ThingInstance:
    id: str
    thing: str
    thing_type: str


@dataclass(frozen=True)
class DataFlow:
    src: str
    dst: str
    data_type: str
    sec_reqs: frozenset
    size_mb: float
    rate_hz: float
    max_latency_ms: float

    @property
    def required_bw(self) -> float:
        """Mbps needed by the flow: megabytes per message, 8 bits per byte, times rate."""
        return float(Decimal(str(self.size_mb)) * 8 * Decimal(str(self.rate_hz)))

    @property
    def required_bw_kbps(self) -> int:
        return bandwidth_kbps(self.required_bw)

    @property
    def max_latency_us(self) -> int:
        return latency_us(self.max_latency_ms)


# requirement expressions ----------------------------------------------------


@dataclass(frozen=True)
class ProviderIn:
    values: frozenset


@dataclass(frozen=True)
class LocationIn:
    values: frozenset


@dataclass(frozen=True)
class NodeTypeIn:
    values: frozenset


@dataclass(frozen=True)
class HasSecCaps:
    values: frozenset


@dataclass(frozen=True)
class AvgInBandwidthAtLeast:
    mbps: float


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Not:
    arg: "RequirementExpr"


RequirementExpr = Union[
    ProviderIn, LocationIn, NodeTypeIn, HasSecCaps, AvgInBandwidthAtLeast, And, Or, Not
]

_SET_ATOMS = {
    "providerIn": ProviderIn,
    "locationIn": LocationIn,
    "nodeTypeIn": NodeTypeIn,
    "hasSecCaps": HasSecCaps,
}


def parse_requirement(obj, where: str = "requirements") -> RequirementExpr:
    if not isinstance(obj, dict) or "op" not in obj:
        raise SchemaError(f"{where}: expected an object with an 'op' key")
    op = obj["op"]
    if op in _SET_ATOMS:
        values = obj.get("values")
        if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
            raise SchemaError(f"{where}.values: expected a list of strings")
        return _SET_ATOMS[op](frozenset(values))
    if op == "avgInBwAtLeast":
        value = obj.get("value")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"{where}.value: expected a number")
        return AvgInBandwidthAtLeast(float(value))
    if op in ("and", "or"):
        args = obj.get("args")
        if not isinstance(args, list):
            raise SchemaError(f"{where}.args: expected a list")
        parsed = tuple(parse_requirement(a, f"{where}.args[{n}]") for n, a in enumerate(args))
        return And(parsed) if op == "and" else Or(parsed)
    if op == "not":
        return Not(parse_requirement(obj.get("arg"), f"{where}.arg"))
    raise SchemaError(f"{where}.op: unknown operator {op!r}")


def dump_requirement(expr: RequirementExpr) -> dict:
    for name, cls in _SET_ATOMS.items():
        if isinstance(expr, cls):
            return {"op": name, "values": sorted(expr.values)}
    if isinstance(expr, AvgInBandwidthAtLeast):
        return {"op": "avgInBwAtLeast", "value": expr.mbps}
    if isinstance(expr, And):
        return {"op": "and", "args": [dump_requirement(a) for a in expr.args]}
    if isinstance(expr, Or):
        return {"op": "or", "args": [dump_requirement(a) for a in expr.args]}
    if isinstance(expr, Not):
        return {"op": "not", "arg": dump_requirement(expr.arg)}
    raise TypeError(f"not a requirement expression: {expr!r}")


@dataclass
class ApplicationSpec:
    name: str
    services: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)
    things: dict = field(default_factory=dict)
    function_instances: list = field(default_factory=list)
    service_instances: list = field(default_factory=list)
    thing_instances: list = field(default_factory=list)
    flows: list = field(default_factory=list)
    requirement_policies: dict = field(default_factory=dict)
    comment: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        seen = set()
        for inst in [*self.function_instances, *self.service_instances, *self.thing_instances]:
            if inst.id in seen:
                raise ValidationError(f"duplicate instance id {inst.id!r}")
            seen.add(inst.id)
        for spec in self.services.values():
            if spec.hw_reqs <= 0:
                raise ValidationError(f"service {spec.id!r}: hwReqs must be positive")
        for spec in self.functions.values():
            if spec.hw_reqs <= 0:
                raise ValidationError(f"function {spec.id!r}: hwReqs must be positive")
        for inst in self.service_instances:
            if inst.spec not in self.services:
                raise ValidationError(f"service instance {inst.id!r}: unknown service {inst.spec!r}")
        for inst in self.function_instances:
            if inst.spec not in self.functions:
                raise ValidationError(f"function instance {inst.id!r}: unknown function {inst.spec!r}")
            if inst.monthly_requests < 0:
                raise ValidationError(f"function instance {inst.id!r}: monthlyRequests < 0")
            if inst.duration_ms <= 0:
                raise ValidationError(f"function instance {inst.id!r}: durationMs must be positive")
        for n, fl in enumerate(self.flows):
            for end in (fl.src, fl.dst):
                if end not in seen:
                    raise ValidationError(f"flows[{n}]: unknown instance {end!r}")
            if fl.src == fl.dst:
                raise ValidationError(f"flows[{n}]: src and dst are both {fl.src!r}")
            if fl.size_mb <= 0 or fl.rate_hz <= 0 or fl.max_latency_ms <= 0:
                raise ValidationError(f"flows[{n}]: sizeMB, rateHz and maxLatencyMs must be positive")
        for spec_id in self.requirement_policies:
            if spec_id not in self.services and spec_id not in self.functions:
                raise ValidationError(f"requirements: unknown spec {spec_id!r}")

    @cached_property
    def _instances(self) -> dict:
        return {i.id: i for i in [*self.function_instances, *self.service_instances, *self.thing_instances]}

    @cached_property
    def components(self) -> tuple:
        """Service and function instance ids, ascending."""
        return tuple(sorted(i.id for i in [*self.function_instances, *self.service_instances]))

    def instance(self, inst_id: str):
        return self._instances[inst_id]

    def is_thing(self, inst_id: str) -> bool:
        return isinstance(self._instances.get(inst_id), ThingInstance)

    def spec_of(self, comp_id: str):
        inst = self._instances[comp_id]
        if isinstance(inst, ServiceInstance):
            return self.services[inst.spec]
        if isinstance(inst, FunctionInstance):
            return self.functions[inst.spec]
        raise ValidationError(f"{comp_id!r} is not a service or function instance")

    def hw_reqs(self, comp_id: str) -> int:
        return self.spec_of(comp_id).hw_reqs

    def policy_for(self, comp_id: str):
        return self.requirement_policies.get(self.spec_of(comp_id).id)

    @cached_property
    def _flows_by_endpoint(self) -> dict:
        out = {}
        for fl in self.flows:
            out.setdefault(fl.src, []).append(fl)
            out.setdefault(fl.dst, []).append(fl)
        return out

    def flows_of(self, inst_id: str) -> list:
        return self._flows_by_endpoint.get(inst_id, [])


# ---------------------------------------------------------------------------
# infrastructures


@dataclass
class Node:
    id: str
    node_type: str
    location: str = ""
    provider: str = ""
    sw_caps: frozenset = frozenset()
    arch: str = "x86"
    hw_caps: int = 0
    sec_caps: frozenset = frozenset()
    hosted_things: frozenset = frozenset()
    available: bool = True


@dataclass(frozen=True)
class Link:
    src: str
    dst: str
    latency_ms: float
    bandwidth_mbps: float


@dataclass
class Infrastructure:
    nodes: dict = field(default_factory=dict)
    links: dict = field(default_factory=dict)
    hw_threshold: int = 0
    bw_threshold: float = 0.0
    max_bin: int | None = None
    generated: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        for node in self.nodes.values():
            if node.node_type not in NODE_TYPES:
                raise ValidationError(f"node {node.id!r}: type must be one of {NODE_TYPES}")
            if node.hw_caps < 0:
                raise ValidationError(f"node {node.id!r}: hwCaps < 0")
        for (src, dst), link in self.links.items():
            if src not in self.nodes or dst not in self.nodes:
                raise ValidationError(f"link {src}->{dst}: unknown endpoint")
            if link.latency_ms < 0:
                raise ValidationError(f"link {src}->{dst}: latencyMs < 0")
            if link.bandwidth_mbps <= 0:
                raise ValidationError(f"link {src}->{dst}: bandwidthMbps must be positive")
        if self.hw_threshold < 0 or self.bw_threshold < 0:
            raise ValidationError("hwThreshold and bwThreshold must be >= 0")
        if self.max_bin is not None and self.max_bin <= 0:
            raise ValidationError("maxBin must be positive or null")
        hosts = {}
        for node in self.nodes.values():
            for thing in node.hosted_things:
                if thing in hosts:
                    raise ValidationError(f"thing {thing!r} hosted by both {hosts[thing]!r} and {node.id!r}")
                hosts[thing] = node.id
        if self.generated:
            lo, hi = GEN_HW_RANGE
            for node in self.nodes.values():
                if not lo <= node.hw_caps <= hi:
                    raise ValidationError(f"node {node.id!r}: generated hwCaps outside [{lo}, {hi}]")
            blo, bhi = GEN_BW_RANGE
            for link in self.links.values():
                if not blo <= link.bandwidth_mbps <= bhi or link.latency_ms < GEN_LAT_MIN:
                    raise ValidationError(f"link {link.src}->{link.dst}: generated values out of range")

    @cached_property
    def node_ids(self) -> tuple:
        return tuple(sorted(self.nodes))

    @cached_property
    def index(self) -> dict:
        return {nid: n for n, nid in enumerate(self.node_ids)}

    @cached_property
    def thing_hosts(self) -> dict:
        return {t: node.id for node in self.nodes.values() for t in node.hosted_things}

    @cached_property
    def lat_us(self) -> np.ndarray:
        """Dense latency matrix in microseconds; -1 where no link exists."""
        n = len(self.node_ids)
        mat = np.full((n, n), -1, dtype=np.int64)
        np.fill_diagonal(mat, 0)
        for (src, dst), link in self.links.items():
            mat[self.index[src], self.index[dst]] = latency_us(link.latency_ms)
        return mat

    @cached_property
    def bw_kbps(self) -> np.ndarray:
        """Dense bandwidth matrix in kbps; 0 where no link exists."""
        n = len(self.node_ids)
        mat = np.zeros((n, n), dtype=np.int64)
        for (src, dst), link in self.links.items():
            mat[self.index[src], self.index[dst]] = bandwidth_kbps(link.bandwidth_mbps)
        return mat

    @cached_property
    def avg_in_bw(self) -> dict:
        """Mean bandwidth (Mbps) of links entering each node; absent when none enter."""
        totals = {}
        for (_, dst), link in self.links.items():
            acc = totals.setdefault(dst, [0.0, 0])
            acc[0] += link.bandwidth_mbps
            acc[1] += 1
        return {nid: s / c for nid, (s, c) in totals.items()}

    def link(self, src: str, dst: str) -> Link | None:
        return self.links.get((src, dst))

    def set_failed(self, failed: Iterable[str]):
        failed = set(failed)
        for nid, node in self.nodes.items():
            node.available = nid not in failed

    @property
    def failed(self) -> set:
        return {nid for nid, node in self.nodes.items() if not node.available}


def thing_location(infra: Infrastructure, thing_id: str) -> str:
    """Node currently hosting ``thing_id``."""
    host = infra.thing_hosts.get(thing_id)
    if host is None:
        raise UnresolvableThing(f"thing {thing_id!r} is not hosted by any node")
    if not infra.nodes[host].available:
        raise UnresolvableThing(f"thing {thing_id!r} is hosted by failed node {host!r}")
    return host


# ---------------------------------------------------------------------------
# placements


class Assignment(NamedTuple):
    node: str
    cost: Decimal


@dataclass
class Placement:
    assignments: dict = field(default_factory=dict)

    @property
    def total_cost(self) -> Decimal:
        return sum((a.cost for a in self.assignments.values()), Decimal("0")).quantize(COST_QUANTUM)

    def node_of(self, comp_id: str) -> str:
        return self.assignments[comp_id].node

    def nodes(self) -> dict:
        return {c: a.node for c, a in self.assignments.items()}

    def is_complete_for(self, app: ApplicationSpec) -> bool:
        return set(self.assignments) == set(app.components)

    def to_json(self, mode: str = "", status: str = "") -> dict:
        return {
            "assignments": {
                c: {"node": a.node, "cost": float(a.cost)} for c, a in sorted(self.assignments.items())
            },
            "totalCost": float(self.total_cost),
            "mode": mode,
            "status": status,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Placement":
        try:
            raw = obj["assignments"]
            return cls({c: Assignment(v["node"], to_cost(v["cost"])) for c, v in raw.items()})
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"placement: malformed assignments ({exc})") from None


def placement_violations(app: ApplicationSpec, infra: Infrastructure, nodes: dict) -> list:
    """Every constraint a complete component->node mapping breaks, by direct definition.

    Covers availability, hardware sums, MAX_BIN, and per-flow security, latency
    and aggregated per-link bandwidth. Compatibility checks (architecture,
    software, policies) are the prefilter's business and are not repeated here.
    """
    out = []
    for comp in app.components:
        if comp not in nodes:
            out.append(("missing", comp))
    for comp, nid in nodes.items():
        node = infra.nodes.get(nid)
        if node is None or not node.available:
            out.append(("availability", comp, nid))
    load = {}
    for comp, nid in nodes.items():
        load[nid] = load.get(nid, 0) + app.hw_reqs(comp)
    for nid, used in load.items():
        if nid in infra.nodes and used > infra.nodes[nid].hw_caps - infra.hw_threshold:
            out.append(("hardware", nid))
    if infra.max_bin is not None and len(set(nodes.values())) > infra.max_bin:
        out.append(("max_bin",))

    bw_used = {}
    for n, fl in enumerate(app.flows):
        ends = []
        for end in (fl.src, fl.dst):
            if app.is_thing(end):
                try:
                    ends.append(thing_location(infra, end))
                except UnresolvableThing:
                    ends.append(None)
            else:
                ends.append(nodes.get(end))
        a, b = ends
        if a is None or b is None:
            if app.is_thing(fl.src) or app.is_thing(fl.dst):
                out.append(("thing", n))
            continue
        if not (fl.sec_reqs <= infra.nodes[a].sec_caps and fl.sec_reqs <= infra.nodes[b].sec_caps):
            out.append(("security", n))
        if a == b:
            continue
        link = infra.link(a, b)
        if link is None or latency_us(link.latency_ms) > fl.max_latency_us:
            out.append(("latency", n))
            continue
        bw_used[(a, b)] = bw_used.get((a, b), 0) + fl.required_bw_kbps
    cap_margin = bandwidth_kbps(infra.bw_threshold)
    for (a, b), used in sorted(bw_used.items()):
        if used > bandwidth_kbps(infra.link(a, b).bandwidth_mbps) - cap_margin:
            out.append(("bandwidth", a, b))
    return out


# ---------------------------------------------------------------------------
# JSON (de)serialization


def _get(obj: dict, key: str, kind, where: str, default=...):
    if key not in obj:
        if default is ...:
            raise SchemaError(f"{where}.{key}: missing")
        return default
    value = obj[key]
    if kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind is list:
        ok = isinstance(value, list)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise SchemaError(f"{where}.{key}: expected {kind.__name__}, got {type(value).__name__}")
    return value


def _str_list(obj, key, where, default=...):
    value = _get(obj, key, list, where, [] if default is ... else default)
    if not all(isinstance(v, str) for v in value):
        raise SchemaError(f"{where}.{key}: expected a list of strings")
    return frozenset(value)


def _unique(items, what):
    out = {}
    for item in items:
        if item.id in out:
            raise ValidationError(f"duplicate {what} id {item.id!r}")
        out[item.id] = item
    return out


def application_from_json(obj: dict) -> ApplicationSpec:
    if not isinstance(obj, dict):
        raise SchemaError("application: expected a JSON object")
    name = _get(obj, "name", str, "application")
    services = _unique(
        (
            ServiceSpec(
                _get(s, "id", str, f"services[{n}]"),
                _str_list(s, "swReqs", f"services[{n}]"),
                _get(s, "arch", str, f"services[{n}]"),
                _get(s, "hwReqs", int, f"services[{n}]"),
            )
            for n, s in enumerate(_get(obj, "services", list, "application", []))
        ),
        "service",
    )
    functions = _unique(
        (
            FunctionSpec(
                _get(f, "id", str, f"functions[{n}]"),
                _get(f, "swPlatform", str, f"functions[{n}]"),
                _get(f, "arch", str, f"functions[{n}]"),
                _get(f, "hwReqs", int, f"functions[{n}]"),
            )
            for n, f in enumerate(_get(obj, "functions", list, "application", []))
        ),
        "function",
    )
    things = {}
    for n, t in enumerate(_get(obj, "things", list, "application", [])):
        things[_get(t, "id", str, f"things[{n}]")] = _get(t, "type", str, f"things[{n}]")

    sis = [
        ServiceInstance(_get(s, "id", str, f"serviceInstances[{n}]"), _get(s, "service", str, f"serviceInstances[{n}]"))
        for n, s in enumerate(_get(obj, "serviceInstances", list, "application", []))
    ]
    fis = [
        FunctionInstance(
            _get(f, "id", str, f"functionInstances[{n}]"),
            _get(f, "function", str, f"functionInstances[{n}]"),
            _get(f, "monthlyRequests", int, f"functionInstances[{n}]"),
            float(_get(f, "durationMs", float, f"functionInstances[{n}]")),
        )
        for n, f in enumerate(_get(obj, "functionInstances", list, "application", []))
    ]
    tis = []
    for n, t in enumerate(_get(obj, "thingInstances", list, "application", [])):
        thing = _get(t, "thing", str, f"thingInstances[{n}]")
        if thing not in things:
            raise ValidationError(f"thingInstances[{n}]: unknown thing {thing!r}")
        tis.append(ThingInstance(_get(t, "id", str, f"thingInstances[{n}]"), thing, things[thing]))
    flows = [
        DataFlow(
            _get(f, "src", str, f"flows[{n}]"),
            _get(f, "dst", str, f"flows[{n}]"),
            _get(f, "dataType", str, f"flows[{n}]", ""),
            _str_list(f, "secReqs", f"flows[{n}]"),
            float(_get(f, "sizeMB", float, f"flows[{n}]")),
            float(_get(f, "rateHz", float, f"flows[{n}]")),
            float(_get(f, "maxLatencyMs", float, f"flows[{n}]")),
        )
        for n, f in enumerate(_get(obj, "flows", list, "application", []))
    ]
    reqs = _get(obj, "requirements", dict, "application", {})
    policies = {k: parse_requirement(v, f"requirements.{k}") for k, v in reqs.items()}
    return ApplicationSpec(
        name=name,
        services=services,
        functions=functions,
        things=things,
        function_instances=fis,
        service_instances=sis,
        thing_instances=tis,
        flows=flows,
        requirement_policies=policies,
        comment=obj.get("comment", ""),
    )


def application_to_json(app: ApplicationSpec) -> dict:
    out = {"name": app.name}
    if app.comment:
        out["comment"] = app.comment
    out["services"] = [
        {"id": s.id, "swReqs": sorted(s.sw_reqs), "arch": s.arch, "hwReqs": s.hw_reqs}
        for s in sorted(app.services.values(), key=lambda s: s.id)
    ]
    out["functions"] = [
        {"id": f.id, "swPlatform": f.sw_platform, "arch": f.arch, "hwReqs": f.hw_reqs}
        for f in sorted(app.functions.values(), key=lambda f: f.id)
    ]
    out["things"] = [{"id": t, "type": ty} for t, ty in sorted(app.things.items())]
    out["serviceInstances"] = [{"id": s.id, "service": s.spec} for s in app.service_instances]
    out["functionInstances"] = [
        {"id": f.id, "function": f.spec, "monthlyRequests": f.monthly_requests, "durationMs": f.duration_ms}
        for f in app.function_instances
    ]
    out["thingInstances"] = [{"id": t.id, "thing": t.thing} for t in app.thing_instances]
    out["flows"] = [
        {
            "src": f.src,
            "dst": f.dst,
            "dataType": f.data_type,
            "secReqs": sorted(f.sec_reqs),
            "sizeMB": f.size_mb,
            "rateHz": f.rate_hz,
            "maxLatencyMs": f.max_latency_ms,
        }
        for f in app.flows
    ]
    out["requirements"] = {k: dump_requirement(v) for k, v in sorted(app.requirement_policies.items())}
    return out


def infrastructure_from_json(obj: dict) -> Infrastructure:
    if not isinstance(obj, dict):
        raise SchemaError("infrastructure: expected a JSON object")
    nodes = {}
    for n, raw in enumerate(_get(obj, "nodes", list, "infrastructure", [])):
        where = f"nodes[{n}]"
        node = Node(
            id=_get(raw, "id", str, where),
            node_type=_get(raw, "type", str, where),
            location=_get(raw, "location", str, where, ""),
            provider=_get(raw, "provider", str, where, ""),
            sw_caps=_str_list(raw, "swCaps", where),
            arch=_get(raw, "arch", str, where),
            hw_caps=_get(raw, "hwCaps", int, where),
            sec_caps=_str_list(raw, "secCaps", where),
            hosted_things=_str_list(raw, "things", where),
        )
        if node.id in nodes:
            raise ValidationError(f"duplicate node id {node.id!r}")
        nodes[node.id] = node
    links = {}
    for n, raw in enumerate(_get(obj, "links", list, "infrastructure", [])):
        where = f"links[{n}]"
        src, dst = _get(raw, "src", str, where), _get(raw, "dst", str, where)
        lat = float(_get(raw, "latencyMs", float, where))
        bw = float(_get(raw, "bandwidthMbps", float, where))
        pairs = [(src, dst)]
        if _get(raw, "bidirectional", bool, where, False):
            pairs.append((dst, src))
        for a, b in pairs:
            if (a, b) in links:
                raise ValidationError(f"{where}: duplicate link {a}->{b}")
            links[(a, b)] = Link(a, b, lat, bw)
    max_bin = obj.get("maxBin")
    if max_bin is not None and (not isinstance(max_bin, int) or isinstance(max_bin, bool)):
        raise SchemaError("infrastructure.maxBin: expected int or null")
    return Infrastructure(
        nodes=nodes,
        links=links,
        hw_threshold=_get(obj, "hwThreshold", int, "infrastructure", 0),
        bw_threshold=float(_get(obj, "bwThreshold", float, "infrastructure", 0.0)),
        max_bin=max_bin,
        generated=_get(obj, "generated", bool, "infrastructure", False),
    )


def infrastructure_to_json(infra: Infrastructure) -> dict:
    return {
        "generated": infra.generated,
        "hwThreshold": infra.hw_threshold,
        "bwThreshold": infra.bw_threshold,
        "maxBin": infra.max_bin,
        "nodes": [
            {
                "id": nd.id,
                "type": nd.node_type,
                "location": nd.location,
                "provider": nd.provider,
                "swCaps": sorted(nd.sw_caps),
                "arch": nd.arch,
                "hwCaps": nd.hw_caps,
                "secCaps": sorted(nd.sec_caps),
                "things": sorted(nd.hosted_things),
            }
            for nd in (infra.nodes[i] for i in infra.node_ids)
        ],
        "links": [
            {"src": l.src, "dst": l.dst, "latencyMs": l.latency_ms, "bandwidthMbps": l.bandwidth_mbps}
            for _, l in sorted(infra.links.items())
        ],
    }


def _read_json(path, what):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{what} {path}: invalid JSON ({exc})") from None


def load_application(path) -> ApplicationSpec:
    return application_from_json(_read_json(path, "application"))


def load_infrastructure(path) -> Infrastructure:
    return infrastructure_from_json(_read_json(path, "infrastructure"))


def dump_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def save_infrastructure(infra: Infrastructure, path) -> None:
    dump_json(infrastructure_to_json(infra), path)


def save_application(app: ApplicationSpec, path) -> None:
    dump_json(application_to_json(app), path)
