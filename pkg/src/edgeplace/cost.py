"""Provisioning-cost model.

Service cost is hardware units times the per-unit price of the spec's
architecture on the node type, plus a flat price per required software.
Function cost follows a per-request pricing scheme: a compute term
proportional to ``hw * requests * duration_ms / 1000`` and a per-request
term.

Prices depend only on the node *type*, never on the node itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from importlib import resources

from .model import (
    FunctionInstance,
    FunctionSpec,
    ModelError,
    SchemaError,
    ServiceInstance,
    ServiceSpec,
    to_cost,
)


class PricingError(ModelError):
    pass


@dataclass
class PriceTable:
    unit_cost: dict = field(default_factory=dict)  # (tag, node_type) -> Decimal
    comp_cost: dict = field(default_factory=dict)  # node_type -> Decimal
    req_cost: dict = field(default_factory=dict)  # node_type -> Decimal

    def __post_init__(self):
        for table in (self.unit_cost, self.comp_cost, self.req_cost):
            for key, price in table.items():
                if price < 0:
                    raise PricingError(f"negative price for {key!r}")

    def unit(self, tag: str, node_type: str) -> Decimal:
        try:
            return self.unit_cost[(tag, node_type)]
        except KeyError:
            raise PricingError(f"no unitCost entry for '{tag}/{node_type}'") from None

    @classmethod
    def from_json(cls, obj: dict) -> "PriceTable":
        try:
            unit = {}
            for key, price in obj.get("unitCost", {}).items():
                tag, sep, node_type = key.rpartition("/")
                if not sep:
                    raise SchemaError(f"unitCost key {key!r}: expected '<tag>/<nodeType>'")
                unit[(tag, node_type)] = Decimal(str(price))
            comp = {k: Decimal(str(v)) for k, v in obj.get("compCost", {}).items()}
            req = {k: Decimal(str(v)) for k, v in obj.get("reqCost", {}).items()}
        except AttributeError:
            raise SchemaError("price table: expected JSON objects for unitCost/compCost/reqCost") from None
        return cls(unit, comp, req)

    def to_json(self) -> dict:
        return {
            "unitCost": {f"{t}/{nt}": float(p) for (t, nt), p in sorted(self.unit_cost.items())},
            "compCost": {k: float(v) for k, v in sorted(self.comp_cost.items())},
            "reqCost": {k: float(v) for k, v in sorted(self.req_cost.items())},
        }


def load_prices(path=None) -> PriceTable:
    """Load a price table; ``None`` gives the bundled defaults."""
    if path is None:
        text = resources.files("edgeplace.data").joinpath("prices.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return PriceTable.from_json(json.loads(text))


def default_prices() -> PriceTable:
    return load_prices(None)


def service_cost(table: PriceTable, node_type: str, spec: ServiceSpec) -> Decimal:
    hw = spec.hw_reqs * table.unit(spec.arch, node_type)
    sw = sum((table.unit(s, node_type) for s in sorted(spec.sw_reqs)), Decimal(0))
    return to_cost(hw + sw)


def function_cost(table: PriceTable, node_type: str, inst: FunctionInstance, spec: FunctionSpec) -> Decimal:
    try:
        comp, req = table.comp_cost[node_type], table.req_cost[node_type]
    except KeyError:
        raise PricingError(f"no compCost/reqCost entry for node type '{node_type}'") from None
    usage = Decimal(spec.hw_reqs) * inst.monthly_requests * Decimal(str(inst.duration_ms)) / 1000
    return to_cost(usage * comp + inst.monthly_requests * req)


def component_cost(table: PriceTable, node, component, app) -> Decimal:
    """Cost of ``component`` (an instance or an instance id of ``app``) on ``node``."""
    inst = app.instance(component) if isinstance(component, str) else component
    if isinstance(inst, ServiceInstance):
        return service_cost(table, node.node_type, app.services[inst.spec])
    if isinstance(inst, FunctionInstance):
        return function_cost(table, node.node_type, inst, app.functions[inst.spec])
    raise TypeError(f"cannot price {inst!r}: only service and function instances have a cost")
