"""Small random application/infrastructure pairs for exhaustive cross-checks.

Instances are deliberately tight: hardware, bandwidth and latency budgets sit
close to the demands so that every constraint family binds on some seeds.
"""

from __future__ import annotations

import numpy as np

from .model import (
    And,
    ApplicationSpec,
    DataFlow,
    FunctionInstance,
    FunctionSpec,
    HasSecCaps,
    Infrastructure,
    Link,
    Node,
    NodeTypeIn,
    Not,
    ServiceInstance,
    ServiceSpec,
    ThingInstance,
)

SW = ("ubuntu", "python", "js", "gcc")
SEC = ("authentication", "enc_storage", "firewall")
ARCHES = ("x86", "arm64")


def _subset(rng, pool, p):
    return frozenset(x for x in pool if rng.random() < p)


def random_instance(seed: int, max_components: int = 5, max_nodes: int = 6, max_flows: int = 4):
    """Return ``(app, infra)`` with 1..max_components components and 2..max_nodes nodes."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7919]))
    n_nodes = int(rng.integers(2, max_nodes + 1))
    n_comp = int(rng.integers(1, max_components + 1))

    nodes = {}
    for i in range(n_nodes):
        nid = f"v{i}"
        nodes[nid] = Node(
            id=nid,
            node_type=str(rng.choice(("cloud", "edge", "thing"))),
            location="l0",
            provider="p0",
            sw_caps=_subset(rng, SW, 0.85),
            arch=str(rng.choice(ARCHES, p=(0.75, 0.25))),
            hw_caps=int(rng.integers(40, 201)),
            sec_caps=_subset(rng, SEC, 0.6),
            available=bool(rng.random() > 0.05),
        )
    links = {}
    for a in nodes:
        for b in nodes:
            if a != b and rng.random() < 0.85:
                lat = float(rng.integers(1, 31))
                bw = float(rng.integers(4, 41))
                links[(a, b)] = Link(a, b, lat, bw)

    services, functions, s_inst, f_inst = {}, {}, [], []
    for c in range(n_comp):
        arch = str(rng.choice(ARCHES, p=(0.85, 0.15)))
        hw = int(rng.integers(10, 61))
        if rng.random() < 0.5:
            spec = ServiceSpec(f"s{c}", _subset(rng, SW, 0.25), arch, hw)
            services[spec.id] = spec
            s_inst.append(ServiceInstance(f"c{c}", spec.id))
        else:
            spec = FunctionSpec(f"f{c}", str(rng.choice(SW)), arch, hw)
            functions[spec.id] = spec
            f_inst.append(FunctionInstance(f"c{c}", spec.id, int(rng.integers(0, 50_000)), float(rng.integers(1, 300))))

    policies = {}
    if rng.random() < 0.3:
        target = str(rng.choice(sorted([*services, *functions])))
        policies[target] = And((HasSecCaps(frozenset({str(rng.choice(SEC))})), Not(NodeTypeIn(frozenset({"thing"})))))

    things = []
    if rng.random() < 0.4:
        host = str(rng.choice(sorted(nodes)))
        nodes[host].hosted_things = frozenset({"dev0"})
        things.append(ThingInstance("dev0", "sensor", "sensor"))

    endpoints = [f"c{c}" for c in range(n_comp)] + [t.id for t in things]
    flows = []
    if len(endpoints) >= 2:
        for _ in range(int(rng.integers(0, max_flows + 1))):
            src, dst = rng.choice(endpoints, size=2, replace=False)
            flows.append(
                DataFlow(
                    str(src),
                    str(dst),
                    "data",
                    _subset(rng, SEC, 0.25),
                    float(rng.choice((0.05, 0.1, 0.25, 0.5))),
                    float(rng.integers(1, 6)),
                    float(rng.integers(8, 41)),
                )
            )

    app = ApplicationSpec(
        name=f"rand{seed}",
        services=services,
        functions=functions,
        things={"sensor": "sensor"} if things else {},
        function_instances=f_inst,
        service_instances=s_inst,
        thing_instances=things,
        flows=flows,
        requirement_policies=policies,
    )
    infra = Infrastructure(
        nodes=nodes,
        links=links,
        hw_threshold=int(rng.choice((0, 0, 5))),
        bw_threshold=float(rng.choice((0.0, 0.0, 1.5))),
        max_bin=None if rng.random() < 0.6 else int(rng.integers(1, 4)),
    )
    return app, infra
