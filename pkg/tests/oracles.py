"""Reference checkers shared by the unit tests and the acceptance suite.

Each one is written straight from the constraint or graph definition and
shares nothing with the package beyond its domain types and cost function.
"""

import heapq

import numpy as np

from edgeplace.cost import component_cost
from edgeplace.model import (
    And,
    Infrastructure,
    Link,
    Node,
    AvgInBandwidthAtLeast,
    FunctionInstance,
    HasSecCaps,
    LocationIn,
    NodeTypeIn,
    Not,
    Or,
    ProviderIn,
)
from edgeplace.prefilter import explain, find_compatible


def avg_in(infra, nid):
    bws = [lk.bandwidth_mbps for (s, d), lk in infra.links.items() if d == nid]
    return sum(bws) / len(bws) if bws else None


def holds(expr, node, infra):
    if expr is None:
        return True
    if isinstance(expr, And):
        return all(holds(a, node, infra) for a in expr.args)
    if isinstance(expr, Or):
        return any(holds(a, node, infra) for a in expr.args)
    if isinstance(expr, Not):
        return not holds(expr.arg, node, infra)
    if isinstance(expr, ProviderIn):
        return node.provider in expr.values
    if isinstance(expr, LocationIn):
        return node.location in expr.values
    if isinstance(expr, NodeTypeIn):
        return node.node_type in expr.values
    if isinstance(expr, HasSecCaps):
        return all(s in node.sec_caps for s in expr.values)
    if isinstance(expr, AvgInBandwidthAtLeast):
        avg = avg_in(infra, node.id)
        return avg is not None and avg >= expr.mbps
    raise AssertionError(expr)


def violated_constraints(app, infra, comp, node):
    """Set of constraint names ``comp`` breaks on an otherwise empty ``node``."""
    spec = app.spec_of(comp)
    bad = set()
    if not node.available:
        bad.add("availability")
    if spec.arch != node.arch:
        bad.add("architecture")
    if not holds(app.policy_for(comp), node, infra):
        bad.add("requirements")
    if isinstance(app.instance(comp), FunctionInstance):
        if spec.sw_platform not in node.sw_caps:
            bad.add("software")
    elif not all(s in node.sw_caps for s in spec.sw_reqs):
        bad.add("software")
    if node.hw_caps < spec.hw_reqs + infra.hw_threshold:
        bad.add("hardware")
    return bad


def check_against_oracle(app, infra, table):
    sets = find_compatible(app, infra, table)
    assert [cs.component for cs in sets] == sorted(app.components)
    for cs in sets:
        want = []
        for nid in infra.node_ids:
            node = infra.nodes[nid]
            bad = violated_constraints(app, infra, cs.component, node)
            if bad:
                reason = explain(cs.component, node, None, infra, app)
                assert reason in bad, (cs.component, nid, reason, bad)
            else:
                want.append((nid, component_cost(table, node, cs.component, app)))
        want.sort(key=lambda nc: (nc[1], nc[0]))
        assert cs.candidates == want



def dijkstra(infra, src):
    """Shortest latency (integer microseconds) from src to every reachable node."""
    adj = {}
    for (a, b), lk in infra.links.items():
        adj.setdefault(a, []).append((b, round(lk.latency_ms * 1000)))
    dist = {src: 0}
    heap = [(0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj.get(u, ()):
            if d + w < dist.get(v, float("inf")):
                dist[v] = d + w
                heapq.heappush(heap, (d + w, v))
    return dist


def bottleneck_range(infra, src, dist):
    """(min, max) over all shortest paths from src of the path's smallest link bandwidth."""
    order = sorted(dist, key=dist.get)
    lo, hi = {src: float("inf")}, {src: float("inf")}
    for u in order:
        for (a, b), lk in infra.links.items():
            if a != u or b not in dist or b == src:
                continue
            if dist[u] + round(lk.latency_ms * 1000) == dist[b]:
                bw = round(lk.bandwidth_mbps * 1000)
                lo[b] = min(lo.get(b, float("inf")), min(lo[u], bw))
                hi[b] = max(hi.get(b, 0), min(hi[u], bw))
    return lo, hi


def assert_triangle(infra):
    lat = infra.lat_us
    n = lat.shape[0]
    reach = lat >= 0
    for k in range(n):
        both = reach[:, k, None] & reach[None, k, :]
        via = lat[:, k, None] + lat[None, k, :]
        assert (reach | ~both).all()
        assert ((lat <= via) | ~both).all()


def random_digraph(seed, n=20, p=0.15):
    rng = np.random.default_rng(seed)
    nodes = {f"v{i:02d}": Node(f"v{i:02d}", "edge") for i in range(n)}
    links = {}
    for a in nodes:
        for b in nodes:
            if a != b and rng.random() < p:
                links[(a, b)] = Link(a, b, float(rng.integers(1, 50)), float(rng.integers(1, 100)))
    return Infrastructure(nodes=nodes, links=links)
