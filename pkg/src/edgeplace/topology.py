"""Random Cloud-Edge infrastructures.

Three graph families are supported: Barabasi-Albert (BA), Erdos-Renyi (ER),
and a two-tier Internet-as-a-graph construction (IAG) with a dense cloud core
and edge/thing stubs attached preferentially to it. Every undirected edge
becomes two directed links with independent latency and bandwidth draws, and
the result is closed under shortest-path latency.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .model import GEN_HW_RANGE, NODE_TYPES, Infrastructure, Link, Node, ValidationError

FAMILIES = ("BA", "ER", "IAG")

DEFAULT_THINGS = (
    "iphoneXS",
    "soilProbe",
    "weatherStation",
    "fieldDrone",
    "arHeadset",
    "entryCam",
    "exitCam",
    "barrierCtl",
)

SOFTWARE = ("ubuntu", "python", "js", "gcc", "mySQL", "mongoDB", "tensorflow", "opencv")
SECURITY = (
    "access_logs",
    "authentication",
    "firewall",
    "enc_storage",
    "obfuscated_storage",
    "backup",
    "wireless_security",
    "anti_tampering",
)
LOCATIONS = ("it", "fr", "es", "de", "nl", "us")
PROVIDERS = ("aws", "azure", "gcp", "ovh")
PROVIDER_WEIGHTS = (0.35, 0.35, 0.2, 0.1)


@dataclass(frozen=True)
class TypeProfile:
    """Sampling probabilities for the attributes of one node type."""

    p_x86: float
    software: dict
    security: dict


# Tuned so the bundled applications stay placeable on >= 64 nodes with 10% of
# the nodes down: cloud nodes are well stocked, things carry little.
DEFAULT_PROFILES = {
    "cloud": TypeProfile(
        0.7,
        {"ubuntu": 0.95, "python": 0.9, "js": 0.85, "gcc": 0.8, "mySQL": 0.8, "mongoDB": 0.6,
         "tensorflow": 0.5, "opencv": 0.5},
        {"access_logs": 0.85, "authentication": 0.9, "firewall": 0.8, "enc_storage": 0.8,
         "obfuscated_storage": 0.4, "backup": 0.75, "wireless_security": 0.2, "anti_tampering": 0.3},
    ),
    "edge": TypeProfile(
        0.6,
        {"ubuntu": 0.8, "python": 0.85, "js": 0.6, "gcc": 0.7, "mySQL": 0.55, "mongoDB": 0.45,
         "tensorflow": 0.35, "opencv": 0.5},
        {"access_logs": 0.6, "authentication": 0.8, "firewall": 0.5, "enc_storage": 0.6,
         "obfuscated_storage": 0.25, "backup": 0.5, "wireless_security": 0.5, "anti_tampering": 0.4},
    ),
    "thing": TypeProfile(
        0.2,
        {"ubuntu": 0.3, "python": 0.6, "js": 0.3, "gcc": 0.6, "mySQL": 0.05, "mongoDB": 0.05,
         "tensorflow": 0.1, "opencv": 0.3},
        {"access_logs": 0.2, "authentication": 0.5, "firewall": 0.2, "enc_storage": 0.3,
         "obfuscated_storage": 0.1, "backup": 0.1, "wireless_security": 0.6, "anti_tampering": 0.5},
    ),
}


@dataclass
class GenSpec:
    n_nodes: int = 64
    family: str = "ER"
    seed: int = 0
    node_type_weights: tuple = (0.2, 0.5, 0.3)  # cloud, edge, thing
    hw_mean: float = 256.0
    hw_std: float = 128.0
    bw_range: tuple = (20.0, 500.0)
    lat_range: tuple = (2.0, 20.0)
    family_params: dict = field(default_factory=dict)
    things: tuple = DEFAULT_THINGS
    profiles: dict = field(default_factory=lambda: dict(DEFAULT_PROFILES))

    def __post_init__(self):
        self.family = self.family.upper()
        if self.family not in FAMILIES:
            raise ValidationError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if self.n_nodes < 1:
            raise ValidationError("n_nodes must be positive")
        w = np.asarray(self.node_type_weights, dtype=float)
        if w.shape != (3,) or (w < 0).any() or not np.isclose(w.sum(), 1.0):
            raise ValidationError("node_type_weights must be three non-negative numbers summing to 1")
        lo, hi = self.bw_range
        if not (0 < lo <= hi):
            raise ValidationError("bad bw_range")
        lo, hi = self.lat_range
        if not (0 <= lo <= hi):
            raise ValidationError("bad lat_range")
        if self.hw_std < 0:
            raise ValidationError("hw_std must be >= 0")
        self._check_params()

    def param(self, key, default):
        return self.family_params.get(key, default)

    def _check_params(self):
        n = self.n_nodes
        if self.family == "BA":
            m = self.param("m", 2)
            if not (isinstance(m, int) and 1 <= m < max(n, 2)):
                raise ValidationError(f"BA needs 1 <= m < n_nodes, got m={m}")
        elif self.family == "ER":
            p = self.param("p", 0.1)
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"ER needs 0 <= p <= 1, got p={p}")
        else:
            core = self.param("core_fraction", 0.15)
            if not 0.0 < core <= 1.0:
                raise ValidationError(f"IAG needs 0 < core_fraction <= 1, got {core}")
            if not 0.0 <= self.param("core_p", 0.6) <= 1.0:
                raise ValidationError("IAG core_p must be a probability")
            if self.param("stub_links", 2) < 1:
                raise ValidationError("IAG stub_links must be >= 1")


def _streams(seed: int, family: str, k: int):
    root = np.random.SeedSequence([seed, FAMILIES.index(family)])
    return [np.random.default_rng(s) for s in root.spawn(k)]


def ba_edges(n: int, m: int, rng) -> list:
    """Preferential attachment from an initial star on m+1 nodes; m(n-m) edges."""
    if n <= m:
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges = [(0, j) for j in range(1, m + 1)]
    repeated = [0] * m + list(range(1, m + 1))
    for new in range(m + 1, n):
        targets = set()
        while len(targets) < m:
            targets.add(repeated[int(rng.integers(len(repeated)))])
        for t in sorted(targets):
            edges.append((t, new))
        repeated.extend(sorted(targets))
        repeated.extend([new] * m)
    return edges


def er_edges(n: int, p: float, rng) -> list:
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.shape[0]) < p
    return list(zip(iu[keep].tolist(), ju[keep].tolist()))


def iag_edges(n: int, core_fraction: float, core_p: float, stub_links: int, rng):
    """Dense core (ring plus random chords) with stubs attached by degree."""
    n_core = min(n, max(3, int(round(core_fraction * n))))
    edges = set()
    if n_core > 1:
        for i in range(n_core):
            j = (i + 1) % n_core
            if i != j:
                edges.add((min(i, j), max(i, j)))
        for i in range(n_core):
            for j in range(i + 1, n_core):
                if rng.random() < core_p:
                    edges.add((i, j))
    degree = np.zeros(n, dtype=float)
    for i, j in edges:
        degree[i] += 1
        degree[j] += 1
    for new in range(n_core, n):
        # weight core nodes up so stubs hang off the transit tier
        weights = degree[:new] + 1.0
        weights[:n_core] *= 4.0
        k = min(stub_links, new)
        targets = rng.choice(new, size=k, replace=False, p=weights / weights.sum())
        for t in sorted(int(t) for t in targets):
            edges.add((t, new))
            degree[t] += 1
            degree[new] += 1
    return sorted(edges), n_core


def _node_types(spec, n_core, rng):
    types = rng.choice(NODE_TYPES, size=spec.n_nodes, p=spec.node_type_weights).tolist()
    if n_core:
        types[:n_core] = ["cloud"] * n_core
        w = np.asarray(spec.node_type_weights[1:], dtype=float)
        if spec.n_nodes > n_core and w.sum() > 0:
            types[n_core:] = rng.choice(NODE_TYPES[1:], size=spec.n_nodes - n_core, p=w / w.sum()).tolist()
    return types


def sample_hw(rng, size: int, mean: float, std: float) -> np.ndarray:
    """Normal draws rounded to whole units and clamped to the generator's hardware range."""
    lo, hi = GEN_HW_RANGE
    return np.clip(np.rint(rng.normal(mean, std, size=size)), lo, hi).astype(np.int64)


def _pick(pool, probs, rng) -> frozenset:
    draws = rng.random(len(pool))
    return frozenset(tag for tag, u in zip(pool, draws) if u < probs.get(tag, 0.0))


def generate(spec: GenSpec) -> Infrastructure:
    graph_rng, type_rng, attr_rng, link_rng = _streams(spec.seed, spec.family, 4)
    n = spec.n_nodes
    n_core = 0
    if spec.family == "BA":
        edges = ba_edges(n, spec.param("m", 2), graph_rng)
    elif spec.family == "ER":
        edges = er_edges(n, spec.param("p", 0.1), graph_rng)
    else:
        edges, n_core = iag_edges(
            n, spec.param("core_fraction", 0.15), spec.param("core_p", 0.6), spec.param("stub_links", 2), graph_rng
        )
    types = _node_types(spec, n_core, type_rng)
    width = len(str(max(n - 1, 0)))
    ids = [f"n{i:0{width}d}" for i in range(n)]

    hw = sample_hw(attr_rng, n, spec.hw_mean, spec.hw_std)
    nodes = {}
    for i, nid in enumerate(ids):
        prof = spec.profiles[types[i]]
        arch = "x86" if attr_rng.random() < prof.p_x86 else "arm64"
        nodes[nid] = Node(
            id=nid,
            node_type=types[i],
            location=LOCATIONS[int(attr_rng.integers(len(LOCATIONS)))],
            provider=PROVIDERS[int(attr_rng.choice(len(PROVIDERS), p=PROVIDER_WEIGHTS))],
            sw_caps=_pick(SOFTWARE, prof.software, attr_rng),
            arch=arch,
            hw_caps=int(hw[i]),
            sec_caps=_pick(SECURITY, prof.security, attr_rng),
        )

    # things go to thing nodes first, then edge nodes, then anything left
    by_pref = sorted(range(n), key=lambda i: ({"thing": 0, "edge": 1, "cloud": 2}[types[i]], attr_rng.random()))
    for thing, i in zip(spec.things, by_pref):
        nd = nodes[ids[i]]
        nd.hosted_things = nd.hosted_things | {thing}

    lat_lo, lat_hi = spec.lat_range
    bw_lo, bw_hi = spec.bw_range
    links = {}
    for i, j in edges:
        lat = np.round(link_rng.uniform(lat_lo, lat_hi, size=2), 3)
        bw = np.round(link_rng.uniform(bw_lo, bw_hi, size=2), 3)
        links[(ids[i], ids[j])] = Link(ids[i], ids[j], float(lat[0]), float(bw[0]))
        links[(ids[j], ids[i])] = Link(ids[j], ids[i], float(lat[1]), float(bw[1]))
    infra = Infrastructure(nodes=nodes, links=links, generated=True)
    return latency_closure(infra)


def latency_closure(infra: Infrastructure) -> Infrastructure:
    """Replace link latencies with all-pairs shortest paths.

    Every reachable ordered pair gets a link. A synthesized multi-hop link
    carries the smallest bandwidth along its path; a direct link keeps its own
    bandwidth whenever it is already a shortest path.
    """
    ids = infra.node_ids
    dist, bw = _kernels.floyd_warshall(infra.lat_us, infra.bw_kbps)
    links = {}
    reach = dist >= 0
    np.fill_diagonal(reach, False)
    src_idx, dst_idx = np.nonzero(reach)
    for a, b in zip(src_idx.tolist(), dst_idx.tolist()):
        key = (ids[a], ids[b])
        old = infra.links.get(key)
        if old is not None and int(infra.lat_us[a, b]) == int(dist[a, b]):
            links[key] = old
        else:
            links[key] = Link(ids[a], ids[b], int(dist[a, b]) / 1000.0, int(bw[a, b]) / 1000.0)
    nodes = {
        nid: Node(
            id=nd.id, node_type=nd.node_type, location=nd.location, provider=nd.provider,
            sw_caps=nd.sw_caps, arch=nd.arch, hw_caps=nd.hw_caps, sec_caps=nd.sec_caps,
            hosted_things=nd.hosted_things, available=nd.available,
        )
        for nid, nd in infra.nodes.items()
    }
    return Infrastructure(
        nodes=nodes,
        links=links,
        hw_threshold=infra.hw_threshold,
        bw_threshold=infra.bw_threshold,
        max_bin=infra.max_bin,
        generated=infra.generated,
    )
