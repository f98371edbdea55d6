"""Continuous reasoning: keep what still works from the previous placement.

Each previously placed component is re-checked on its old node. Survivors are
pinned as singleton candidate sets; the others get a freshly computed
candidate set. If any component ends up with no candidate at all, the step
aborts and the caller falls back to full preprocessing.

Components are visited in id order and two partial views are involved. The
hardware check counts the *not yet visited* tail of the previous placement,
while the QoS check looks at the prefix *retained* so far.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .prefilter import CandidateSet, compatible_placements, component_placement, find_compatible, qos_ok

FRESH, CONTINUOUS, FALLBACK = "fresh", "continuous", "fallback"


@dataclass
class PreprocessOutcome:
    candidate_sets: list
    retained: set = field(default_factory=set)
    mode: str = FRESH

    def by_component(self) -> dict:
        return {cs.component: cs for cs in self.candidate_sets}

    @property
    def search_size(self) -> int:
        return sum(len(cs) for cs in self.candidate_sets)


def cr_step(previous, app, infra, table):
    """Return ``(candidate_sets, retained)``, or None when some component has no candidate."""
    prev_nodes = previous.nodes() if hasattr(previous, "nodes") else dict(previous)
    known = set(app.components)
    order = [c for c in sorted(prev_nodes) if c in known]
    retained = {}
    sets = {}
    for pos, comp in enumerate(order):
        node_id = prev_nodes[comp]
        node = infra.nodes.get(node_id)
        tail = {c: prev_nodes[c] for c in order[pos + 1 :]}
        cost = None
        if node is not None:
            cost = component_placement(comp, node, tail, infra, app, table)
        if cost is not None and qos_ok(comp, node_id, retained, app, infra):
            sets[comp] = CandidateSet(comp, [(node_id, cost)])
            retained[comp] = node_id
        else:
            sets[comp] = compatible_placements(comp, infra, app, table)
    # components the previous placement did not cover
    for comp in app.components:
        if comp not in sets:
            sets[comp] = compatible_placements(comp, infra, app, table)
    out = [sets[c] for c in app.components]
    if any(len(cs) == 0 for cs in out):
        return None
    return out, set(retained)


def preprocess(app, infra, table, previous=None) -> PreprocessOutcome:
    if previous is None:
        return PreprocessOutcome(find_compatible(app, infra, table), set(), FRESH)
    step = cr_step(previous, app, infra, table)
    if step is None:
        return PreprocessOutcome(find_compatible(app, infra, table), set(), FALLBACK)
    sets, retained = step
    return PreprocessOutcome(sets, retained, CONTINUOUS)
