"""Tick-based replanning simulator with transient node failures.

At every tick the previous tick's failures are restored, a fresh
``floor(failure_fraction * |nodes|)`` nodes are taken down, and the chosen
strategy replans. Failure draws depend only on ``(seed, tick)``, so runs
with different strategies see exactly the same failures.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .model import Placement, SchemaError
from .pipeline import STRATEGIES, plan

log = logging.getLogger(__name__)

CSV_HEADER = ("tick", "status", "mode", "cost", "exec_time_ms", "migrations", "retained")


@dataclass
class RunConfig:
    ticks: int = 30
    failure_fraction: float = 0.10
    strategy: str = "cr"
    solver_budget_ms: float = 60_000
    seed: int = 1
    repetitions: int = 3

    def __post_init__(self):
        if self.ticks < 1:
            raise ValueError("ticks must be >= 1")
        if not 0.0 <= self.failure_fraction <= 1.0:
            raise ValueError("failure_fraction must lie in [0, 1]")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass
class TickRecord:
    tick: int
    status: str
    mode: str
    placement_cost: object  # Decimal, or None when nothing was placed
    exec_time_ms: float
    migrations: int
    retained_count: int
    failed: tuple = ()
    placement: Placement | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.placement is not None


def count_migrations(previous: Placement, current: Placement) -> int:
    prev, cur = previous.nodes(), current.nodes()
    if set(prev) != set(cur):
        raise ValueError("placements cover different component sets")
    return sum(1 for c in prev if prev[c] != cur[c])


def failed_nodes(infra, fraction: float, seed: int, tick: int) -> tuple:
    ids = infra.node_ids
    k = math.floor(fraction * len(ids))
    if k == 0:
        return ()
    rng = np.random.default_rng(np.random.SeedSequence([seed, tick]))
    pick = rng.choice(len(ids), size=k, replace=False)
    return tuple(sorted(ids[i] for i in pick))


def run(app, infra, config: RunConfig, table, previous: Placement | None = None, start_tick: int = 1,
        on_tick=None) -> list:
    """Simulate ``config.ticks`` ticks starting at ``start_tick``; returns the TickRecords.

    ``previous`` and ``start_tick`` let a checkpointed run resume. ``on_tick``
    is called with each record after it is produced.
    """
    records = []
    # dense matrices and lookup tables are built once per infrastructure, not per tick
    infra.lat_us, infra.bw_kbps, infra.avg_in_bw, infra.thing_hosts
    _kernels.warmup()
    try:
        for tick in range(start_tick, start_tick + config.ticks):
            down = failed_nodes(infra, config.failure_fraction, config.seed, tick)
            infra.set_failed(down)
            res = plan(app, infra, table, config.strategy, previous, config.solver_budget_ms, config.seed)
            if res.placement is not None:
                moved = count_migrations(previous, res.placement) if previous is not None else 0
                rec = TickRecord(tick, res.status, res.mode, res.placement.total_cost, res.exec_time_ms, moved,
                                 len(res.retained), down, res.placement)
                previous = res.placement
            else:
                rec = TickRecord(tick, res.status, res.mode, None, res.exec_time_ms, 0, len(res.retained), down, None)
            log.debug("tick %d: %s cost=%s moved=%d", tick, rec.status, rec.placement_cost, rec.migrations)
            records.append(rec)
            if on_tick is not None:
                on_tick(rec, previous)
    finally:
        infra.set_failed(())
    return records


def repetition_seeds(config: RunConfig) -> list:
    return [config.seed + r for r in range(config.repetitions)]


def run_repetitions(app, infra, config: RunConfig, table) -> dict:
    """Independent runs for seeds ``seed, seed+1, ...``; returns ``{seed: records}``."""
    out = {}
    for s in repetition_seeds(config):
        cfg = RunConfig(config.ticks, config.failure_fraction, config.strategy, config.solver_budget_ms, s, 1)
        out[s] = run(app, infra, cfg, table)
    return out


def _row(rec: TickRecord) -> list:
    cost = "" if rec.placement_cost is None else f"{rec.placement_cost:.6f}"
    return [rec.tick, rec.status, rec.mode, cost, f"{rec.exec_time_ms:.3f}", rec.migrations, rec.retained_count]


def write_metrics(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for rec in records:
            w.writerow(_row(rec))


def append_metrics(rec: TickRecord, path) -> None:
    with open(path, "a", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerow(_row(rec))


def read_metrics(path) -> list:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# -- run-state checkpoints ---------------------------------------------------


def save_state(path, config: RunConfig, next_tick: int, previous: Placement | None) -> None:
    state = {
        "config": asdict(config),
        "nextTick": next_tick,
        "previous": None if previous is None else previous.to_json(),
    }
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(json.dumps(state, indent=1) + "\n")
    tmp.replace(path)


def load_state(path):
    """Returns ``(config, next_tick, previous placement or None)``."""
    try:
        obj = json.loads(Path(path).read_text())
        cfg = RunConfig(**obj["config"])
        prev = obj.get("previous")
        return cfg, int(obj["nextTick"]), (None if prev is None else Placement.from_json(prev))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"run state {path}: {exc}") from None
