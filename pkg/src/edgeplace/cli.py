"""Command-line entry point: generate / place / simulate / oracle / export-lp.

Exit codes
    0  placement found (optimal, feasible, or timeout with an incumbent)
    1  bad input: unreadable file, schema or validation error
    2  infeasible
    3  solver budget exhausted without any placement
    4  instance too large for the brute-force oracle
    5  oracle and solver disagree (oracle --compare)
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .cost import load_prices
from .creason import preprocess
from .milp import (
    INFEASIBLE,
    TIMEOUT,
    InfeasibleModel,
    SearchSpaceTooLarge,
    SolveResult,
    brute_force_oracle,
    build_model,
    export_lp,
    solve,
)
from .model import (
    ModelError,
    Placement,
    infrastructure_to_json,
    load_application,
    load_infrastructure,
    save_infrastructure,
)
from .pipeline import STRATEGIES, plan
from .prefilter import explain

log = logging.getLogger("edgeplace")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_TIMEOUT, EXIT_GUARD, EXIT_MISMATCH = 0, 1, 2, 3, 4, 5

# fallbacks for options that may also come from --config
DEFAULTS = {
    "prices": None,
    "budget_ms": 60_000.0,
    "seed": 1,
    "log_level": "WARNING",
}


def version_string() -> str:
    try:
        import numba

        nb = f"numba {numba.__version__}" + ("" if _kernels.USE_NUMBA else " (disabled)")
    except ImportError:  # pragma: no cover
        nb = "numba absent"
    return f"edgeplace {__version__} (python {platform.python_version()}, numpy {np.__version__}, {nb})"


def _status_exit(status: str, placement) -> int:
    if placement is not None:
        return EXIT_OK
    return EXIT_TIMEOUT if status == TIMEOUT else EXIT_INFEASIBLE


def _write_or_print(obj, out):
    text = json.dumps(obj, indent=1) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_previous(path):
    if path is None:
        return None
    return Placement.from_json(json.loads(Path(path).read_text()))


# -- subcommands ---------------------------------------------------------------


def cmd_generate(args) -> int:
    from .topology import GenSpec, generate

    params = {}
    if args.m is not None:
        params["m"] = args.m
    if args.p is not None:
        params["p"] = args.p
    if args.core_fraction is not None:
        params["core_fraction"] = args.core_fraction
    spec = GenSpec(
        n_nodes=args.n,
        family=args.family,
        seed=args.seed,
        hw_mean=args.hw_mean,
        hw_std=args.hw_std,
        family_params=params,
    )
    infra = generate(spec)
    if args.out:
        save_infrastructure(infra, args.out)
    else:
        _write_or_print(infrastructure_to_json(infra), None)
    log.info("generated %d nodes, %d links", len(infra.nodes), len(infra.links))
    return EXIT_OK


def cmd_place(args) -> int:
    app = load_application(args.app)
    infra = load_infrastructure(args.infra)
    table = load_prices(args.prices)

    if args.explain:
        comp = args.explain
        if comp not in app.components:
            log.error("unknown component %r", comp)
            return EXIT_INPUT
        for nid in infra.node_ids:
            reason = explain(comp, infra.nodes[nid], None, infra, app)
            print(f"{comp} on {nid}: {reason or 'ok'}")
        return EXIT_OK

    previous = _load_previous(args.previous)
    res = plan(app, infra, table, args.mode, previous, args.budget_ms, args.seed)
    if args.export_lp:
        model = res.model
        if model is None:
            try:
                model = build_model(res.outcome, app, infra)
            except InfeasibleModel as exc:
                log.warning("no LP written: %s", exc)
        if model is not None:
            export_lp(model, args.export_lp)
    summary = (
        f"status={res.status} mode={res.mode} "
        f"cost={'-' if res.placement is None else res.placement.total_cost} "
        f"retained={len(res.retained)} time_ms={res.exec_time_ms:.1f}"
    )
    out_obj = (res.placement or Placement()).to_json(res.mode, res.status)
    if res.placement is None:
        out_obj["totalCost"] = None
    _write_or_print(out_obj, args.out)
    print(summary, file=sys.stdout if args.out else sys.stderr)
    return _status_exit(res.status, res.placement)


def cmd_export_lp(args) -> int:
    app = load_application(args.app)
    infra = load_infrastructure(args.infra)
    table = load_prices(args.prices)
    outcome = preprocess(app, infra, table, _load_previous(args.previous))
    try:
        model = build_model(outcome, app, infra)
    except InfeasibleModel as exc:
        log.error("%s", exc)
        return EXIT_INFEASIBLE
    export_lp(model, args.out)
    log.info("wrote %s (%d x, %d y, %d b)", args.out, len(model.x_vars), len(model.y_vars), len(model.b_vars))
    return EXIT_OK


def _oracle_pair(app, infra, table, budget_ms, seed):
    outcome = preprocess(app, infra, table)
    oracle = brute_force_oracle(outcome, app, infra, table)
    try:
        solved = solve(build_model(outcome, app, infra), budget_ms, seed)
    except InfeasibleModel:
        solved = SolveResult(INFEASIBLE)
    return oracle, solved


def _fmt_result(r: SolveResult) -> str:
    return f"{r.status} {'-' if r.objective_value is None else r.objective_value}"


def cmd_oracle(args) -> int:
    table = load_prices(args.prices)
    if args.random:
        from .instances import random_instance

        cases = ((f"random seed {s}",) + random_instance(s) for s in range(args.seed, args.seed + args.random))
    else:
        if not (args.app and args.infra):
            log.error("oracle needs --app and --infra, or --random N")
            return EXIT_INPUT
        cases = [(args.app, load_application(args.app), load_infrastructure(args.infra))]
    mismatches = 0
    try:
        for label, app, infra in cases:
            if args.compare:
                oracle, solved = _oracle_pair(app, infra, table, args.budget_ms, args.seed)
                same = (oracle.status, oracle.objective_value) == (solved.status, solved.objective_value)
                mismatches += not same
                print(f"{label}: oracle {_fmt_result(oracle)} | solver {_fmt_result(solved)} | "
                      f"{'MATCH' if same else 'MISMATCH'}")
            else:
                oracle = brute_force_oracle(preprocess(app, infra, table), app, infra, table)
                print(f"{label}: oracle {_fmt_result(oracle)}")
    except SearchSpaceTooLarge as exc:
        log.error("%s", exc)
        return EXIT_GUARD
    return EXIT_MISMATCH if mismatches else EXIT_OK


def _seed_path(path: Path, seed: int, many: bool) -> Path:
    return path.with_name(f"{path.stem}.seed{seed}{path.suffix}") if many else path


def cmd_simulate(args) -> int:
    from . import sim

    app = load_application(args.app)
    infra = load_infrastructure(args.infra)
    table = load_prices(args.prices)

    if args.resume:
        cfg, next_tick, previous = sim.load_state(args.resume)
        last = cfg.ticks
        remaining = last - next_tick + 1
        if remaining <= 0:
            log.info("run already complete")
            return EXIT_OK
        todo = sim.RunConfig(remaining, cfg.failure_fraction, cfg.strategy, cfg.solver_budget_ms, cfg.seed, 1)
        out = Path(args.out)
        if not out.exists():
            sim.write_metrics([], out)

        def checkpoint(rec, prev):
            sim.append_metrics(rec, out)
            sim.save_state(args.resume, cfg, rec.tick + 1, prev)

        sim.run(app, infra, todo, table, previous=previous, start_tick=next_tick, on_tick=checkpoint)
        return EXIT_OK

    cfg = sim.RunConfig(args.ticks, args.failure, args.strategy, args.budget_ms, args.seed, args.reps)
    many = cfg.repetitions > 1
    out = Path(args.out) if args.out else None
    for s in sim.repetition_seeds(cfg):
        one = sim.RunConfig(cfg.ticks, cfg.failure_fraction, cfg.strategy, cfg.solver_budget_ms, s, 1)
        target = _seed_path(out, s, many) if out else None
        state = _seed_path(Path(args.state), s, many) if args.state else None
        if target:
            sim.write_metrics([], target)

        def checkpoint(rec, prev, target=target, state=state, one=one):
            if target:
                sim.append_metrics(rec, target)
            if state:
                sim.save_state(state, one, rec.tick + 1, prev)

        records = sim.run(app, infra, one, table, on_tick=checkpoint)
        if target is None:
            w = csv.writer(sys.stdout, lineterminator="\n")
            if s == cfg.seed:
                w.writerow(sim.CSV_HEADER)
            for rec in records:
                w.writerow(sim._row(rec))
        ok = sum(r.ok for r in records)
        log.info("seed %d: %d/%d ticks placed, %d migrations", s, ok, len(records), sum(r.migrations for r in records))
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="edgeplace", description="Cost-aware Cloud-Edge placement")
    p.add_argument("--version", action="version", version=version_string())
    p.add_argument("--config", help="JSON file with defaults (prices, budget_ms, seed, log_level)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--prices", default=None, help="price table JSON (default: bundled)")
        sp.add_argument("--budget-ms", dest="budget_ms", type=float, default=None)
        if seed:
            sp.add_argument("--seed", type=int, default=None)

    g = sub.add_parser("generate", help="random infrastructure")
    g.add_argument("--n", type=int, default=64)
    g.add_argument("--family", choices=["ba", "er", "iag", "BA", "ER", "IAG"], default="er")
    g.add_argument("--m", type=int, default=None, help="BA attachment count")
    g.add_argument("--p", type=float, default=None, help="ER edge probability")
    g.add_argument("--core-fraction", dest="core_fraction", type=float, default=None, help="IAG core size")
    g.add_argument("--hw-mean", dest="hw_mean", type=float, default=256.0)
    g.add_argument("--hw-std", dest="hw_std", type=float, default=128.0)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    pl = sub.add_parser("place", help="compute one placement")
    pl.add_argument("--app", required=True)
    pl.add_argument("--infra", required=True)
    pl.add_argument("--previous", help="placement JSON to reason from (enables continuous reasoning)")
    pl.add_argument("--mode", choices=STRATEGIES, default="milp")
    pl.add_argument("--export-lp", dest="export_lp")
    pl.add_argument("--explain", metavar="COMPONENT", help="report the first violated constraint per node and exit")
    pl.add_argument("--out", help="placement JSON (default: stdout)")
    common(pl)
    pl.set_defaults(func=cmd_place)

    s = sub.add_parser("simulate", help="tick simulation with node failures")
    s.add_argument("--app", required=True)
    s.add_argument("--infra", required=True)
    s.add_argument("--strategy", choices=STRATEGIES, default="cr")
    s.add_argument("--ticks", type=int, default=30)
    s.add_argument("--failure", type=float, default=0.10)
    s.add_argument("--reps", type=int, default=1)
    s.add_argument("--out", help="metrics CSV; with --reps > 1 one file per seed (<stem>.seed<s><suffix>)")
    s.add_argument("--state", help="write a run-state checkpoint after every tick")
    s.add_argument("--resume", help="continue the run recorded in this state file")
    common(s)
    s.set_defaults(func=cmd_simulate)

    o = sub.add_parser("oracle", help="brute-force optimum, optionally compared with the solver")
    o.add_argument("--app")
    o.add_argument("--infra")
    o.add_argument("--random", type=int, default=0, metavar="N", help="check N random small instances")
    o.add_argument("--compare", action="store_true")
    common(o)
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("export-lp", help="write the placement MILP in LP format")
    e.add_argument("--app", required=True)
    e.add_argument("--infra", required=True)
    e.add_argument("--previous")
    e.add_argument("--out", required=True)
    common(e, seed=False)
    e.set_defaults(func=cmd_export_lp)
    return p


def _merge_config(args) -> None:
    conf = {}
    if args.config:
        conf = json.loads(Path(args.config).read_text())
        if not isinstance(conf, dict):
            raise ModelError(f"config {args.config}: expected a JSON object")
    for key, fallback in DEFAULTS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, conf.get(key, fallback))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
    except (OSError, ValueError) as exc:
        print(f"edgeplace: {exc}", file=sys.stderr)
        return EXIT_INPUT
    level = args.log_level if args.verbose == 0 else ("INFO" if args.verbose == 1 else "DEBUG")
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError) as exc:  # ModelError is a ValueError
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
