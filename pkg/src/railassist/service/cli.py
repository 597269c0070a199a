"""Unified command line: generate | train | eval | analyze | bench | serve | chat."""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import sys
from pathlib import Path

from .. import bench as bench_mod
from .. import analytics
from ..domain import read_delays_csv, read_schedules_csv, write_delays_csv, write_schedules_csv
from ..mlcore import ForestConfig
from ..predictor import (
    CorruptBundleError,
    PredictorError,
    evaluate_ci_accuracy,
    load_registry,
    save_registry,
    train_registry,
)
from ..synthdata import (
    demo_history,
    generate_delay_history,
    generate_network,
    scenario_config,
    scenario_names,
    split_dataset,
    write_ground_truth_csv,
)
from .config import CONFIG_KEYS, AppConfig, load_config

SPLIT_RATIOS = (0.6, 0.2, 0.2)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="railassist", description="Train-status assistant toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write synthetic schedules/delays/ground-truth CSVs")
    p.add_argument("--scenario", default="smooth", help=f"one of {scenario_names()} or 'demo'")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-known", type=int, default=None)
    p.add_argument("--n-unknown", type=int, default=None)

    p = sub.add_parser("train", help="fit a model registry from CSV data")
    p.add_argument("--data", required=True, help="directory holding schedules.csv and delays.csv")
    p.add_argument("--out", required=True, help="bundle file to write")
    p.add_argument("--n-trees", type=int, default=AppConfig().model_n_trees)
    p.add_argument("--max-depth", type=int, default=8)
    p.add_argument("--min-samples-leaf", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ridge-lambda", type=float, default=1.0)
    p.add_argument("--split-seed", type=int, default=0)

    p = sub.add_parser("eval", help="print held-out interval coverage")
    p.add_argument("--data", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--ci", type=int, default=99, choices=(68, 95, 99))
    p.add_argument("--model-kind", default="forest", choices=("forest", "ridge"))
    p.add_argument("--split-seed", type=int, default=0)

    p = sub.add_parser("analyze", help="emit a per-stop delay profile as CSV on stdout")
    p.add_argument("--data", required=True)
    p.add_argument("--train", required=True, dest="train_number")
    p.add_argument("--from", dest="date_from", default=None)
    p.add_argument("--to", dest="date_to", default=None)

    p = sub.add_parser("bench", help="latency/accuracy studies")
    p.add_argument("--mode", required=True, choices=("tradeoff", "rr-scaling"))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tree-counts", default="5,10,25,50,100,200")
    p.add_argument("--station-counts", default="10,50,112")
    p.add_argument("--repetitions", type=int, default=bench_mod.DEFAULT_REPETITIONS)
    p.add_argument("--n-stations", type=int, default=112)
    p.add_argument("--n-days", type=int, default=120)

    p = sub.add_parser("serve", help="run the REST service")
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help=f"override a config key; keys: {', '.join(CONFIG_KEYS)}")
    p.add_argument("--host", default="127.0.0.1")
    for key in CONFIG_KEYS:
        # Every config key is overridable by a same-named flag.
        p.add_argument(f"--{key}", dest=f"cfg_{CONFIG_KEYS[key][0]}", default=None, metavar="VALUE")

    p = sub.add_parser("chat", help="terminal chat REPL against a trained bundle")
    p.add_argument("--data", required=True)
    p.add_argument("--bundle", required=True)
    p.add_argument("--today", default=None, help="pin the clock to YYYY-MM-DD (for reproducible transcripts)")
    p.add_argument("--ci", type=int, default=99, choices=(68, 95, 99))
    p.add_argument("--model-kind", default="forest", choices=("forest", "ridge"))
    return parser


def _load_data(data_dir: str):
    base = Path(data_dir)
    catalog = read_schedules_csv(base / "schedules.csv")
    observations = read_delays_csv(base / "delays.csv")
    return catalog, observations


def cmd_generate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.scenario == "demo":
        catalog, observations, truth, _config = demo_history()
    else:
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.n_known is not None:
            overrides["n_known_trains"] = args.n_known
        if args.n_unknown is not None:
            overrides["n_unknown_trains"] = args.n_unknown
        config = scenario_config(args.scenario, **overrides)
        catalog = generate_network(config)
        observations, truth = generate_delay_history(catalog, config)
    write_schedules_csv(catalog, out / "schedules.csv")
    write_delays_csv(observations, out / "delays.csv")
    write_ground_truth_csv(truth, catalog, out / "ground_truth.csv")
    print(f"wrote {len(catalog.trains)} trains, {len(observations)} observations to {out}")
    return 0


def cmd_train(args) -> int:
    catalog, observations = _load_data(args.data)
    split = split_dataset(observations, SPLIT_RATIOS, seed=args.split_seed)
    config = ForestConfig(
        n_trees=args.n_trees,
        max_depth=args.max_depth,
        min_samples_leaf=args.min_samples_leaf,
        seed=args.seed,
    )
    registry = train_registry(catalog, observations, split, config, ridge_lambda=args.ridge_lambda)
    save_registry(registry, args.out)
    print(
        f"trained {len(registry.direct)} direct and {len(registry.shared)} shared bundles "
        f"({len(registry.known_trains)} known trains) -> {args.out}"
    )
    if registry.metadata.demoted_trains:
        print(f"warning: demoted to unknown (too few training journeys): {', '.join(registry.metadata.demoted_trains)}")
    return 0


def cmd_eval(args) -> int:
    catalog, observations = _load_data(args.data)
    registry = load_registry(args.bundle)
    split = split_dataset(observations, SPLIT_RATIOS, seed=args.split_seed)
    coverage = evaluate_ci_accuracy(registry, catalog, observations, sorted(split.test), args.ci, args.model_kind)
    print(f"{coverage:.6f}")
    return 0


def cmd_analyze(args) -> int:
    catalog, observations = _load_data(args.data)
    date_range = None
    if args.date_from or args.date_to:
        date_range = (
            dt.date.fromisoformat(args.date_from) if args.date_from else None,
            dt.date.fromisoformat(args.date_to) if args.date_to else None,
        )
    profile = analytics.build_profile(observations, catalog, args.train_number, date_range)
    writer = csv.writer(sys.stdout)
    writer.writerow(["train_number", "station_code", "mean_late_min", "n_observations"])
    for station, mean, count in zip(profile.stations, profile.mean_delays, profile.counts):
        writer.writerow([args.train_number, station, f"{mean:.4f}", count])
    return 0


def cmd_bench(args) -> int:
    if args.mode == "tradeoff":
        counts = [int(c) for c in args.tree_counts.split(",")]
        rows = bench_mod.run_tradeoff(
            counts, repetitions=args.repetitions, seed=args.seed, n_stations=args.n_stations, n_days=args.n_days
        )
        bench_mod.write_tradeoff_csv(rows, args.out)
    else:
        counts = [int(c) for c in args.station_counts.split(",")]
        rows = bench_mod.run_rr_scaling(counts, repetitions=args.repetitions, seed=args.seed)
        bench_mod.write_rr_scaling_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def serve_overrides(args) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for item in args.set:
        if "=" not in item:
            raise ValueError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    for key, (attr, _parser) in CONFIG_KEYS.items():
        value = getattr(args, f"cfg_{attr}", None)
        if value is not None:
            overrides[key] = value
    return overrides


def cmd_serve(args) -> int:
    import uvicorn

    from .app import create_app

    config = load_config(args.config, serve_overrides(args))
    try:
        registry = load_registry(config.model_bundle_path)
        catalog, observations = _load_data(config.data_dir)
    except (OSError, CorruptBundleError, PredictorError, ValueError) as err:
        print(f"error: cannot start service: {err}", file=sys.stderr)
        return 1
    app = create_app(registry, catalog, observations, config)
    try:
        uvicorn.run(app, host=args.host, port=config.server_port)
    except OSError as err:
        print(f"error: cannot bind {args.host}:{config.server_port}: {err}", file=sys.stderr)
        return 1
    return 0


def cmd_chat(args) -> int:
    from ..dialog import DialogEngine, FixedClock

    catalog, observations = _load_data(args.data)
    registry = load_registry(args.bundle)
    clock = FixedClock(dt.date.fromisoformat(args.today)) if args.today else None
    engine = DialogEngine(registry, catalog, observations, clock=clock, ci_level=args.ci, model_kind=args.model_kind)
    context = engine.new_context("terminal")
    interactive = sys.stdin.isatty()
    if interactive:
        print("railassist chat (blank line or Ctrl-D to quit)")
    for line in sys.stdin:
        text = line.strip()
        if not text:
            break
        if not interactive:
            print(f"User: {text}")
        response, context = engine.step(context, text)
        print(f"Agent: {response.text}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "generate": cmd_generate,
        "train": cmd_train,
        "eval": cmd_eval,
        "analyze": cmd_analyze,
        "bench": cmd_bench,
        "serve": cmd_serve,
        "chat": cmd_chat,
    }
    try:
        return handlers[args.command](args)
    except (OSError, ValueError, PredictorError, analytics.NoDataError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
