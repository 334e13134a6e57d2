"""Command line entry point: ``sgcd run | analyze | compare``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ModelConfig, format_config, load_config, parse_config
from .diagnostics import freezing_index, nonergodicity
from .harness import (
    DEFAULT_STEPS,
    MODES,
    align_episodes,
    column,
    continuous_alignment,
    read_events_json,
    read_steps_csv,
    run_simulation,
    summarize,
    write_episode_csv,
    write_events_json,
    write_steps_csv,
)
from .model import NumericalError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3
RUN_META = "run.json"

log = logging.getLogger("sgcd")


def _write_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else ModelConfig()
    if args.seed is not None:
        cfg = cfg.with_(seed=args.seed)
    if args.steps < 1:
        raise ConfigError("--steps must be positive")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records, events = run_simulation(cfg, args.mode, args.steps)
    write_steps_csv(records, out / "steps.csv")
    write_events_json(events, out / "events.json")
    _write_json(summarize(records, events).to_dict(), out / "summary.json")
    _write_json({"mode": args.mode, "steps": args.steps, "config": format_config(cfg)},
                out / RUN_META)
    log.info("wrote %d steps and %d events to %s", len(records), len(events), out)
    return EXIT_OK


def _replay_trajectory(run_dir: Path, records) -> np.ndarray:
    meta = json.loads((run_dir / RUN_META).read_text())
    cfg = parse_config(meta["config"])
    xs = np.empty((meta["steps"], cfg.N))

    def keep(t, x):
        xs[t] = x

    replayed, _ = run_simulation(cfg, meta["mode"], meta["steps"], on_state=keep)
    if not np.array_equal(column(replayed, "Z"), column(records, "Z")):
        raise ConfigError(f"{run_dir}: replay does not reproduce steps.csv")
    return xs


def cmd_analyze(args) -> int:
    run_dir = Path(args.run_dir)
    records = read_steps_csv(run_dir / "steps.csv")
    events = read_events_json(run_dir / "events.json")
    if args.stride:
        ep = continuous_alignment(records, args.stride, args.pre, args.post, args.signal)
    else:
        ep = align_episodes(records, events, args.signal, args.pre, args.post)
    write_episode_csv(ep, run_dir / f"aligned_{args.signal}.csv")
    log.info("aligned %d episodes of %s", len(ep.matrix), args.signal)

    xs = _replay_trajectory(run_dir, records)
    meta = json.loads((run_dir / RUN_META).read_text())
    win = args.window or parse_config(meta["config"]).tau
    with open(run_dir / "diagnostics.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_start", "t_end", "F_T", "E_T"])
        for start in range(0, len(xs) - win + 1, win):
            X = xs[start:start + win]
            w.writerow([start, start + win - 1,
                        format(freezing_index(X, args.lambda_f), ".17g"),
                        format(nonergodicity(X, bins=args.bins), ".17g")])
    return EXIT_OK


def cmd_compare(args) -> int:
    def load(d):
        return json.loads((Path(d) / "summary.json").read_text())

    gated, cont = load(args.gated_dir), load(args.continuous_dir)
    keys = ["n_openings", "plastic_fraction", "w_plateau_fraction", "longest_w_plateau",
            "mean_interval", "mean_Z_onset", "mean_Z_after"]
    out = {
        "gated": gated,
        "continuous": cont,
        "side_by_side": {k: {"gated": gated.get(k), "continuous": cont.get(k)} for k in keys},
    }
    _write_json(out, Path(args.out or args.gated_dir) / "comparison.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sgcd", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate and write steps.csv, events.json, summary.json")
    r.add_argument("--config", help="key = value parameter file (defaults if omitted)")
    r.add_argument("--mode", choices=MODES, default="gated")
    r.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    r.add_argument("--seed", type=int, help="overrides the config seed")
    r.add_argument("--out-dir", required=True)
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="gate-aligned tensors and trajectory diagnostics")
    a.add_argument("--run-dir", required=True)
    a.add_argument("--signal", choices=("Z", "B_total"), default="Z")
    a.add_argument("--pre", type=int, default=500)
    a.add_argument("--post", type=int, default=500)
    a.add_argument("--stride", type=int, help="align every K steps instead of on gate openings")
    a.add_argument("--window", type=int, help="diagnostics window length (default tau)")
    a.add_argument("--bins", type=int, default=20)
    a.add_argument("--lambda-f", type=float, default=1.0)
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("compare", help="put a gated and a continuous run side by side")
    c.add_argument("--gated-dir", required=True)
    c.add_argument("--continuous-dir", required=True)
    c.add_argument("--out", help="directory for comparison.json (default: the gated dir)")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
