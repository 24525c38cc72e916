"""Command-line front end.

Subcommands: estimate, detect, sweep (Monte Carlo runs emitting CSV or
JSONL) and fisher (information audit of a two-party model, emitted as a
single JSON line). Exit codes: 0 success, 1 bad configuration, 2
runtime failure. argparse usage errors keep argparse's own exit code.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .config import load_config
from .errors import ConfigError, WvaBenchError
from .fisher import fi_decomposition
from .harness import emit_results, run_experiment, sweep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wva-bench",
        description="Weak-value amplification estimator benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "estimate": "run the estimator benchmark once",
        "detect": "run the detection benchmark once",
        "fisher": "audit the information budget of a two-party model",
        "sweep": "run the benchmark at every value of the swept parameter",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True, help="TOML config file")
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument(
            "--format", choices=("csv", "jsonl"), default="csv", dest="fmt"
        )
        p.add_argument("--seed", type=int, help="override run.seed")
        p.add_argument("--trials", type=int, help="override run.trials")
        p.add_argument("--workers", type=int, help="worker threads (env WVA_BENCH_THREADS caps)")
        p.add_argument(
            "--dump-trials",
            dest="dump_trials",
            help="also write per-trial records as JSONL",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        mode = "estimate" if args.command == "sweep" else args.command
        config = load_config(args.config, mode=mode)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.trials is not None:
            config = replace(config, trials=args.trials)

        if args.command == "fisher":
            if config.fisher_model is None:
                raise ConfigError("fisher", "missing section required by this command")
            report = fi_decomposition(config.fisher_model)
            line = json.dumps(report.to_dict(), sort_keys=True) + "\n"
            if args.out in ("-", None):
                sys.stdout.write(line)
            else:
                with open(args.out, "w", newline="\n") as fh:
                    fh.write(line)
            return 0

        if args.command == "sweep":
            results = sweep(config, workers=args.workers, dump_path=args.dump_trials)
        else:
            results = [
                run_experiment(
                    config, workers=args.workers, dump_path=args.dump_trials
                )
            ]
        emit_results(results, path=args.out, fmt=args.fmt)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (WvaBenchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
