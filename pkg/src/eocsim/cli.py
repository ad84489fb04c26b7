"""Command-line entry point: multi-round experiment driver and calibration."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .calibrate import CalibrationError, calibrate_transmission, params_toml_block
from .config import ConfigError, ScenarioConfig, load_config
from .eoc import run_eoc_round
from .epidemic import run_round, summarize
from .memory import MemoryStore
from .plans import Plan
from . import reporting

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eocsim",
        description="Immune-inspired EOC simulator for epidemic control planning.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run simulation rounds and emit reports")
    run.add_argument("--config", required=True, help="scenario TOML file")
    run.add_argument("--rounds", type=int, default=None, help="override round count")
    run.add_argument("--seed", type=int, default=None, help="override base seed")
    run.add_argument("--memory-file", default=None,
                     help="memory file to carry across invocations "
                          "(default: <out-dir>/memory.jsonl)")
    run.add_argument("--out-dir", default="out", help="output directory")
    run.add_argument("--no-control", action="store_true",
                     help="skip the EOC layer and run the bare epidemic")
    run.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    run.add_argument("--threads", type=int, default=None,
                     help="parallel plan evaluations (outputs are unchanged)")

    cal = sub.add_parser("calibrate", help="calibrate transmission_prob to peak targets")
    cal.add_argument("--config", required=True, help="scenario TOML file")
    cal.add_argument("--target-peak-day", type=float, default=10.0)
    cal.add_argument("--target-peak-prev", type=float, default=0.608)
    cal.add_argument("--replicates", type=int, default=20)
    cal.add_argument("--out", default=None, help="write the TOML block here instead of stdout")
    return parser


def _load(path: str, args: argparse.Namespace) -> ScenarioConfig:
    config = load_config(path)
    if getattr(args, "rounds", None) is not None:
        config.rounds = args.rounds
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    config.validate()
    return config


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        config = _load(args.config, args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        memory_path = Path(args.memory_file) if args.memory_file else out_dir / "memory.jsonl"
        if memory_path.exists():
            store = MemoryStore.load(
                memory_path,
                min_successfulness=config.memory.min_successfulness,
                match_radius=config.memory.match_radius,
            )
        else:
            store = MemoryStore(
                min_successfulness=config.memory.min_successfulness,
                match_radius=config.memory.match_radius,
            )

        summaries = []
        for index in range(config.rounds):
            round_config = config.for_round(index)
            stem = f"round_{index:03d}"
            if args.no_control:
                trace = run_round(round_config, Plan.empty())
                summary = summarize(trace, index)
            else:
                result = run_eoc_round(round_config, store, round_index=index,
                                       threads=args.threads)
                trace, summary, store = result.trace, result.summary, result.store
                reporting.write_round_log(result.log, out_dir / f"{stem}_log.txt")
                store.save(memory_path)
            reporting.write_trace_csv(trace, out_dir / f"{stem}_trace.csv")
            if not args.no_plots:
                reporting.render_trace_figure(trace, out_dir / f"{stem}_trace.png",
                                              f"Round {index}")
            summaries.append(summary)

        reporting.write_summary_csv(summaries, out_dir / "summary.csv")
        table = reporting.summary_table(summaries)
        (out_dir / "summary.txt").write_text(table + "\n")
        if not args.no_plots:
            reporting.render_summary_figure(summaries, out_dir / "summary.png")
        print(table)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _cmd_calibrate(args: argparse.Namespace) -> int:
    try:
        config = _load(args.config, args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = calibrate_transmission(
            config,
            target_peak_day=args.target_peak_day,
            target_peak_prev=args.target_peak_prev,
            replicates=args.replicates,
        )
    except CalibrationError as exc:
        print(f"calibration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    block = params_toml_block(result.params)
    print(f"# mean peak day {result.mean_peak_day:.2f}, "
          f"mean peak prevalence {result.mean_peak_prevalence:.4f} "
          f"({result.iterations} iterations, "
          f"{'converged' if result.converged else 'not converged'})")
    if args.out:
        try:
            Path(args.out).write_text(block)
        except OSError as exc:
            print(f"i/o error: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        print(block, end="")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_calibrate(args)


if __name__ == "__main__":
    sys.exit(main())
