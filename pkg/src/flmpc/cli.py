"""Command-line front end: ``flmpc {run,ideal,check-privacy,check-reduction,report}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ExperimentConfig, load_config
from .errors import EXIT_CHECK_FAILED, EXIT_OK, ConfigError, FLMPCError
from .fl import fl_functionality, run_fl, select_clients
from .formats import (
    dump_json,
    format_model,
    format_transcript,
    load_datasets,
    privacy_report_lines,
    privacy_summary,
    reduction_report_lines,
    reduction_summary,
)
from .functionality import evaluate_functionality
from .simulation import (
    AggregationProtocol,
    FLProtocol,
    check_private_computation,
    check_reduction,
    simulator_for,
)
from .simulation.core import MODES
from .values import format_rational


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _data_path(cfg: ExperimentConfig, args) -> Path:
    if getattr(args, "data", None):
        return Path(args.data)
    if not cfg.data:
        raise ConfigError("no dataset: set 'data' in the config or pass --data")
    path = Path(cfg.data)
    if not path.is_absolute() and args.config:
        path = Path(args.config).parent / path
    return path


def cmd_run(cfg: ExperimentConfig, data: Path, out: Path) -> int:
    datasets = load_datasets(data)
    result = run_fl(
        cfg.round_config(), datasets, cfg.variant, cfg.rounds,
        initial_model=cfg.initial_model, seed=cfg.seed, eligibility=cfg.eligibility_min,
    )
    _write(out / "transcript.txt", format_transcript(result.views, cfg.digest()))
    _write(out / "model.txt", format_model(result.model))
    lines = [
        f"config-digest {cfg.digest()}",
        f"variant {cfg.variant}",
        f"rounds {cfg.rounds}",
        "selected " + " ".join(str(s) for s in result.selected),
    ]
    for r, model in enumerate(result.models):
        lines.append(f"model {r} " + " ".join(format_rational(w) for w in model))
    _write(out / "run_report.txt", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_ideal(cfg: ExperimentConfig, data: Path, out: Path) -> int:
    datasets = load_datasets(data)
    selected = select_clients(datasets, cfg.clients, cfg.eligibility_min, cfg.seed)
    by_owner = {ds.owner: ds for ds in datasets}
    inputs = tuple(by_owner[o] for o in selected) + (cfg.initial_model,)
    outputs = evaluate_functionality(fl_functionality(cfg.round_config(), cfg.rounds), inputs)
    _write(out / "ideal_model.txt", format_model(outputs[-1]))
    return EXIT_OK


def _privacy_target(cfg: ExperimentConfig):
    if cfg.target == "aggregation":
        protocol = AggregationProtocol(cfg.variant, cfg.m, cfg.field_modulus, cfg.dimension)
        return protocol, protocol.grid()
    protocol = FLProtocol(cfg.variant, cfg.round_config(), cfg.rounds, cfg.initial_model)
    return protocol, protocol.grid(cfg.grid_feature, cfg.grid_labels)


def cmd_check_privacy(cfg: ExperimentConfig, out: Path) -> int:
    protocol, grid = _privacy_target(cfg)
    report = check_private_computation(
        protocol, simulator_for(protocol), grid, cfg.corruption(), cfg.mode,
        budget=cfg.budget, workers=cfg.workers,
    )
    _write(out / "privacy_report.txt", "\n".join(privacy_report_lines(report)) + "\n")
    _write(out / "privacy_summary.json", dump_json(privacy_summary(report)))
    print(f"check-privacy {report.protocol} mode={report.mode}: {report.verdict}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_check_reduction(cfg: ExperimentConfig, out: Path) -> int:
    rc = cfg.round_config()
    grid = FLProtocol(cfg.variant, rc, cfg.rounds, cfg.initial_model).grid(cfg.grid_feature, cfg.grid_labels)
    report = check_reduction(
        rc, cfg.rounds, grid, cfg.corruption(), inner=cfg.variant,
        initial_model=cfg.initial_model, mode=cfg.mode, budget=cfg.budget, workers=cfg.workers,
    )
    _write(out / "reduction_report.txt", "\n".join(reduction_report_lines(report)) + "\n")
    _write(out / "reduction_summary.json", dump_json(reduction_summary(report)))
    note = " (identity composition)" if report.identity_composition else ""
    print(f"check-reduction inner={cfg.variant} rounds={cfg.rounds}{note}: {report.verdict}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_report(out: Path) -> int:
    found = False
    run = out / "run_report.txt"
    if run.exists():
        found = True
        print(run.read_text(), end="")
    for name in ("privacy_summary.json", "reduction_summary.json"):
        path = out / name
        if path.exists():
            found = True
            summary = json.loads(path.read_text())
            print(f"{name}: verdict={summary['verdict']}")
            for key in sorted(summary):
                if key not in ("verdict", "witnesses", "hybrid", "substituted"):
                    print(f"  {key}: {summary[key]}")
    if not found:
        print(f"no reports in {out}", file=sys.stderr)
        return ConfigError.exit_code
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flmpc", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="key = value experiment config")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--workers", type=int, help="parallel enumeration workers")
    common.add_argument("--mode", choices=MODES, help="deterministic-case or general-case check")
    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", help="dataset file (overrides 'data' in the config)")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common, data], help="run the FL protocol, write transcript and model")
    sub.add_parser("ideal", parents=[common, data], help="evaluate the composed functionality only")
    sub.add_parser("check-privacy", parents=[common], help="exact simulation check")
    sub.add_parser("check-reduction", parents=[common], help="oracle-aided vs substituted FL")
    rep = sub.add_parser("report", help="print the reports found in an output directory")
    rep.add_argument("--out", default="out")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        if args.command == "report":
            return cmd_report(out)
        cfg = load_config(args.config).with_overrides(seed=args.seed, workers=args.workers, mode=args.mode)
        if args.command == "run":
            return cmd_run(cfg, _data_path(cfg, args), out)
        if args.command == "ideal":
            return cmd_ideal(cfg, _data_path(cfg, args), out)
        if args.command == "check-privacy":
            return cmd_check_privacy(cfg, out)
        return cmd_check_reduction(cfg, out)
    except FLMPCError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
