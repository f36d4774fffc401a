"""Command-line interface: ``retarget simulate | verify | moments | plot``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from retarget.analytics import DistributionSpec, Marker, predicted_blocktime, predicted_moments
from retarget.config import ConfigError, RunConfig
from retarget.errors import ContractError, DomainError
from retarget.plot import write_svg
from retarget.sampler import RngHandle
from retarget.simulator import simulate_chain
from retarget.stats import GofReport, Verdict, verify_theorem
from retarget.traceio import TraceParseError, read_trace_csv, write_summary_json, write_trace_csv

# stream used by single-chain simulation; matches ensemble run 1
SIMULATE_STREAM = 1


class OutputError(OSError):
    pass


def _open_check(path: str | Path) -> Path:
    path = Path(path)
    try:
        with open(path, "a", encoding="utf-8"):
            pass
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def cmd_simulate(config: RunConfig) -> tuple[Path, Path]:
    """Simulate one chain; write the CSV trace and the JSON period summary."""
    config.validate()
    if config.out is None:
        raise ConfigError(["out: simulate needs an output path for the trace"])
    trace_path = Path(config.out)
    summary_path = Path(config.summary_out) if config.summary_out else trace_path.with_suffix(".json")
    _open_check(trace_path)
    _open_check(summary_path)
    trace = simulate_chain(
        config.chain_params(), config.schedule(), config.num_periods, RngHandle(config.seed, SIMULATE_STREAM)
    )
    write_trace_csv(trace, trace_path)
    write_summary_json(trace, summary_path)
    return trace_path, summary_path


def cmd_verify(
    config: RunConfig, reference_override: DistributionSpec | None = None
) -> tuple[list[GofReport], int]:
    """Check each configured (period, position) blocktime against its predicted law.

    The exit status is 0 unless some verdict is ``rejected``.
    ``reference_override`` replaces every predicted law; it is a test hook
    for negative controls.
    """
    config.validate()
    params, schedule = config.chain_params(), config.schedule()
    reports = [
        verify_theorem(
            params,
            schedule,
            period,
            position,
            config.num_runs,
            config.seed,
            config.alpha,
            reference=reference_override,
        )
        for period, position in config.verify_targets
    ]
    payload = json.dumps([r.to_dict() for r in reports], indent=2) + "\n"
    if config.out:
        _open_check(config.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    status = 1 if any(r.verdict is Verdict.REJECTED for r in reports) else 0
    return reports, status


def moments_table(config: RunConfig) -> list[dict]:
    config.validate()
    params, schedule = config.chain_params(), config.schedule()
    beta = params.target_blocktime
    rows = []
    for n in range(1, config.num_periods + 1):
        spec = predicted_blocktime(n, params, schedule)
        if spec is None:
            rows.append({"period": n, "law": None, "mean": None, "variance": None, "mean_ratio": None,
                         "note": f"no closed form for rule {params.rule.value!r}"})
            continue
        report = predicted_moments(spec)
        ratio = report.mean if isinstance(report.mean, Marker) else report.mean / beta
        row = {"period": n, "law": spec.to_dict()}
        row.update(report.to_dict())
        row["mean_ratio"] = ratio.value if isinstance(ratio, Marker) else ratio
        rows.append(row)
    return rows


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def cmd_moments(config: RunConfig, as_json: bool = False) -> list[dict]:
    """Predicted blocktime mean and variance per period."""
    rows = moments_table(config)
    if as_json or (config.out and config.out.endswith(".json")):
        text = json.dumps(rows, indent=2) + "\n"
    else:
        lines = [f"{'period':>6}  {'law':<24}  {'mean':>16}  {'variance':>16}  {'mean_ratio':>16}"]
        for r in rows:
            law = "no closed form" if r["law"] is None else str(DistributionSpec(**r["law"]))
            lines.append(
                f"{r['period']:>6}  {law:<24}  {_cell(r['mean']):>16}  "
                f"{_cell(r['variance']):>16}  {_cell(r['mean_ratio']):>16}"
            )
        text = "\n".join(lines) + "\n"
    if config.out:
        _open_check(config.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return rows


def cmd_plot(trace_path: str | Path, out_path: str | Path) -> Path:
    """Render a trace CSV as an SVG; nothing is written if parsing fails."""
    rows = read_trace_csv(trace_path)
    out = _open_check(out_path)
    periods = rows[-1].period - rows[0].period + 1
    write_svg(rows, out, title=f"{len(rows)} blocks, {periods} periods")
    return out


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON RunConfig file; flags override its values")
    p.add_argument("--period-length", type=int)
    p.add_argument("--target-blocktime", type=float)
    p.add_argument("--rule", choices=["ideal", "corrected", "clamped", "bitcoin_bug"])
    p.add_argument("--initial-difficulty", type=float)
    p.add_argument("--clamp-factor", type=float)
    p.add_argument("--hashrates", help="comma-separated per-period hashrates")
    p.add_argument("--schedule-file", help="JSON array or one hashrate per line")
    p.add_argument("--num-periods", type=int)
    p.add_argument("--num-runs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--out")
    p.add_argument("--summary-out")
    p.add_argument(
        "--verify-target", action="append", metavar="PERIOD:POSITION",
        help="blocktime to verify, repeatable (default 2:1)",
    )


def config_from_args(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    for name in (
        "period_length", "target_blocktime", "rule", "initial_difficulty", "clamp_factor",
        "schedule_file", "num_periods", "num_runs", "seed", "alpha", "out", "summary_out",
    ):
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    if args.hashrates:
        try:
            config.hashrates = [float(v) for v in args.hashrates.split(",")]
        except ValueError as exc:
            raise ConfigError([f"hashrates: {exc}"]) from exc
    if args.verify_target:
        try:
            config.verify_targets = [[int(v) for v in t.split(":")] for t in args.verify_target]
        except ValueError as exc:
            raise ConfigError([f"verify_targets: {exc}"]) from exc
    return config.validate()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retarget", description="Block arrival times under proof-of-work difficulty retargeting."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_config_flags(sub.add_parser("simulate", help="simulate one chain to a CSV trace"))
    _add_config_flags(sub.add_parser("verify", help="KS-check simulated blocktimes against the predicted law"))
    moments = sub.add_parser("moments", help="predicted blocktime mean and variance per period")
    _add_config_flags(moments)
    moments.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    plot = sub.add_parser("plot", help="render a trace CSV as SVG")
    plot.add_argument("trace")
    plot.add_argument("--out", required=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "plot":
            cmd_plot(args.trace, args.out)
            return 0
        config = config_from_args(args)
        if args.command == "simulate":
            cmd_simulate(config)
            return 0
        if args.command == "verify":
            return cmd_verify(config)[1]
        cmd_moments(config, as_json=args.json)
        return 0
    except (ConfigError, TraceParseError, OutputError, DomainError, ContractError, OSError) as exc:
        print(f"retarget: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
