"""CSV trace and JSON summary serialization."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from retarget.simulator import ChainTrace

TRACE_HEADER = ("block_index", "period", "position", "blocktime", "arrival_time", "difficulty", "rate")


class TraceParseError(ValueError):
    pass


@dataclass(frozen=True)
class TraceRow:
    block_index: int
    period: int
    position: int
    blocktime: float
    arrival_time: float
    difficulty: float
    rate: float


def fmt(value: float) -> str:
    return f"{value:.12g}"


def write_trace_csv(trace: ChainTrace, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for b in trace.blocks:
            writer.writerow(
                [
                    b.block_index,
                    b.period_index,
                    b.position_in_period,
                    fmt(b.blocktime),
                    fmt(b.arrival_time),
                    fmt(b.difficulty),
                    fmt(b.rate),
                ]
            )


def trace_summary(trace: ChainTrace) -> dict:
    p = trace.params
    return {
        "params": {
            "period_length": p.period_length,
            "target_blocktime": p.target_blocktime,
            "rule": p.rule.value,
            "initial_difficulty": p.difficulty_for(trace.schedule),
            "clamp_factor": p.clamp_factor,
        },
        "hashrates": list(trace.schedule.rates),
        "num_blocks": len(trace.blocks),
        "periods": [
            {
                "period": s.period_index,
                "total_time": s.total_time,
                "difficulty": s.difficulty,
                "hashrate": s.hashrate,
                "rate": s.rate,
            }
            for s in trace.periods
        ],
    }


def write_summary_json(trace: ChainTrace, path: str | Path) -> None:
    Path(path).write_text(json.dumps(trace_summary(trace), indent=2) + "\n", encoding="utf-8")


def read_trace_csv(path: str | Path) -> list[TraceRow]:
    """Parse a trace CSV; errors name the offending line."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise TraceParseError(f"{path}:1: empty file, expected header")
        if tuple(header) != TRACE_HEADER:
            raise TraceParseError(f"{path}:1: unexpected header {','.join(header)!r}")
        for record in reader:
            line = reader.line_num
            if not record:
                continue
            if len(record) != len(TRACE_HEADER):
                raise TraceParseError(f"{path}:{line}: expected {len(TRACE_HEADER)} fields, got {len(record)}")
            try:
                row = TraceRow(
                    int(record[0]),
                    int(record[1]),
                    int(record[2]),
                    *(float(v) for v in record[3:]),
                )
            except ValueError as exc:
                raise TraceParseError(f"{path}:{line}: {exc}") from exc
            if row.blocktime <= 0 or row.rate <= 0:
                raise TraceParseError(f"{path}:{line}: blocktime and rate must be positive")
            rows.append(row)
    if not rows:
        raise TraceParseError(f"{path}:2: trace has a header but no blocks")
    return rows
