"""Run configuration shared by the CLI subcommands, with JSON round-tripping."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from retarget.model import ChainParams, HashrateSchedule, Rule


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` lists one message per offending field."""

    def __init__(self, problems: list[str]) -> None:
        self.problems = problems
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {p}" for p in problems))


@dataclass
class RunConfig:
    period_length: int = 2016
    target_blocktime: float = 10.0
    rule: str = Rule.IDEAL.value
    initial_difficulty: float | None = None
    clamp_factor: float = 4.0
    hashrates: list[float] = field(default_factory=lambda: [1.0])
    schedule_file: str | None = None
    num_periods: int = 2
    num_runs: int = 10_000
    seed: int = 0
    alpha: float = 0.01
    out: str | None = None
    summary_out: str | None = None
    verify_targets: list[list[int]] = field(default_factory=lambda: [[2, 1]])

    def validate(self) -> RunConfig:
        problems = []

        def positive_int(name: str, minimum: int = 1) -> None:
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
                problems.append(f"{name}: expected an integer >= {minimum}, got {value!r}")

        def positive_float(name: str, minimum: float = 0.0, inclusive: bool = False) -> None:
            value = getattr(self, name)
            ok = isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
            ok = ok and (value >= minimum if inclusive else value > minimum)
            if not ok:
                bound = f">= {minimum}" if inclusive else f"> {minimum}"
                problems.append(f"{name}: expected a finite number {bound}, got {value!r}")

        positive_int("period_length")
        positive_float("target_blocktime")
        if self.rule not in {r.value for r in Rule}:
            problems.append(f"rule: expected one of {[r.value for r in Rule]}, got {self.rule!r}")
        elif self.rule in (Rule.BITCOIN_BUG.value, Rule.CORRECTED.value) and self.period_length == 1:
            problems.append(f"rule: {self.rule!r} needs period_length >= 2")
        if self.initial_difficulty is not None:
            positive_float("initial_difficulty")
        positive_float("clamp_factor", 1.0, inclusive=True)
        if not isinstance(self.hashrates, list) or not self.hashrates or not all(
            isinstance(r, (int, float)) and not isinstance(r, bool) and math.isfinite(r) and r > 0
            for r in self.hashrates
        ):
            problems.append(f"hashrates: expected a non-empty list of positive numbers, got {self.hashrates!r}")
        positive_int("num_periods")
        positive_int("num_runs")
        positive_int("seed", 0)
        if not (isinstance(self.alpha, (int, float)) and 0 < self.alpha < 1):
            problems.append(f"alpha: expected a number in (0, 1), got {self.alpha!r}")
        targets_ok = isinstance(self.verify_targets, list) and all(
            isinstance(t, (list, tuple)) and len(t) == 2 and all(isinstance(v, int) and v >= 1 for v in t)
            for t in self.verify_targets
        )
        if not targets_ok:
            problems.append(f"verify_targets: expected [[period, position], ...], got {self.verify_targets!r}")
        elif isinstance(self.period_length, int):
            for period, position in self.verify_targets:
                if position > self.period_length:
                    problems.append(f"verify_targets: position {position} exceeds period_length {self.period_length}")
        if problems:
            raise ConfigError(problems)
        return self

    def chain_params(self) -> ChainParams:
        return ChainParams(
            period_length=self.period_length,
            target_blocktime=float(self.target_blocktime),
            rule=Rule(self.rule),
            initial_difficulty=None if self.initial_difficulty is None else float(self.initial_difficulty),
            clamp_factor=float(self.clamp_factor),
        )

    def schedule(self) -> HashrateSchedule:
        if self.schedule_file is not None:
            return HashrateSchedule(tuple(load_schedule_file(self.schedule_file)))
        return HashrateSchedule(tuple(float(r) for r in self.hashrates))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError([f"{name}: unknown field" for name in unknown])
        data = dict(data)
        if "verify_targets" in data and isinstance(data["verify_targets"], list):
            data["verify_targets"] = [list(t) if isinstance(t, (list, tuple)) else t for t in data["verify_targets"]]
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> RunConfig:
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError(["<root>: expected a JSON object"])
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path) -> RunConfig:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def load_schedule_file(path: str | Path) -> list[float]:
    """Hashrates from a JSON array or a file with one number per line."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    if isinstance(data, dict):
        data = data.get("rates", data.get("hashrates"))
    if not isinstance(data, list) or not data:
        raise ConfigError([f"schedule_file: {path} holds no hashrates"])
    try:
        return [float(r) for r in data]
    except (TypeError, ValueError) as exc:
        raise ConfigError([f"schedule_file: {path}: {exc}"]) from exc
