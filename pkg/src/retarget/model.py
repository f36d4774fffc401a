"""Protocol parameters and the difficulty retargeting rules.

Difficulty and hashrate are dimensionless; only their ratio, the block rate
``lambda = r / d``, carries units (blocks per time unit).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from retarget.errors import ContractError, DomainError


class Rule(str, enum.Enum):
    """Retargeting rule variant applied at each period boundary."""

    IDEAL = "ideal"
    CORRECTED = "corrected"
    CLAMPED = "clamped"
    BITCOIN_BUG = "bitcoin_bug"

    @property
    def has_closed_form(self) -> bool:
        return self in (Rule.IDEAL, Rule.CORRECTED)


@dataclass(frozen=True)
class ChainParams:
    """Protocol constants of a simulated chain.

    ``initial_difficulty`` may be left as ``None``; it is then resolved
    against a hashrate schedule as ``target_blocktime * r_1`` so the first
    period runs at exactly one block per target blocktime.
    """

    period_length: int = 2016
    target_blocktime: float = 10.0
    rule: Rule = Rule.IDEAL
    initial_difficulty: float | None = None
    clamp_factor: float = 4.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "rule", Rule(self.rule))
        if isinstance(self.period_length, bool) or int(self.period_length) != self.period_length:
            raise ContractError(f"period_length must be an integer, got {self.period_length!r}")
        object.__setattr__(self, "period_length", int(self.period_length))
        if self.period_length < 1:
            raise ContractError(f"period_length must be >= 1, got {self.period_length}")
        if not (math.isfinite(self.target_blocktime) and self.target_blocktime > 0):
            raise DomainError(f"target_blocktime must be positive, got {self.target_blocktime}")
        if self.initial_difficulty is not None and not (
            math.isfinite(self.initial_difficulty) and self.initial_difficulty > 0
        ):
            raise DomainError(f"initial_difficulty must be positive, got {self.initial_difficulty}")
        if not (math.isfinite(self.clamp_factor) and self.clamp_factor >= 1):
            raise DomainError(f"clamp_factor must be >= 1, got {self.clamp_factor}")
        if self.rule is Rule.BITCOIN_BUG and self.period_length < 2:
            raise ContractError("bitcoin_bug rule needs period_length >= 2")
        if self.rule is Rule.CORRECTED and self.period_length < 2:
            raise ContractError("corrected rule needs period_length >= 2")

    def difficulty_for(self, schedule: HashrateSchedule) -> float:
        """Initial difficulty, defaulting to ``target_blocktime * r_1``."""
        if self.initial_difficulty is not None:
            return float(self.initial_difficulty)
        return self.target_blocktime * schedule.rate(1)


@dataclass(frozen=True)
class HashrateSchedule:
    """Per-period hashrates ``r_1, r_2, ...``; the last value persists."""

    rates: tuple[float, ...] = field(default=(1.0,))

    def __post_init__(self) -> None:
        rates = tuple(float(r) for r in np.atleast_1d(np.asarray(self.rates, dtype=float)))
        if not rates:
            raise ContractError("hashrate schedule must contain at least one rate")
        for r in rates:
            if not (math.isfinite(r) and r > 0):
                raise DomainError(f"hashrates must be positive and finite, got {r}")
        object.__setattr__(self, "rates", rates)

    @classmethod
    def constant(cls, rate: float = 1.0) -> HashrateSchedule:
        return cls((rate,))

    def rate(self, n: int) -> float:
        """Hashrate of period ``n`` (1-based)."""
        if n < 1:
            raise ContractError(f"period index must be >= 1, got {n}")
        return self.rates[min(n, len(self.rates)) - 1]

    def delta(self, n: int) -> float:
        """Hashrate ratio ``r_n / r_{n-1}`` for ``n > 1``."""
        if n <= 1:
            raise ContractError(f"hashrate ratio is defined for n > 1, got {n}")
        return self.rate(n) / self.rate(n - 1)


@dataclass(frozen=True)
class PeriodState:
    """Analytic state of one retarget period."""

    period_index: int
    difficulty: float
    hashrate: float
    rate: float
    theta: float | None

    @classmethod
    def build(
        cls, n: int, difficulty: float, schedule: HashrateSchedule, params: ChainParams
    ) -> PeriodState:
        hashrate = schedule.rate(n)
        th = theta(n, schedule, params) if n > 1 and params.rule.has_closed_form else None
        return cls(n, difficulty, hashrate, rate_from(difficulty, hashrate), th)


def rate_from(difficulty: float, hashrate: float) -> float:
    """Block rate ``hashrate / difficulty``."""
    if not (difficulty > 0 and hashrate > 0):
        raise DomainError(f"difficulty and hashrate must be positive, got d={difficulty}, r={hashrate}")
    return hashrate / difficulty


def adjustment_factor(blocktimes: np.ndarray, params: ChainParams) -> np.ndarray:
    """Multiplicative difficulty change for each period in ``blocktimes``.

    ``blocktimes`` has shape ``(..., N)``; the result has shape ``(...)``.
    """
    n = params.period_length
    beta = params.target_blocktime
    rule = params.rule
    if rule is Rule.BITCOIN_BUG:
        total = blocktimes[..., : n - 1].sum(axis=-1)
    else:
        total = blocktimes.sum(axis=-1)
    if not np.all(np.isfinite(total) & (total > 0)):
        raise DomainError("period duration must be positive and finite")
    if rule is Rule.CORRECTED:
        return (n - 1) * beta / total
    ratio = n * beta / total
    if rule is Rule.CLAMPED:
        ratio = np.clip(ratio, 1.0 / params.clamp_factor, params.clamp_factor)
    return ratio


def retarget(current_difficulty: float, period_blocktimes: Sequence[float], params: ChainParams) -> float:
    """Difficulty for the next period after observing ``period_blocktimes``.

    ideal:        ``d * N*beta / T``
    corrected:    ``d * (N-1)*beta / T``
    clamped:      ideal ratio clipped to ``[1/clamp_factor, clamp_factor]``
    bitcoin_bug:  ``d * N*beta / T'`` with the last blocktime left out of ``T'``
    """
    if not current_difficulty > 0:
        raise DomainError(f"difficulty must be positive, got {current_difficulty}")
    times = np.asarray(period_blocktimes, dtype=float)
    if times.ndim != 1 or times.shape[0] != params.period_length:
        raise ContractError(
            f"expected {params.period_length} blocktimes, got shape {times.shape}"
        )
    if not np.all(times > 0):
        raise DomainError("blocktimes must be positive")
    return float(current_difficulty * adjustment_factor(times, params))


def theta(n: int, schedule: HashrateSchedule, params: ChainParams) -> float:
    """Scale of the period-``n`` rate and blocktime laws, ``N*beta / delta_n``.

    Uses ``(N-1)*beta`` in the numerator under the corrected rule.
    """
    if n <= 1:
        raise ContractError(f"theta is defined for n > 1 only, got {n}")
    if not params.rule.has_closed_form:
        raise ContractError(f"no closed-form scale for rule {params.rule.value!r}")
    blocks = params.period_length - 1 if params.rule is Rule.CORRECTED else params.period_length
    return blocks * params.target_blocktime / schedule.delta(n)
