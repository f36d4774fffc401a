"""Chain simulation, the discrete-miner oracle, and ensemble execution."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from retarget.errors import ContractError, DomainError
from retarget.model import ChainParams, HashrateSchedule, adjustment_factor
from retarget.sampler import RngHandle, sample_geometric

# runs held in memory at once by run_ensemble
ENSEMBLE_CHUNK = 1 << 15


@dataclass(frozen=True)
class BlockRecord:
    block_index: int
    period_index: int
    position_in_period: int
    blocktime: float
    arrival_time: float
    difficulty: float
    rate: float


@dataclass(frozen=True)
class PeriodSummary:
    period_index: int
    difficulty: float
    hashrate: float
    rate: float
    total_time: float


@dataclass(frozen=True)
class ChainTrace:
    params: ChainParams
    schedule: HashrateSchedule
    blocks: tuple[BlockRecord, ...]
    periods: tuple[PeriodSummary, ...]

    @property
    def blocktimes(self) -> np.ndarray:
        return np.array([b.blocktime for b in self.blocks])

    @property
    def rates(self) -> np.ndarray:
        return np.array([b.rate for b in self.blocks])


@dataclass(frozen=True)
class BlockSelector:
    """Blocktime at ``position`` (1-based) within ``period`` (1-based)."""

    period: int
    position: int


@dataclass(frozen=True)
class RateSelector:
    """Block rate of ``period``."""

    period: int


Selector = Union[BlockSelector, RateSelector]


@dataclass
class _Evolution:
    blocktimes: np.ndarray  # (M, P, N)
    difficulties: np.ndarray  # (M, P)
    hashrates: np.ndarray  # (P,)
    rates: np.ndarray  # (M, P)
    totals: np.ndarray  # (M, P)


def _evolve(
    std_exp: np.ndarray, params: ChainParams, schedule: HashrateSchedule
) -> _Evolution:
    """Run the retarget recursion over pre-drawn unit exponentials.

    ``std_exp`` has shape ``(runs, periods, N)``; blocktimes are
    ``std_exp / rate`` with the rate fixed within each period.
    """
    runs, num_periods, _ = std_exp.shape
    hashrates = np.array([schedule.rate(n) for n in range(1, num_periods + 1)])
    difficulties = np.empty((runs, num_periods))
    rates = np.empty((runs, num_periods))
    blocktimes = np.empty_like(std_exp)
    totals = np.empty((runs, num_periods))

    difficulty = np.full(runs, params.difficulty_for(schedule))
    for p in range(num_periods):
        rate = hashrates[p] / difficulty
        difficulties[:, p] = difficulty
        rates[:, p] = rate
        blocktimes[:, p, :] = std_exp[:, p, :] / rate[:, None]
        totals[:, p] = blocktimes[:, p, :].sum(axis=-1)
        if p + 1 < num_periods:
            difficulty = difficulty * adjustment_factor(blocktimes[:, p, :], params)
    return _Evolution(blocktimes, difficulties, hashrates, rates, totals)


def _check_periods(num_periods: int) -> None:
    if isinstance(num_periods, bool) or int(num_periods) != num_periods or num_periods < 1:
        raise ContractError(f"num_periods must be a positive integer, got {num_periods}")


def simulate_chain(
    params: ChainParams, schedule: HashrateSchedule, num_periods: int, rng: RngHandle
) -> ChainTrace:
    """Simulate ``num_periods`` retarget periods of a single chain."""
    _check_periods(num_periods)
    n = params.period_length
    std_exp = rng.standard_exponential(num_periods * n).reshape(1, num_periods, n)
    evo = _evolve(std_exp, params, schedule)

    flat_times = evo.blocktimes[0].ravel()
    arrivals = np.cumsum(flat_times)
    blocks = []
    for k in range(num_periods * n):
        p, pos = divmod(k, n)
        blocks.append(
            BlockRecord(
                block_index=k + 1,
                period_index=p + 1,
                position_in_period=pos + 1,
                blocktime=float(flat_times[k]),
                arrival_time=float(arrivals[k]),
                difficulty=float(evo.difficulties[0, p]),
                rate=float(evo.rates[0, p]),
            )
        )
    periods = tuple(
        PeriodSummary(
            period_index=p + 1,
            difficulty=float(evo.difficulties[0, p]),
            hashrate=float(evo.hashrates[p]),
            rate=float(evo.rates[0, p]),
            total_time=float(evo.totals[0, p]),
        )
        for p in range(num_periods)
    )
    return ChainTrace(params, schedule, tuple(blocks), periods)


def simulate_discrete_miner(
    difficulty: float, hashes_per_unit_time: float, num_blocks: int, rng: RngHandle
) -> np.ndarray:
    """Blocktimes of a miner making discrete hash attempts at a fixed rate.

    Each attempt succeeds with probability ``1/difficulty``; the blocktime is
    the number of attempts up to the first success divided by the attempt rate.
    """
    if not difficulty > 1:
        raise DomainError(f"difficulty must exceed 1, got {difficulty}")
    if not hashes_per_unit_time > 0:
        raise DomainError(f"hash rate must be positive, got {hashes_per_unit_time}")
    if num_blocks < 1:
        raise ContractError(f"num_blocks must be >= 1, got {num_blocks}")
    trials = sample_geometric(1.0 / difficulty, rng, size=num_blocks)
    return trials / hashes_per_unit_time


def run_ensemble(
    params: ChainParams,
    schedule: HashrateSchedule,
    num_periods: int,
    num_runs: int,
    seed: int,
    collect: Iterable[Selector],
) -> dict[Selector, np.ndarray]:
    """Simulate ``num_runs`` independent chains and keep only selected values.

    Run ``m`` (1-based) draws from ``RngHandle(seed, m)``, so each collected
    array holds one value per run in run order, and a one-run ensemble
    reproduces ``simulate_chain`` on stream 1 exactly.
    """
    _check_periods(num_periods)
    if num_runs < 1:
        raise ContractError(f"num_runs must be >= 1, got {num_runs}")
    selectors = list(collect)
    n = params.period_length
    for sel in selectors:
        if not 1 <= sel.period <= num_periods:
            raise ContractError(f"selector {sel} outside periods 1..{num_periods}")
        if isinstance(sel, BlockSelector) and not 1 <= sel.position <= n:
            raise ContractError(f"selector {sel} outside positions 1..{n}")

    out = {sel: np.empty(num_runs) for sel in selectors}
    for start in range(0, num_runs, ENSEMBLE_CHUNK):
        stop = min(start + ENSEMBLE_CHUNK, num_runs)
        std_exp = np.stack(
            [
                RngHandle(seed, m + 1).standard_exponential(num_periods * n)
                for m in range(start, stop)
            ]
        ).reshape(stop - start, num_periods, n)
        evo = _evolve(std_exp, params, schedule)
        for sel in selectors:
            if isinstance(sel, BlockSelector):
                out[sel][start:stop] = evo.blocktimes[:, sel.period - 1, sel.position - 1]
            else:
                out[sel][start:stop] = evo.rates[:, sel.period - 1]
    return out
