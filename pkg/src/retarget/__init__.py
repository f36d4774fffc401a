"""Proof-of-work block arrival times under difficulty retargeting.

Simulation of chains whose difficulty is retargeted every ``N`` blocks,
closed-form blocktime laws (exponential, Erlang, Lomax) and the statistics
needed to check one against the other.
"""

from retarget.analytics import (
    DistributionSpec,
    Marker,
    MomentReport,
    cdf,
    estimate_hashrate,
    pdf,
    predicted_blocktime,
    predicted_moments,
    quantile,
)
from retarget.errors import ContractError, DomainError
from retarget.model import ChainParams, HashrateSchedule, PeriodState, Rule, rate_from, retarget, theta
from retarget.sampler import (
    RngHandle,
    sample_erlang,
    sample_exponential,
    sample_geometric,
    sample_lomax,
)
from retarget.simulator import (
    BlockRecord,
    BlockSelector,
    ChainTrace,
    PeriodSummary,
    RateSelector,
    run_ensemble,
    simulate_chain,
    simulate_discrete_miner,
)
from retarget.stats import GofReport, Verdict, empirical_moments, hill_tail_index, ks_test, verify_theorem

__version__ = "0.1.0"

__all__ = [
    "BlockRecord",
    "BlockSelector",
    "ChainParams",
    "ChainTrace",
    "ContractError",
    "DistributionSpec",
    "DomainError",
    "GofReport",
    "HashrateSchedule",
    "Marker",
    "MomentReport",
    "PeriodState",
    "PeriodSummary",
    "RateSelector",
    "RngHandle",
    "Rule",
    "Verdict",
    "cdf",
    "empirical_moments",
    "estimate_hashrate",
    "hill_tail_index",
    "ks_test",
    "pdf",
    "predicted_blocktime",
    "predicted_moments",
    "quantile",
    "rate_from",
    "retarget",
    "run_ensemble",
    "sample_erlang",
    "sample_exponential",
    "sample_geometric",
    "sample_lomax",
    "simulate_chain",
    "simulate_discrete_miner",
    "theta",
    "verify_theorem",
]
