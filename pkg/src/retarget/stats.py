"""Empirical estimators and goodness-of-fit checks against the analytic laws."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from retarget.analytics import DistributionSpec, Marker, MomentReport, cdf, predicted_blocktime, predicted_moments
from retarget.errors import ContractError
from retarget.model import ChainParams, HashrateSchedule
from retarget.simulator import BlockSelector, run_ensemble

DEFAULT_ALPHA = 0.01
MIN_VERDICT_SAMPLES = 100
# means are compared at this many estimated standard errors
MEAN_TOLERANCE_SE = 4.0


class Verdict(str, enum.Enum):
    CONSISTENT = "consistent"
    REJECTED = "rejected"
    NOT_APPLICABLE = "not_applicable"


@dataclass
class GofReport:
    sample_size: int
    ks_statistic: float | None
    p_value: float | None
    empirical_mean: float
    empirical_variance: float
    predicted: MomentReport | None
    verdict: Verdict
    alpha: float = DEFAULT_ALPHA
    reference: DistributionSpec | None = None
    period: int | None = None
    position: int | None = None
    mean_delta: float | None = None
    mean_standard_error: float | None = None
    mean_consistent: bool | None = None
    variance_delta: float | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "period": self.period,
            "position": self.position,
            "reference": None if self.reference is None else self.reference.to_dict(),
            "sample_size": self.sample_size,
            "ks_statistic": self.ks_statistic,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "empirical_mean": self.empirical_mean,
            "empirical_variance": self.empirical_variance,
            "predicted": None if self.predicted is None else self.predicted.to_dict(),
            "mean_delta": self.mean_delta,
            "mean_standard_error": self.mean_standard_error,
            "mean_consistent": self.mean_consistent,
            "variance_delta": self.variance_delta,
            "verdict": self.verdict.value,
            "notes": list(self.notes),
        }


def empirical_moments(samples: Sequence[float]) -> tuple[float, float]:
    """Sample mean and unbiased sample variance."""
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ContractError(f"need at least 2 samples, got {x.size}")
    return float(x.mean()), float(x.var(ddof=1))


def ks_statistic(samples: Sequence[float], reference: DistributionSpec) -> float:
    """Two-sided Kolmogorov-Smirnov distance to ``reference``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    f = np.asarray(cdf(reference, np.maximum(x, 0.0)))
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_test(
    samples: Sequence[float], reference: DistributionSpec, alpha: float = DEFAULT_ALPHA
) -> GofReport:
    """One-sample KS test with the asymptotic Kolmogorov p-value."""
    x = np.asarray(samples, dtype=float)
    if x.size < 10:
        raise ContractError(f"KS test needs at least 10 samples, got {x.size}")
    d = ks_statistic(x, reference)
    p = float(np.clip(special.kolmogorov(math.sqrt(x.size) * d), 0.0, 1.0))
    mean, variance = empirical_moments(x)
    return GofReport(
        sample_size=int(x.size),
        ks_statistic=d,
        p_value=p,
        empirical_mean=mean,
        empirical_variance=variance,
        predicted=predicted_moments(reference),
        verdict=Verdict.REJECTED if p < alpha else Verdict.CONSISTENT,
        alpha=alpha,
        reference=reference,
    )


def hill_tail_index(samples: Sequence[float], k_top: int) -> float:
    """Hill estimate of the tail index from the ``k_top`` largest values.

    For a tail decaying like ``x**(-a)`` this converges to ``1/a``.
    """
    x = np.asarray(samples, dtype=float)
    if isinstance(k_top, bool) or int(k_top) != k_top or not 1 <= k_top < x.size:
        raise ContractError(f"k_top must be an integer in [1, {x.size - 1}], got {k_top}")
    if np.any(x <= 0):
        raise ContractError("Hill estimator needs positive samples")
    k = int(k_top)
    ordered = np.partition(x, x.size - k - 1)
    threshold = ordered[x.size - k - 1]
    return float(np.mean(np.log(ordered[x.size - k :] / threshold)))


def _compare_moments(report: GofReport, samples: np.ndarray) -> None:
    predicted = report.predicted
    if predicted is None:
        return
    if not isinstance(predicted.mean, Marker):
        se = math.sqrt(report.empirical_variance / samples.size)
        report.mean_delta = report.empirical_mean - predicted.mean
        report.mean_standard_error = se
        report.mean_consistent = abs(report.mean_delta) <= MEAN_TOLERANCE_SE * se
    if not isinstance(predicted.variance, Marker):
        report.variance_delta = report.empirical_variance - predicted.variance


def verify_theorem(
    params: ChainParams,
    schedule: HashrateSchedule,
    period: int,
    position: int,
    num_runs: int,
    seed: int,
    alpha: float = DEFAULT_ALPHA,
    reference: DistributionSpec | None = None,
) -> GofReport:
    """Check the simulated marginal of one blocktime against its predicted law.

    One blocktime is taken from each of ``num_runs`` independent chains so the
    KS samples are i.i.d. ``reference`` overrides the predicted law; it exists
    for negative controls.
    """
    if num_runs < MIN_VERDICT_SAMPLES:
        raise ContractError(f"need at least {MIN_VERDICT_SAMPLES} runs for a verdict, got {num_runs}")
    selector = BlockSelector(period, position)
    samples = run_ensemble(params, schedule, period, num_runs, seed, [selector])[selector]
    if reference is None:
        reference = predicted_blocktime(period, params, schedule)

    if reference is None:
        mean, variance = empirical_moments(samples)
        return GofReport(
            sample_size=int(samples.size),
            ks_statistic=None,
            p_value=None,
            empirical_mean=mean,
            empirical_variance=variance,
            predicted=None,
            verdict=Verdict.NOT_APPLICABLE,
            alpha=alpha,
            period=period,
            position=position,
            notes=[f"rule {params.rule.value!r} has no closed-form blocktime law"],
        )

    report = ks_test(samples, reference, alpha)
    report.period = period
    report.position = position
    _compare_moments(report, samples)
    return report
