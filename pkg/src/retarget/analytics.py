"""Closed-form blocktime laws: densities, CDFs, quantiles and moments.

Three families appear in the model:

* exponential(rate) -- blocktimes in the first period, and conditionally on
  the period rate afterwards;
* erlang(shape N, rate theta) -- the law of a period's rate, and of a
  period's duration given its rate;
* lomax(shape N, scale theta) -- the marginal blocktime law after the first
  period, i.e. an exponential whose rate is Erlang(N, theta) distributed.

All functions accept scalars or numpy arrays for the evaluation point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import special

from retarget.errors import DomainError
from retarget.model import ChainParams, HashrateSchedule, theta


class Family(str, enum.Enum):
    EXPONENTIAL = "exponential"
    ERLANG = "erlang"
    LOMAX = "lomax"


class Marker(str, enum.Enum):
    """Stand-in for a moment that is not a finite number."""

    INFINITE = "infinite"
    UNDEFINED = "undefined"


Moment = Union[float, Marker]

QUANTILE_U_TOL = 1e-13
QUANTILE_MAX_ITER = 200


@dataclass(frozen=True)
class DistributionSpec:
    family: Family
    rate_or_scale: float
    shape: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if not (math.isfinite(self.rate_or_scale) and self.rate_or_scale > 0):
            raise DomainError(f"rate/scale must be positive, got {self.rate_or_scale}")
        if self.family is Family.EXPONENTIAL:
            if self.shape is not None:
                raise DomainError("exponential distribution takes no shape")
        elif self.shape is None or int(self.shape) != self.shape or self.shape < 1:
            raise DomainError(f"shape must be a positive integer, got {self.shape}")
        else:
            object.__setattr__(self, "shape", int(self.shape))

    @classmethod
    def exponential(cls, rate: float) -> DistributionSpec:
        return cls(Family.EXPONENTIAL, rate)

    @classmethod
    def erlang(cls, shape: int, rate: float) -> DistributionSpec:
        return cls(Family.ERLANG, rate, shape)

    @classmethod
    def lomax(cls, shape: int, scale: float) -> DistributionSpec:
        return cls(Family.LOMAX, scale, shape)

    def to_dict(self) -> dict:
        return {"family": self.family.value, "rate_or_scale": self.rate_or_scale, "shape": self.shape}

    def __str__(self) -> str:
        if self.family is Family.EXPONENTIAL:
            return f"exponential({self.rate_or_scale:g})"
        return f"{self.family.value}({self.shape}, {self.rate_or_scale:g})"


@dataclass(frozen=True)
class MomentReport:
    mean: Moment
    variance: Moment

    def to_dict(self) -> dict:
        return {"mean": _moment_json(self.mean), "variance": _moment_json(self.variance)}


def _moment_json(value: Moment):
    return value.value if isinstance(value, Marker) else value


def _support(x):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError("evaluation point must be non-negative")
    return arr


def _out(values, x):
    return float(values) if np.ndim(x) == 0 else values


def pdf(spec: DistributionSpec, x):
    """Probability density at ``x >= 0``."""
    arr = _support(x)
    lam = spec.rate_or_scale
    if spec.family is Family.EXPONENTIAL:
        values = lam * np.exp(-lam * arr)
    elif spec.family is Family.LOMAX:
        n = spec.shape
        # N theta^N / (x + theta)^(N+1) without forming theta^N
        values = n / (arr + lam) * np.exp(-n * np.log1p(arr / lam))
    else:
        n = spec.shape
        log_density = n * math.log(lam) + special.xlogy(n - 1, arr) - lam * arr - special.gammaln(n)
        values = np.exp(log_density)
    return _out(values, x)


def _erlang_cdf(n: int, rate: float, x: np.ndarray) -> np.ndarray:
    """Erlang CDF from the finite Poisson sum, evaluated in log space.

    Below the mode region (``rate*x < n``) the lower tail
    ``sum_{j>=n} e^-y y^j/j!`` is summed directly so small probabilities keep
    full relative precision; otherwise ``1 - sum_{j<n} e^-y y^j/j!``.
    """
    y = np.atleast_1d(rate * x).astype(float)
    result = np.zeros_like(y)
    positive = y > 0
    lower = positive & (y < n)
    upper = positive & ~lower

    if np.any(lower):
        yl = y[lower]
        term = np.exp(-yl + n * np.log(yl) - special.gammaln(n + 1))
        total = term.copy()
        j = n
        while True:
            j += 1
            term = term * yl / j
            total += term
            if np.all(term <= 1e-17 * total):
                break
        result[lower] = total

    if np.any(upper):
        yu = y[upper]
        term = np.exp(-yu + (n - 1) * np.log(yu) - special.gammaln(n))
        total = term.copy()
        for j in range(n - 1, 0, -1):
            term = term * j / yu
            total += term
            if np.all(term <= 1e-17 * total):
                break
        result[upper] = 1.0 - total

    return np.clip(result, 0.0, 1.0)


def cdf(spec: DistributionSpec, x):
    """Cumulative distribution function at ``x >= 0``."""
    arr = _support(x)
    lam = spec.rate_or_scale
    if spec.family is Family.EXPONENTIAL:
        values = -np.expm1(-lam * arr)
    elif spec.family is Family.LOMAX:
        values = -np.expm1(-spec.shape * np.log1p(arr / lam))
    else:
        values = _erlang_cdf(spec.shape, lam, arr).reshape(arr.shape)
    return _out(values, x)


def _erlang_quantile(n: int, rate: float, u: np.ndarray) -> np.ndarray:
    """Safeguarded Newton iteration inside a shrinking bisection bracket.

    Every step keeps ``cdf(lo) < u <= cdf(hi)``; a Newton step leaving the
    bracket is replaced by the midpoint, so convergence is guaranteed.
    """
    spec = DistributionSpec.erlang(n, rate)
    u = np.atleast_1d(u).astype(float)
    lo = np.zeros_like(u)
    hi = np.full_like(u, n / rate)
    while np.any(short := np.asarray(cdf(spec, hi)) < u):
        hi = np.where(short, 2.0 * hi, hi)
    x = 0.5 * (lo + hi)
    active = u > 0
    for _ in range(QUANTILE_MAX_ITER):
        if not np.any(active):
            break
        f = np.asarray(cdf(spec, x[active])) - u[active]
        below = f < 0
        lo[active] = np.where(below, x[active], lo[active])
        hi[active] = np.where(below, hi[active], x[active])
        density = np.asarray(pdf(spec, x[active]))
        with np.errstate(divide="ignore", invalid="ignore"):
            step = x[active] - f / density
        inside = np.isfinite(step) & (step > lo[active]) & (step < hi[active])
        done = (np.abs(f) <= QUANTILE_U_TOL) | (hi[active] - lo[active] <= 4 * np.finfo(float).eps * hi[active])
        x[active] = np.where(done, x[active], np.where(inside, step, 0.5 * (lo[active] + hi[active])))
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    x[u == 0] = 0.0
    return x


def quantile(spec: DistributionSpec, u):
    """Inverse CDF for ``u`` in ``[0, 1)``."""
    arr = np.asarray(u, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0) or np.any(arr >= 1):
        raise DomainError("probability must lie in [0, 1)")
    lam = spec.rate_or_scale
    if spec.family is Family.EXPONENTIAL:
        values = -np.log1p(-arr) / lam
    elif spec.family is Family.LOMAX:
        values = lam * np.expm1(-np.log1p(-arr) / spec.shape)
    else:
        values = _erlang_quantile(spec.shape, lam, arr.ravel()).reshape(arr.shape)
    return _out(values, u)


def predicted_moments(spec: DistributionSpec) -> MomentReport:
    """Mean and variance, with markers where they are not finite."""
    lam = spec.rate_or_scale
    if spec.family is Family.EXPONENTIAL:
        return MomentReport(1.0 / lam, 1.0 / lam**2)
    n = spec.shape
    if spec.family is Family.ERLANG:
        return MomentReport(n / lam, n / lam**2)
    if n == 1:
        return MomentReport(Marker.UNDEFINED, Marker.UNDEFINED)
    mean = lam / (n - 1)
    if n == 2:
        return MomentReport(mean, Marker.INFINITE)
    return MomentReport(mean, lam**2 * n / ((n - 1) ** 2 * (n - 2)))


def predicted_blocktime(
    period_index: int, params: ChainParams, schedule: HashrateSchedule
) -> DistributionSpec | None:
    """Marginal law of any blocktime in period ``period_index``.

    The first period is exponential with the initial rate. Later periods are
    Lomax under the ideal and corrected rules; the clamped and bitcoin_bug
    rules have no closed form and give ``None``.
    """
    if period_index < 1:
        raise DomainError(f"period index must be >= 1, got {period_index}")
    if period_index == 1:
        return DistributionSpec.exponential(schedule.rate(1) / params.difficulty_for(schedule))
    if not params.rule.has_closed_form:
        return None
    return DistributionSpec.lomax(params.period_length, theta(period_index, schedule, params))


def estimate_hashrate(difficulty: float, period_blocktimes: Sequence[float]) -> float:
    """Hashrate that makes ``N`` blocks at ``difficulty`` take the observed time."""
    times = np.asarray(period_blocktimes, dtype=float)
    if times.size == 0:
        raise DomainError("need at least one blocktime")
    total = float(times.sum())
    if not (math.isfinite(total) and total > 0):
        raise DomainError("blocktimes must sum to a positive finite value")
    return times.size * difficulty / total
