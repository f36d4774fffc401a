"""Seedable random variates for the blocktime model and its oracles.

Every stream is a PCG64 generator keyed by ``(seed, stream_id)`` through
``numpy.random.SeedSequence``, so ensemble member ``m`` never shares state
with member ``m + 1`` and adding members leaves existing ones untouched.
"""

from __future__ import annotations

import numpy as np

from retarget.errors import DomainError

# product-of-uniforms Erlang up to this shape, gamma variates above
ERLANG_PRODUCT_MAX_SHAPE = 64


class RngHandle:
    """Deterministic random stream identified by ``(seed, stream_id)``.

    Not safe to share between threads; give each worker its own handle.
    """

    def __init__(self, seed: int = 0, stream_id: int = 0) -> None:
        if seed < 0 or stream_id < 0:
            raise DomainError("seed and stream_id must be non-negative")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def __repr__(self) -> str:
        return f"RngHandle(seed={self.seed}, stream_id={self.stream_id})"

    def uniform_open_closed(self, size=None):
        """Uniform draws on ``(0, 1]``."""
        return 1.0 - self.generator.random(size)

    def uniform_closed_open(self, size=None):
        """Uniform draws on ``[0, 1)``."""
        return self.generator.random(size)

    def standard_exponential(self, size=None):
        """``-ln(u)`` with ``u`` on ``(0, 1]``."""
        return -np.log(self.uniform_open_closed(size))


def exponential_from_uniform(u, rate: float):
    """Inverse transform ``-ln(u) / rate`` for ``u`` in ``(0, 1]``."""
    return -np.log(u) / rate


def lomax_from_uniform(u, shape: int, scale: float):
    """Lomax quantile ``scale * ((1 - u)**(-1/shape) - 1)`` for ``u`` in ``[0, 1)``."""
    return scale * np.expm1(-np.log1p(-np.asarray(u, dtype=float)) / shape)


def _check_positive(name: str, value: float) -> None:
    if not (np.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be positive and finite, got {value}")


def _check_shape(shape: int) -> None:
    if isinstance(shape, bool) or int(shape) != shape or shape < 1:
        raise DomainError(f"shape must be a positive integer, got {shape}")


def _scalar(x, size):
    return float(x) if size is None else x


def sample_exponential(rate: float, rng: RngHandle, size=None):
    """Exp(``rate``) variates."""
    _check_positive("rate", rate)
    return _scalar(exponential_from_uniform(rng.uniform_open_closed(size), rate), size)


def sample_erlang(shape: int, rate: float, rng: RngHandle, size=None):
    """Erlang(``shape``, ``rate``) variates: sums of ``shape`` Exp(``rate``) draws."""
    _check_shape(shape)
    _check_positive("rate", rate)
    shape = int(shape)
    if shape <= ERLANG_PRODUCT_MAX_SHAPE:
        # -ln(prod u) evaluated as a sum of logs so the product cannot underflow
        draws_shape = (shape,) if size is None else tuple(np.atleast_1d(size)) + (shape,)
        total = -np.log(rng.uniform_open_closed(draws_shape)).sum(axis=-1)
    else:
        total = rng.generator.standard_gamma(shape, size)
    return _scalar(total / rate, size)


def sample_lomax(shape: int, scale: float, rng: RngHandle, size=None):
    """Lomax(``shape``, ``scale``) variates by inverse transform.

    Serves as the independent oracle for the two-stage Erlang-then-exponential
    construction that the simulator realizes.
    """
    _check_shape(shape)
    _check_positive("scale", scale)
    return _scalar(lomax_from_uniform(rng.uniform_closed_open(size), int(shape), scale), size)


def sample_geometric(success_probability: float, rng: RngHandle, size=None):
    """Number of Bernoulli trials up to and including the first success."""
    p = success_probability
    if not (0 < p <= 1):
        raise DomainError(f"success probability must lie in (0, 1], got {p}")
    draws = rng.generator.geometric(p, size)
    return int(draws) if size is None else draws
