"""Permutation entropy, its quadratic approximation, and the Z statistic."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, log

import numpy as np
from scipy.special import xlogy

from .contrasts import PatternDistribution, pattern_frequencies
from .errors import SeriesTooShort
from .patterns import TiePolicy, as_time_series

#: Shortest series accepted by the Z statistic; below this, pattern counts
#: are small integers and the distribution of Z becomes visibly discrete.
MIN_SERIES_LEN = 200

#: Multiply nats by this to get bits.
NATS_TO_BITS = 1.0 / log(2.0)


@dataclass(frozen=True)
class EntropyReport:
    """Entropy of a pattern distribution, in nats.

    ``deviation`` is h_max - h, the distance below the white-noise maximum.
    ``taylor_deviation = (m!/2) * delta2`` is its second-order approximation
    near the uniform distribution.  ``z = T * deviation`` is filled only
    when the report comes from a series; T is the series length (effective
    window count plus (m-1)d), not the window count.
    """

    m: int
    h: float
    h_max: float
    deviation: float
    taylor_deviation: float
    z: float | None = None
    series_length: int | None = None


def permutation_entropy(dist: PatternDistribution) -> EntropyReport:
    """Shannon entropy -sum(p log p) of the pattern distribution, natural log."""
    h = float(-np.sum(xlogy(dist.probs, dist.probs)))
    h_max = log(factorial(dist.m))
    return EntropyReport(
        m=dist.m,
        h=h,
        h_max=h_max,
        deviation=h_max - h,
        taylor_deviation=0.5 * factorial(dist.m) * dist.distance_to_uniform_sq(),
    )


def taylor_entropy(dist: PatternDistribution) -> float:
    """Quadratic approximation log m! - (m!/2) * delta2 of the entropy."""
    return log(factorial(dist.m)) - 0.5 * factorial(dist.m) * dist.distance_to_uniform_sq()


def z_statistic(
    x,
    m: int,
    d: int = 1,
    tie_policy: TiePolicy = "skip",
    jitter_seed: int | None = None,
) -> EntropyReport:
    """Scaled entropy deviation Z = T * (h_max - h) of a series.

    T is the series length convention: effective window count + (m-1)d,
    which equals the raw length when no window is tied.
    """
    x = as_time_series(x)
    if len(x) < MIN_SERIES_LEN:
        raise SeriesTooShort(f"Z statistic needs at least {MIN_SERIES_LEN} samples")
    dist = pattern_frequencies(x, m, d, tie_policy, jitter_seed)
    report = permutation_entropy(dist)
    t_eff = dist.n_effective + (m - 1) * d
    return EntropyReport(
        m=report.m,
        h=report.h,
        h_max=report.h_max,
        deviation=report.deviation,
        taylor_deviation=report.taylor_deviation,
        z=t_eff * report.deviation,
        series_length=t_eff,
    )
