"""Pattern frequencies and the four orthogonal contrasts of length-3 patterns.

For length 3 the six pattern probabilities carry four degrees of freedom:
they sum to one, and the frequencies of local minima (213, 312) and local
maxima (231, 132) balance.  Four contrasts span those degrees of freedom:

* ``beta``  (up-down balance)      p123 - p321
* ``tau``   (persistence)          p123 + p321 - 1/3
* ``gamma`` (rotational asymmetry) p213 + p231 - p132 - p312
* ``delta`` (up-down scaling)      p132 + p213 - p231 - p312

The turning rate ``alpha = 2/3 - tau`` is the relative frequency of local
extrema.  ``delta2`` is the squared Euclidean distance of the distribution
from the uniform (white-noise) point; it decomposes exactly as
``4*delta2 = 3*tau**2 + 2*beta**2 + gamma**2 + delta**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import NamedTuple

import numpy as np

from .errors import (
    AllWindowsTied,
    ConstraintViolation,
    DegenerateAtWhiteNoise,
    SeriesTooShort,
    WrongLength,
)
from .patterns import TiePolicy, WindowSpec, apply_jitter, as_time_series, window_codes

#: Lexicographic pattern order for m = 3, used for all 6-vectors.
PATTERNS_M3 = ("123", "132", "213", "231", "312", "321")

#: Exact length-3 pattern law of any symmetric random walk (delay 1, and
#: every delay for the self-similar Gaussian case).
RANDOM_WALK_PROBS_M3 = (0.25, 0.125, 0.125, 0.125, 0.125, 0.25)

_SUM_TOL = 1e-12
_BALANCE_TOL = 1e-12


def _balance(probs) -> float:
    """Signed imbalance p213 + p312 - p231 - p132 of a length-3 vector."""
    return float(probs[2] + probs[4] - probs[3] - probs[1])


@dataclass(frozen=True)
class PatternDistribution:
    """Probability vector over the m! patterns, in lexicographic order.

    ``kind`` is ``"model"`` for theoretical laws and ``"empirical"`` for
    frequencies estimated from a series.  Empirical distributions carry the
    window bookkeeping needed for exact-rational reporting and for the
    pre-limit form of the min/max balance constraint, which holds only up
    to one miscount per skipped window plus the boundary effect.
    """

    m: int
    probs: np.ndarray
    kind: str = "model"
    counts: np.ndarray | None = None
    n_windows: int | None = None
    n_skipped: int = 0
    series_length: int | None = None
    d: int | None = None

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64).copy()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if self.kind not in ("model", "empirical"):
            raise ValueError(f"kind must be 'model' or 'empirical', got {self.kind!r}")
        if probs.shape != (factorial(self.m),):
            raise ValueError(
                f"expected {factorial(self.m)} probabilities for m={self.m}, "
                f"got shape {probs.shape}"
            )
        if np.any(probs < -1e-15):
            raise ConstraintViolation("negative pattern probability")
        total = float(probs.sum())
        if abs(total - 1.0) > _SUM_TOL:
            raise ConstraintViolation(f"probabilities sum to {total!r}, not 1")
        if self.m == 3:
            tol = _BALANCE_TOL
            if self.kind == "empirical" and self.n_effective:
                if self.d is not None:
                    # At delay d the windows interleave d stride-d
                    # subsequences, each carrying a +-1 min/max boundary
                    # imbalance, and every skipped window can unbalance the
                    # counts by one more.  This bound is exact.
                    tol = (self.d + self.n_skipped) / self.n_effective + _BALANCE_TOL
                else:
                    # Independent draws (no window structure): only the
                    # root-n sampling fluctuation bounds the imbalance.
                    tol = 6.0 / math.sqrt(self.n_effective) + _BALANCE_TOL
            if abs(_balance(probs)) > tol:
                raise ConstraintViolation(
                    f"min/max balance violated: {_balance(probs)!r} (tol {tol!r})"
                )

    @property
    def n_effective(self) -> int | None:
        """Number of windows actually counted (after tie skipping)."""
        if self.n_windows is None:
            return None
        return self.n_windows - self.n_skipped

    def distance_to_uniform_sq(self) -> float:
        """Squared Euclidean distance from the uniform distribution."""
        return float(np.sum((self.probs - 1.0 / factorial(self.m)) ** 2))


def uniform_distribution(m: int) -> PatternDistribution:
    """The white-noise law: every pattern has probability 1/m!."""
    return PatternDistribution(m, np.full(factorial(m), 1.0 / factorial(m)))


def random_walk_distribution() -> PatternDistribution:
    """The exact length-3 law of a symmetric random walk."""
    return PatternDistribution(3, np.array(RANDOM_WALK_PROBS_M3))


def pattern_counts(
    x,
    m: int,
    d: int = 1,
    tie_policy: TiePolicy = "skip",
    jitter_seed: int | None = None,
):
    """Raw pattern counts of a series.

    Returns ``(counts, n_windows, n_skipped)`` where ``counts`` has one
    entry per lexicographic pattern index.
    """
    x = as_time_series(x)
    spec = WindowSpec(m, d)
    if tie_policy == "jitter":
        if jitter_seed is None:
            raise ValueError("tie_policy='jitter' requires an explicit jitter_seed")
        x = apply_jitter(x, jitter_seed)
    elif tie_policy != "skip":
        raise ValueError(f"unknown tie policy {tie_policy!r}")
    codes, ties = window_codes(x, spec.m, spec.d)
    n_windows = codes.shape[-1]
    valid = ~ties
    counts = np.bincount(codes[valid], minlength=factorial(m))
    return counts, n_windows, int(n_windows - valid.sum())


def pattern_frequencies(
    x,
    m: int,
    d: int = 1,
    tie_policy: TiePolicy = "skip",
    jitter_seed: int | None = None,
) -> PatternDistribution:
    """Relative pattern frequencies with tie-adapted denominator.

    The denominator is the number of windows, T - (m-1)d, minus the windows
    skipped because of ties.
    """
    x = as_time_series(x)
    counts, n_windows, n_skipped = pattern_counts(x, m, d, tie_policy, jitter_seed)
    denom = n_windows - n_skipped
    if denom == 0:
        raise AllWindowsTied("every window contains tied values")
    return PatternDistribution(
        m,
        counts / denom,
        kind="empirical",
        counts=counts,
        n_windows=n_windows,
        n_skipped=n_skipped,
        series_length=len(x),
        d=d,
    )


@dataclass(frozen=True)
class ContrastVector:
    """The four contrasts of one length-3 distribution plus derived values."""

    beta: float
    tau: float
    gamma: float
    delta: float
    alpha: float
    delta2: float

    def as_dict(self) -> dict[str, float]:
        return {
            "beta": self.beta,
            "tau": self.tau,
            "gamma": self.gamma,
            "delta": self.delta,
            "alpha": self.alpha,
            "delta2": self.delta2,
        }


def contrast_vector(dist: PatternDistribution) -> ContrastVector:
    """Evaluate the four contrasts on an m = 3 distribution."""
    if dist.m != 3:
        raise WrongLength(f"contrasts are defined for m=3, got m={dist.m}")
    p = dist.probs
    beta = float(p[0] - p[5])
    tau = float(p[0] + p[5] - 1.0 / 3.0)
    gamma = float(p[2] + p[3] - p[1] - p[4])
    delta = float(p[1] + p[2] - p[3] - p[4])
    return ContrastVector(
        beta=beta,
        tau=tau,
        gamma=gamma,
        delta=delta,
        alpha=2.0 / 3.0 - tau,
        delta2=dist.distance_to_uniform_sq(),
    )


def contrast_fractions(dist: PatternDistribution) -> dict[str, Fraction]:
    """Contrasts as exact rationals of counts (empirical distributions only)."""
    if dist.m != 3:
        raise WrongLength(f"contrasts are defined for m=3, got m={dist.m}")
    if dist.counts is None or not dist.n_effective:
        raise ValueError("exact contrasts need an empirical distribution with counts")
    n = dist.n_effective
    c = [Fraction(int(k), n) for k in dist.counts]
    beta = c[0] - c[5]
    tau = c[0] + c[5] - Fraction(1, 3)
    return {
        "beta": beta,
        "tau": tau,
        "gamma": c[2] + c[3] - c[1] - c[4],
        "delta": c[1] + c[2] - c[3] - c[4],
        "alpha": Fraction(2, 3) - tau,
    }


@dataclass(frozen=True)
class PythagorasDecomposition:
    """Exact split of 4*|p - p0|^2 into the four contrast components."""

    total: float
    tau_term: float
    beta_term: float
    gamma_term: float
    delta_term: float

    @property
    def component_sum(self) -> float:
        return self.tau_term + self.beta_term + self.gamma_term + self.delta_term

    @property
    def residual(self) -> float:
        return self.total - self.component_sum


def pythagoras_check(
    dist: PatternDistribution,
    reference: PatternDistribution,
    tol: float = 1e-9,
) -> PythagorasDecomposition:
    """Decompose the squared distance between two length-3 distributions.

    Both inputs must satisfy the normalization and min/max balance
    constraints to within ``tol``; otherwise the orthogonal decomposition
    picks up constraint components and the identity fails.
    """
    for which, d_ in (("dist", dist), ("reference", reference)):
        if d_.m != 3:
            raise WrongLength(f"{which} must have m=3, got m={d_.m}")
        if abs(_balance(d_.probs)) > tol:
            raise ConstraintViolation(
                f"{which} violates the min/max balance beyond tol={tol!r}"
            )
    a = contrast_vector(dist)
    b = contrast_vector(reference)
    diff = dist.probs - reference.probs
    return PythagorasDecomposition(
        total=float(4.0 * np.dot(diff, diff)),
        tau_term=3.0 * (a.tau - b.tau) ** 2,
        beta_term=2.0 * (a.beta - b.beta) ** 2,
        gamma_term=(a.gamma - b.gamma) ** 2,
        delta_term=(a.delta - b.delta) ** 2,
    )


class RelativeContributions(NamedTuple):
    beta: float
    tau: float
    gamma: float
    delta: float


def relative_contributions(dist: PatternDistribution) -> RelativeContributions:
    """Share of each contrast in the distance to white noise; sums to 1."""
    c = contrast_vector(dist)
    denom = 4.0 * c.delta2
    if denom == 0.0:
        raise DegenerateAtWhiteNoise("relative contributions undefined at the uniform point")
    return RelativeContributions(
        beta=2.0 * c.beta**2 / denom,
        tau=3.0 * c.tau**2 / denom,
        gamma=c.gamma**2 / denom,
        delta=c.delta**2 / denom,
    )


#: Minimum epoch length for sliding analysis.  Below a couple of hundred
#: samples the small integer counts distort the statistics.
MIN_EPOCH_LEN = 200


@dataclass(frozen=True)
class SlidingContrasts:
    """Per-epoch contrast tracks with a centered moving average of alpha.

    Epochs where more than half of the windows are tied or invalid are
    reported as missing (NaN) and flagged in ``valid``.  The moving average
    is truncated near the boundaries; ``smooth_counts`` records how many
    epochs actually entered each average so truncated edges are visible.
    """

    m: int
    d: int
    epoch_len: int
    hop: int
    smoothing_len: int
    starts: np.ndarray
    beta: np.ndarray
    tau: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    alpha: np.ndarray
    delta2: np.ndarray
    valid: np.ndarray
    alpha_smooth: np.ndarray
    smooth_counts: np.ndarray

    @property
    def n_epochs(self) -> int:
        return len(self.starts)


def sliding_contrast(
    x,
    epoch_len: int,
    hop: int,
    smoothing_len: int = 1,
    m: int = 3,
    d: int = 1,
    tie_policy: TiePolicy = "skip",
    jitter_seed: int | None = None,
) -> SlidingContrasts:
    """Contrast tracks over sliding epochs of a long series.

    ``hop`` equal to ``epoch_len`` reproduces a disjoint-epoch analysis;
    smaller hops give overlapping epochs, which combined with the moving
    average resolve slow modulation of the turning rate.
    """
    x = as_time_series(x)
    spec = WindowSpec(m, d)
    if epoch_len < MIN_EPOCH_LEN:
        raise ValueError(f"epoch_len must be >= {MIN_EPOCH_LEN}, got {epoch_len}")
    if epoch_len <= (m - 1) * d:
        raise ValueError("epoch_len too small for the window span")
    if hop < 1:
        raise ValueError(f"hop must be >= 1, got {hop}")
    if smoothing_len < 1:
        raise ValueError(f"smoothing_len must be >= 1, got {smoothing_len}")
    if len(x) < epoch_len:
        raise SeriesTooShort(
            f"series length {len(x)} shorter than one epoch of {epoch_len}"
        )
    if tie_policy == "jitter":
        if jitter_seed is None:
            raise ValueError("tie_policy='jitter' requires an explicit jitter_seed")
        x = apply_jitter(x, jitter_seed)

    codes, ties = window_codes(x, spec.m, spec.d)
    starts = np.arange(0, len(x) - epoch_len + 1, hop)
    n_epochs = len(starts)
    fields = {
        name: np.full(n_epochs, np.nan)
        for name in ("beta", "tau", "gamma", "delta", "alpha", "delta2")
    }
    valid = np.zeros(n_epochs, dtype=bool)
    windows_per_epoch = epoch_len - (m - 1) * d

    for i, s in enumerate(starts):
        sl = slice(s, s + windows_per_epoch)
        good = ~ties[sl]
        n_good = int(good.sum())
        if n_good <= windows_per_epoch // 2:
            continue
        counts = np.bincount(codes[sl][good], minlength=factorial(m))
        dist = PatternDistribution(
            m,
            counts / n_good,
            kind="empirical",
            counts=counts,
            n_windows=windows_per_epoch,
            n_skipped=windows_per_epoch - n_good,
            series_length=epoch_len,
            d=d,
        )
        c = contrast_vector(dist)
        for name in fields:
            fields[name][i] = getattr(c, name)
        valid[i] = True

    half_lo = (smoothing_len - 1) // 2
    half_hi = smoothing_len - 1 - half_lo
    alpha_smooth = np.full(n_epochs, np.nan)
    smooth_counts = np.zeros(n_epochs, dtype=np.int64)
    alpha = fields["alpha"]
    for i in range(n_epochs):
        window = alpha[max(0, i - half_lo) : min(n_epochs, i + half_hi + 1)]
        usable = window[~np.isnan(window)]
        smooth_counts[i] = len(usable)
        if len(usable):
            alpha_smooth[i] = usable.mean()

    return SlidingContrasts(
        m=m,
        d=d,
        epoch_len=epoch_len,
        hop=hop,
        smoothing_len=smoothing_len,
        starts=starts,
        valid=valid,
        alpha_smooth=alpha_smooth,
        smooth_counts=smooth_counts,
        **fields,
    )


def contrast_vs_delay(
    x,
    d_max: int,
    m: int = 3,
    tie_policy: TiePolicy = "skip",
    jitter_seed: int | None = None,
) -> list[ContrastVector]:
    """Contrasts as a function of the delay d = 1..d_max.

    The entry at position d-1 is the contrast vector of the length-3
    pattern frequencies at delay d.  Each delay is an independent pure
    computation, so the sweep parallelises trivially; results do not
    depend on evaluation order.
    """
    x = as_time_series(x)
    if m != 3:
        raise WrongLength(f"contrast sweep is defined for m=3, got m={m}")
    if d_max < 1:
        raise ValueError(f"d_max must be >= 1, got {d_max}")
    if len(x) <= (m - 1) * d_max:
        raise SeriesTooShort(
            f"need more than {(m - 1) * d_max} samples for d_max={d_max}, got {len(x)}"
        )
    return [
        contrast_vector(pattern_frequencies(x, m, d, tie_policy, jitter_seed))
        for d in range(1, d_max + 1)
    ]
