"""Random orders on the positive integers, without numeric values.

A random order of m objects is a probability measure on the m! patterns.
Everything here is exact: probabilities are rationals, and the three core
constructions are

* interval coding, a numeration system that maps each pattern to a
  subinterval of [0, 1] of length 1/m!, nested along pattern prefixes, so
  that orders of infinitely many objects correspond to points of [0, 1];
* consistency and stationarity checks for towers P_2, P_3, ... of pattern
  measures (prefix marginals match, and contiguous sub-pattern laws are
  shift invariant);
* the Markov extension, which lifts any stationary measure on S_m to a
  stationary measure on S_{m+1}:

      P(pi) = P(pattern of pi_1..pi_m) * P(pattern of pi_2..pi_{m+1})
              / P(first m-1 positions show pattern of pi_2..pi_m),

  with the value halved and shared between pi and pi' = pi_{m+1} pi_2 ...
  pi_m pi_1 when pi_1 and pi_{m+1} are neighbouring ranks, because the
  right-hand side cannot distinguish the two.  Extending the fair coin law
  on S_2 this way reproduces the coin-tossing order at every length.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence

from .errors import (
    ConstraintViolation,
    NonStationaryInput,
    SizeLimit,
    ZeroDenominator,
)
from .patterns import Pattern, lex_index, ranks_from_lex, ranks_of

#: Tolerance used by the consistency and stationarity checks.  Exact
#: rational inputs either pass with violation 0 or fail outright; the
#: tolerance only matters for measures converted from floats.
CHECK_TOL = Fraction(1, 10**12)

#: Largest pattern length reachable by iterated extension.
MAX_EXTENSION_LENGTH = 8


def _as_fraction(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(value)  # exact binary expansion of the float
    return Fraction(value)


def _pattern_ranks(pattern) -> tuple[int, ...]:
    """Representing permutation of a pattern, a window, or a Pattern object."""
    if isinstance(pattern, Pattern):
        return pattern.ranks
    return ranks_of(pattern)


@dataclass(frozen=True)
class PatternMeasure:
    """Exact probability measure on the patterns of length m."""

    m: int
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(_as_fraction(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if len(probs) != factorial(self.m):
            raise ValueError(
                f"expected {factorial(self.m)} probabilities for m={self.m}, "
                f"got {len(probs)}"
            )
        if any(p < 0 for p in probs):
            raise ConstraintViolation("negative probability")
        if sum(probs) != 1:
            raise ConstraintViolation(f"probabilities sum to {sum(probs)}, not 1")

    def prob(self, pattern) -> Fraction:
        """Probability of a pattern given as ranks, window values, or Pattern."""
        ranks = _pattern_ranks(pattern)
        if len(ranks) != self.m:
            raise ValueError(f"pattern has length {len(ranks)}, measure has m={self.m}")
        return self.probs[lex_index(ranks)]

    def full_support(self) -> bool:
        return all(p > 0 for p in self.probs)


def uniform_measure(m: int) -> PatternMeasure:
    """The white-noise measure: 1/m! on every pattern."""
    return PatternMeasure(m, (Fraction(1, factorial(m)),) * factorial(m))


def point_mass(ranks: Sequence[int]) -> PatternMeasure:
    """The measure concentrated on a single pattern."""
    ranks = tuple(ranks)
    m = len(ranks)
    probs = [Fraction(0)] * factorial(m)
    probs[lex_index(ranks)] = Fraction(1)
    return PatternMeasure(m, tuple(probs))


# ---------------------------------------------------------------------------
# Interval coding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderInterval:
    """The subinterval of [0, 1] coding one pattern of length m.

    Intervals are half open, [left, left + 1/m!), except that the last one
    is closed at 1; this resolves the two possible readings of interval
    endpoints the same way terminating decimals resolve 0.4999... = 0.5.
    """

    left: Fraction
    m: int

    @property
    def length(self) -> Fraction:
        return Fraction(1, factorial(self.m))

    @property
    def right(self) -> Fraction:
        return self.left + self.length

    def contains(self, x) -> bool:
        x = _as_fraction(x)
        if self.right == 1:
            return self.left <= x <= 1
        return self.left <= x < self.right


def interval_digits(pattern) -> tuple[int, ...]:
    """The digits r_2, ..., r_m: r_k counts earlier positions ranked above k."""
    ranks = _pattern_ranks(pattern)
    return tuple(
        sum(1 for j in range(k) if ranks[j] > ranks[k]) for k in range(1, len(ranks))
    )


def interval_of(pattern) -> OrderInterval:
    """Interval coding of a pattern (or of a tie-free numeric window).

    The left endpoint is sum(r_k / k!) over k = 2..m; prefixes of a pattern
    are coded by nested, successively shorter intervals.
    """
    ranks = _pattern_ranks(pattern)
    digits = interval_digits(ranks)
    left = sum(
        (Fraction(r, factorial(k)) for k, r in enumerate(digits, start=2)),
        Fraction(0),
    )
    return OrderInterval(left=left, m=len(ranks))


def interval_rank(pattern) -> int:
    """Position of the pattern's interval inside [0, 1], from 0 to m!-1."""
    ranks = _pattern_ranks(pattern)
    m = len(ranks)
    return sum(
        r * (factorial(m) // factorial(k))
        for k, r in enumerate(interval_digits(ranks), start=2)
    )


@dataclass(frozen=True)
class OrderHistogram:
    """Step density on [0, 1] representing a pattern measure.

    The value over the interval of pattern pi is m! * P(pi), so each
    rectangle has area P(pi) and the total integral is exactly 1.
    """

    m: int
    heights: tuple[Fraction, ...]  # indexed by interval position

    def __call__(self, x) -> Fraction:
        x = _as_fraction(x)
        if not 0 <= x <= 1:
            raise ValueError(f"x must lie in [0, 1], got {x}")
        idx = min(int(x * factorial(self.m)), factorial(self.m) - 1)
        return self.heights[idx]

    def integral(self) -> Fraction:
        return sum(self.heights, Fraction(0)) / factorial(self.m)

    def integral_over(self, interval: OrderInterval) -> Fraction:
        """Exact integral of the step density over a coding interval."""
        mf = factorial(self.m)
        lo = interval.left * mf
        hi = interval.right * mf
        if lo.denominator != 1 or hi.denominator != 1:
            raise ValueError("interval endpoints must align with the m! grid")
        return sum(self.heights[int(lo) : int(hi)], Fraction(0)) / mf


def histogram(measure: PatternMeasure) -> OrderHistogram:
    """Histogram of a pattern measure over the interval coding."""
    mf = factorial(measure.m)
    heights = [Fraction(0)] * mf
    for idx in range(mf):
        ranks = ranks_from_lex(measure.m, idx)
        heights[interval_rank(ranks)] = mf * measure.probs[idx]
    return OrderHistogram(m=measure.m, heights=tuple(heights))


# ---------------------------------------------------------------------------
# Marginals, consistency, stationarity
# ---------------------------------------------------------------------------


def restrict(measure: PatternMeasure, positions: Iterable[int]) -> PatternMeasure:
    """Marginal law of the sub-pattern at the given (0-based) positions."""
    pos = sorted(set(int(p) for p in positions))
    if not pos:
        raise ValueError("positions must be non-empty")
    if pos[0] < 0 or pos[-1] >= measure.m:
        raise ValueError(f"positions {pos} out of range for m={measure.m}")
    k = len(pos)
    acc = [Fraction(0)] * factorial(k)
    for idx in range(factorial(measure.m)):
        p = measure.probs[idx]
        if p == 0:
            continue
        ranks = ranks_from_lex(measure.m, idx)
        sub = ranks_of([ranks[i] for i in pos])
        acc[lex_index(sub)] += p
    return PatternMeasure(k, tuple(acc))


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    max_violation: Fraction

    def __bool__(self) -> bool:
        return self.ok


def check_consistency(measure: PatternMeasure, extension: PatternMeasure) -> CheckResult:
    """Does the first-m marginal of the (m+1)-measure reproduce the m-measure?"""
    if extension.m != measure.m + 1:
        raise ValueError(
            f"extension must have length {measure.m + 1}, got {extension.m}"
        )
    marginal = restrict(extension, range(measure.m))
    violation = max(
        (abs(a - b) for a, b in zip(marginal.probs, measure.probs)),
        default=Fraction(0),
    )
    return CheckResult(ok=violation <= CHECK_TOL, max_violation=violation)


def check_stationarity(measure: PatternMeasure) -> CheckResult:
    """Are all contiguous sub-pattern laws shift invariant?

    For every k < m the law of the sub-pattern at positions t..t+k-1 must
    not depend on t.
    """
    worst = Fraction(0)
    for k in range(2, measure.m):
        base = restrict(measure, range(k))
        for t in range(1, measure.m - k + 1):
            shifted = restrict(measure, range(t, t + k))
            for a, b in zip(base.probs, shifted.probs):
                worst = max(worst, abs(a - b))
    return CheckResult(ok=worst <= CHECK_TOL, max_violation=worst)


# ---------------------------------------------------------------------------
# Markov extension
# ---------------------------------------------------------------------------


def markov_extension(measure: PatternMeasure, validate: bool = True) -> PatternMeasure:
    """Extend a stationary measure on S_m to a stationary measure on S_{m+1}.

    The denominator is the probability, under the input measure, that the
    first m-1 of m positions show the inner pattern; by stationarity this
    equals the last-(m-1) marginal, which in turn dominates the second
    numerator factor, so a positive numerator can never meet a zero
    denominator (:class:`ZeroDenominator` is a defensive guard).  Zero
    numerators contribute zero regardless of the denominator, the limit
    convention of the formula.

    The output is verified to be normalized, consistent with the input and
    stationary before it is returned.
    """
    m = measure.m
    if m < 2:
        raise ValueError("extension needs m >= 2")
    if validate:
        st = check_stationarity(measure)
        if not st.ok:
            raise NonStationaryInput(
                f"input measure is not stationary (max violation {st.max_violation})"
            )
    inner_marginal = restrict(measure, range(m - 1))  # first m-1 of m positions

    out = [Fraction(0)] * factorial(m + 1)
    for idx in range(factorial(m + 1)):
        pi = ranks_from_lex(m + 1, idx)
        head = measure.probs[lex_index(ranks_of(pi[:m]))]
        if head == 0:
            continue
        tail = measure.probs[lex_index(ranks_of(pi[1:]))]
        if tail == 0:
            continue
        kappa = ranks_of(pi[1:m])
        denom = inner_marginal.probs[lex_index(kappa)]
        if denom == 0:
            raise ZeroDenominator(
                f"zero marginal for inner pattern {kappa} with positive numerator"
            )
        value = head * tail / denom
        if abs(pi[0] - pi[m]) == 1:
            value /= 2
        out[idx] = value

    extension = PatternMeasure(m + 1, tuple(out))
    if validate:
        cons = check_consistency(measure, extension)
        stat = check_stationarity(extension)
        if not (cons.ok and stat.ok):
            raise ConstraintViolation(
                "extension failed verification: "
                f"consistency violation {cons.max_violation}, "
                f"stationarity violation {stat.max_violation}"
            )
    return extension


def extend_to(measure: PatternMeasure, target_length: int, validate: bool = True) -> PatternMeasure:
    """Iterate the Markov extension up to patterns of ``target_length``."""
    if target_length > MAX_EXTENSION_LENGTH:
        raise SizeLimit(
            f"iterated extension supports target lengths <= {MAX_EXTENSION_LENGTH}"
        )
    if target_length < measure.m:
        raise ValueError("target length is below the measure's length")
    current = measure
    while current.m < target_length:
        current = markov_extension(current, validate=validate)
    return current


# ---------------------------------------------------------------------------
# Exact coin-tossing measure (rational twin of processes.coin_tossing_distribution)
# ---------------------------------------------------------------------------


def coin_tossing_measure(m: int) -> PatternMeasure:
    """The coin-tossing pattern law with probabilities as exact Fractions.

    Enumerates all m! patterns, so it is kept to m <= 8; the float variant
    in :mod:`ordpat.processes` reaches m = 10.
    """
    from .processes import u_energy  # local import keeps orders import-light

    if m > MAX_EXTENSION_LENGTH:
        raise SizeLimit(f"exact measure supports m <= {MAX_EXTENSION_LENGTH}")
    probs = [
        Fraction(1, 2 ** u_energy(ranks_from_lex(m, idx))) for idx in range(factorial(m))
    ]
    return PatternMeasure(m, tuple(probs))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

MEASURE_FORMAT_VERSION = "pattern-measure-v1"


def serialize_measure(measure: PatternMeasure) -> str:
    """Render a measure in the versioned exact-rational text format.

    Layout: ``pattern-measure-v1; m; index:numerator/denominator; ...``
    with one entry per pattern of positive probability (omitted entries are
    zero), ordered by lexicographic index.
    """
    entries = [
        f"{idx}:{p.numerator}/{p.denominator}"
        for idx, p in enumerate(measure.probs)
        if p != 0
    ]
    return "; ".join([MEASURE_FORMAT_VERSION, str(measure.m)] + entries)


def parse_measure(text: str) -> PatternMeasure:
    """Inverse of :func:`serialize_measure`."""
    parts = [p.strip() for p in text.strip().split(";")]
    if not parts or parts[0] != MEASURE_FORMAT_VERSION:
        raise ValueError(f"expected {MEASURE_FORMAT_VERSION!r} header")
    if len(parts) < 2:
        raise ValueError("missing pattern length")
    m = int(parts[1])
    probs = [Fraction(0)] * factorial(m)
    for entry in parts[2:]:
        if not entry:
            continue
        idx_s, frac_s = entry.split(":")
        num_s, den_s = frac_s.split("/")
        probs[int(idx_s)] = Fraction(int(num_s), int(den_s))
    return PatternMeasure(m, tuple(probs))
