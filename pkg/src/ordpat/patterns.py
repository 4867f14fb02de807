"""Order patterns of short windows: rank coding, extraction, index codec.

A window of m distinct values is summarised by its pattern: the tuple of
ranks (pi_1, ..., pi_m) where pi_k is the number of window values that are
less than or equal to the k-th one.  A window read left to right on the
time axis therefore carries the same digits as the permutation it shows,
e.g. the window (1, 2, 0) shows the pattern 231.  Patterns are identified
with permutations of {1..m} and ordered lexicographically, which gives the
canonical integer encoding used throughout the package
(123 -> 0, 132 -> 1, 213 -> 2, 231 -> 3, 312 -> 4, 321 -> 5 for m = 3).

Windows containing equal values have no pattern.  The default policy skips
them and the frequency denominator is adapted accordingly; alternatively a
deterministic, seeded jitter of relative magnitude 1e-9 can be added to
break ties.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Literal, Sequence

import numpy as np

from .errors import SeriesTooShort, TieError

TiePolicy = Literal["skip", "jitter"]

#: Placeholder returned by :func:`extract_patterns` for windows dropped by
#: the ``skip`` tie policy.
SKIPPED = None

#: Longest window length supported for time-series pattern extraction.
#: Estimates for longer patterns are unreliable at realistic sample sizes.
MAX_WINDOW_LENGTH = 6

#: Relative amplitude of the tie-breaking jitter.
JITTER_SCALE = 1e-9


def as_time_series(values) -> np.ndarray:
    """Validate and convert ``values`` to a 1-d float64 array.

    Rejects NaN and infinity at ingestion.
    """
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-d series, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise ValueError(f"non-finite value at position {bad}")
    return x


def ranks_of(values: Sequence) -> tuple[int, ...]:
    """Ranks of a tie-free window: rank_k = #{j : values_j <= values_k}.

    Works for windows of any length; raises :class:`TieError` when two
    entries are exactly equal.
    """
    vals = list(values)
    m = len(vals)
    ranks = []
    for k in range(m):
        r = 0
        for j in range(m):
            if vals[j] == vals[k] and j != k:
                raise TieError(f"equal values at positions {j} and {k}")
            if vals[j] <= vals[k]:
                r += 1
        ranks.append(r)
    return tuple(ranks)


def lex_index(ranks: Sequence[int]) -> int:
    """Lexicographic index of a rank tuple among all m! patterns."""
    m = len(ranks)
    idx = 0
    for k in range(m - 1):
        smaller_later = sum(1 for j in range(k + 1, m) if ranks[j] < ranks[k])
        idx += smaller_later * factorial(m - 1 - k)
    return idx


def ranks_from_lex(m: int, index: int) -> tuple[int, ...]:
    """Inverse of :func:`lex_index`: the rank tuple at position ``index``."""
    if not 0 <= index < factorial(m):
        raise ValueError(f"index {index} out of range for m={m}")
    available = list(range(1, m + 1))
    out = []
    rest = index
    for k in range(m, 0, -1):
        i, rest = divmod(rest, factorial(k - 1))
        out.append(available.pop(i))
    return tuple(out)


def all_rank_tuples(m: int):
    """All rank tuples of length m in lexicographic order."""
    return (ranks_from_lex(m, i) for i in range(factorial(m)))


@dataclass(frozen=True)
class Pattern:
    """An order pattern: a bijection of {1..m} read along the time axis."""

    ranks: tuple[int, ...]

    def __post_init__(self):
        ranks = tuple(int(r) for r in self.ranks)
        object.__setattr__(self, "ranks", ranks)
        m = len(ranks)
        if not 2 <= m <= MAX_WINDOW_LENGTH:
            raise ValueError(f"pattern length must be in 2..{MAX_WINDOW_LENGTH}, got {m}")
        if sorted(ranks) != list(range(1, m + 1)):
            raise ValueError(f"ranks {ranks} are not a bijection of 1..{m}")

    @property
    def m(self) -> int:
        return len(self.ranks)

    @property
    def index(self) -> int:
        """Lexicographic index in 0..m!-1; round-trips with the ranks."""
        return lex_index(self.ranks)

    @classmethod
    def from_index(cls, m: int, index: int) -> "Pattern":
        return cls(ranks_from_lex(m, index))

    @classmethod
    def from_values(cls, values: Sequence) -> "Pattern":
        return cls(ranks_of(values))

    def reverse(self) -> "Pattern":
        """Time reversal: the rank sequence read backwards."""
        return Pattern(self.ranks[::-1])

    def invert(self) -> "Pattern":
        """Functional inverse of the permutation (the other notation
        convention, where digits are read along the value axis)."""
        inv = [0] * self.m
        for pos, r in enumerate(self.ranks, start=1):
            inv[r - 1] = pos
        return Pattern(tuple(inv))

    def __str__(self) -> str:
        return "".join(str(r) for r in self.ranks)


def reverse_pattern(p: Pattern) -> Pattern:
    return p.reverse()


def invert_pattern(p: Pattern) -> Pattern:
    return p.invert()


@dataclass(frozen=True)
class WindowSpec:
    """Window geometry: pattern length m and delay d between samples."""

    m: int
    d: int = 1

    def __post_init__(self):
        if not 2 <= self.m <= MAX_WINDOW_LENGTH:
            raise ValueError(f"m must be in 2..{MAX_WINDOW_LENGTH}, got {self.m}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")

    @property
    def span(self) -> int:
        """Number of samples covered by one window."""
        return (self.m - 1) * self.d + 1


def pattern_of_window(values: Sequence) -> Pattern:
    """Pattern shown by one tie-free window of 2..6 values.

    Raises :class:`TieError` when two values are equal; ties are the
    caller's responsibility.
    """
    return Pattern(ranks_of(values))


def apply_jitter(x, seed: int) -> np.ndarray:
    """Add seeded uniform noise of amplitude 1e-9 * (max - min) to ``x``.

    Deterministic for a fixed seed; used by the ``jitter`` tie policy.
    """
    x = as_time_series(x)
    rng = np.random.default_rng(seed)
    span = float(x.max() - x.min()) if x.size else 0.0
    return x + rng.uniform(-1.0, 1.0, x.shape) * (JITTER_SCALE * span)


def window_codes(x, m: int, d: int = 1, check_ties: bool = True):
    """Lexicographic pattern codes of every length-m, delay-d window.

    ``x`` may be a single series or a batch of series stacked along the
    first axis; windows run along the last axis.  Returns ``(codes, ties)``
    where ``ties`` marks windows containing equal values (``None`` when
    ``check_ties`` is false; the caller then guarantees a continuous
    distribution).  Tied windows still receive an arbitrary adjacent code,
    so they must be masked out by the caller.
    """
    x = np.asarray(x, dtype=np.float64)
    length = x.shape[-1]
    n = length - (m - 1) * d
    if n < 1:
        raise SeriesTooShort(
            f"need more than {(m - 1) * d} samples for m={m}, d={d}, got {length}"
        )
    cols = [x[..., k * d : k * d + n] for k in range(m)]
    codes = np.zeros(x.shape[:-1] + (n,), dtype=np.int64)
    ties = np.zeros(x.shape[:-1] + (n,), dtype=bool) if check_ties else None
    for k in range(m - 1):
        weight = factorial(m - 1 - k)
        for j in range(k + 1, m):
            codes += weight * (cols[j] < cols[k])
            if check_ties:
                ties |= cols[j] == cols[k]
    return codes, ties


def extract_patterns(
    x,
    m: int,
    d: int = 1,
    tie_policy: TiePolicy = "skip",
    jitter_seed: int | None = None,
) -> list[tuple[int, Pattern | None]]:
    """Patterns of all windows of ``x``, one entry per start time t = 1..T-(m-1)d.

    Under the default ``skip`` policy, windows containing ties appear as
    ``(t, SKIPPED)``.  Under ``jitter`` the whole series is perturbed once
    by :func:`apply_jitter` with the caller-supplied ``jitter_seed``.
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
    out: list[tuple[int, Pattern | None]] = []
    for t, (code, tied) in enumerate(zip(codes.tolist(), ties.tolist()), start=1):
        out.append((t, SKIPPED if tied else Pattern.from_index(m, code)))
    return out
