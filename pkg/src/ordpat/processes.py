"""Process generators and the coin-tossing ordinal process.

Numeric generators cover the two tractable null models (i.i.d. sequences
and symmetric random walks), geometric Brownian motion (same order
structure as its underlying walk) and AR(1) with several noise types.

The coin-tossing order builds a random total order on objects X_1, X_2, ...
without numeric values: object j is compared with j-1, j-2, ..., 1 in that
order, and a fair coin decides each comparison that is not already forced
by transitivity.  The probability of a length-m pattern pi at delay 1 is
exactly 2**(-u(pi)) where the energy u(pi) counts the comparisons a pattern
needs; this makes every pattern probability a dyadic rational that can be
computed exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable, Iterator, Literal, Sequence

import numpy as np
from scipy.signal import lfilter

from .contrasts import ContrastVector, PatternDistribution, contrast_vector, pattern_frequencies
from .errors import SizeLimit
from .patterns import Pattern, ranks_of

ProcessKind = Literal["white_noise", "symmetric_random_walk", "geometric_bm", "ar1"]
NoiseKind = Literal["normal", "uniform", "bernoulli", "triangular", "exponential"]

_KINDS = ("white_noise", "symmetric_random_walk", "geometric_bm", "ar1")
_NOISES = ("normal", "uniform", "bernoulli", "triangular", "exponential")

#: Largest object count for exact enumeration of coin-tossing laws.
#: 10! terms is still desk-scale; beyond that use Monte Carlo.
MAX_EXACT_OBJECTS = 10

#: Number of AR(1) warm-up samples discarded before the returned series.
AR1_BURN_IN = 100

#: Replicate block size for batched simulation.  Fixed so that results are
#: bit-for-bit reproducible regardless of how blocks are scheduled.
CHUNK_SIZE = 1024


@dataclass(frozen=True)
class ProcessSpec:
    """Configuration of a numeric process generator.

    ``triangular`` noise is the minimum of two independent uniforms and
    ``exponential`` noise is 1 + log(u) for uniform u; both are kept exactly
    in these conventional forms because location and scale do not affect
    order patterns.
    """

    kind: ProcessKind
    noise: NoiseKind = "normal"
    phi: float = 0.5
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown process kind {self.kind!r}")
        if self.noise not in _NOISES:
            raise ValueError(f"unknown noise kind {self.noise!r}")


def _draw_noise(rng: np.random.Generator, noise: NoiseKind, size) -> np.ndarray:
    if noise == "normal":
        return rng.standard_normal(size)
    if noise == "uniform":
        return rng.random(size)
    if noise == "bernoulli":
        return rng.integers(0, 2, size).astype(np.float64) * 2.0 - 1.0
    if noise == "triangular":
        return np.minimum(rng.random(size), rng.random(size))
    if noise == "exponential":
        # 1 - rng.random() lies in (0, 1], so the log is finite.
        return 1.0 + np.log(1.0 - rng.random(size))
    raise ValueError(f"unknown noise kind {noise!r}")


def generate(spec: ProcessSpec, length: int) -> np.ndarray:
    """Sample one series; deterministic given ``spec.seed``.

    Walk-type processes return ``length + 1`` values: the convention is a
    start at 0 followed by ``length`` increments.  Geometric Brownian
    motion is the exponential of the walk and shares its pattern sequence
    exactly (note that exp overflows once the walk exceeds ~709, so keep
    walks short for that kind).
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "white_noise":
        return _draw_noise(rng, spec.noise, length)
    if spec.kind in ("symmetric_random_walk", "geometric_bm"):
        increments = _draw_noise(rng, spec.noise, length)
        walk = np.concatenate(([0.0], np.cumsum(increments)))
        return np.exp(walk) if spec.kind == "geometric_bm" else walk
    if spec.kind == "ar1":
        eps = _draw_noise(rng, spec.noise, length + AR1_BURN_IN)
        series = lfilter([1.0], [1.0, -spec.phi], eps)
        return series[AR1_BURN_IN:]
    raise ValueError(f"unknown process kind {spec.kind!r}")


def chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    """Generator for one replicate block.

    Block i draws from ``SeedSequence(seed, spawn_key=(i,))``; with the
    fixed block size this makes batched simulations reproducible
    independently of scheduling or thread count.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk_index,)))


def batch_paths(
    kind: ProcessKind,
    n_reps: int,
    length: int,
    seed: int,
    noise: NoiseKind = "normal",
) -> Iterator[np.ndarray]:
    """Yield blocks of sample paths, one replicate per row.

    Walk batches omit the leading zero sample; the pattern law is
    unaffected because the increments are stationary.
    """
    if kind not in ("white_noise", "symmetric_random_walk"):
        raise ValueError(f"batch generation supports the null models, got {kind!r}")
    done = 0
    index = 0
    while done < n_reps:
        b = min(CHUNK_SIZE, n_reps - done)
        block = _draw_noise(chunk_rng(seed, index), noise, (b, length))
        if kind == "symmetric_random_walk":
            block = np.cumsum(block, axis=1)
        yield block
        done += b
        index += 1


def ar1_contrasts(
    noise: NoiseKind,
    length: int,
    seed: int,
    phi: float = 0.5,
) -> ContrastVector:
    """Length-3 contrasts of a simulated AR(1) series X_t = phi*X_{t-1} + eps_t."""
    spec = ProcessSpec(kind="ar1", noise=noise, phi=phi, seed=seed)
    return contrast_vector(pattern_frequencies(generate(spec, length), m=3, d=1))


# ---------------------------------------------------------------------------
# Coin-tossing order
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderPrefix:
    """Total order of the first n objects of a coin-tossing realisation.

    ``order[i]`` is the rank (1..n) of object i+1 among the n objects.
    Extending a prefix never changes the relative order of earlier objects.
    """

    n: int
    order: tuple[int, ...]
    coins_consumed: int

    def __post_init__(self):
        if sorted(self.order) != list(range(1, self.n + 1)):
            raise ValueError("order is not a permutation of 1..n")


def _insert_objects(n: int, next_bit: Callable[[], int]) -> tuple[list[int], int]:
    """Run the insertion algorithm; returns (objects sorted ascending, coins).

    Object j is compared against j-1, j-2, ..., 1.  A comparison consumes a
    bit only while the feasible insertion interval still straddles the
    other object's position; once the interval collapses to a single slot
    every remaining comparison is forced by transitivity, which realises
    the rule that forced coins are never thrown.
    """
    sorted_objs: list[int] = []
    pos = [0] * n  # current position of each object in sorted_objs
    coins = 0
    for j in range(n):
        lo, hi = 0, j  # feasible insertion slots [lo, hi]
        for i in range(j - 1, -1, -1):
            if lo == hi:
                break
            p = pos[i]
            if lo <= p < hi:
                coins += 1
                if next_bit():
                    hi = p  # new object below object i
                else:
                    lo = p + 1  # new object above object i
        slot = lo
        sorted_objs.insert(slot, j)
        for k in range(slot + 1, j + 1):
            pos[sorted_objs[k]] += 1
        pos[j] = slot
    return sorted_objs, coins


def _bit_stream(rng: np.random.Generator, block: int = 512) -> Callable[[], int]:
    buf: list[int] = []

    def next_bit() -> int:
        if not buf:
            buf.extend(reversed(rng.integers(0, 2, block).tolist()))
        return buf.pop()

    return next_bit


def coin_tossing_prefix(n: int, seed: int) -> OrderPrefix:
    """Sample the order of the first n objects of a coin-tossing process."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    sorted_objs, coins = _insert_objects(n, _bit_stream(rng))
    order = [0] * n
    for rank, obj in enumerate(sorted_objs, start=1):
        order[obj] = rank
    return OrderPrefix(n=n, order=tuple(order), coins_consumed=coins)


def coin_tossing_rank_samples(
    n_objects: int,
    n_samples: int,
    seed: int,
) -> np.ndarray:
    """Vectorised sampling of many independent coin-tossing prefixes.

    Returns an (n_samples, n_objects) array of ranks.  All replicates are
    advanced insertion by insertion; each replicate consumes bits from its
    own pre-drawn stream exactly when its feasible interval straddles the
    compared object, so the law matches :func:`coin_tossing_prefix`.
    """
    if n_objects < 1 or n_samples < 1:
        raise ValueError("n_objects and n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    max_coins = n_objects * (n_objects - 1) // 2
    bits = rng.integers(0, 2, (n_samples, max(max_coins, 1)), dtype=np.int8)
    cursor = np.zeros(n_samples, dtype=np.int64)
    rows = np.arange(n_samples)
    # pos[:, i] = current position of object i among those inserted so far
    pos = np.zeros((n_samples, n_objects), dtype=np.int64)
    for j in range(1, n_objects):
        lo = np.zeros(n_samples, dtype=np.int64)
        hi = np.full(n_samples, j, dtype=np.int64)
        for i in range(j - 1, -1, -1):
            p = pos[:, i]
            active = (lo <= p) & (p < hi)
            if not active.any():
                continue
            coin = bits[rows[active], cursor[active]]
            cursor[active] += 1
            below = active.copy()
            below[active] = coin == 1
            above = active & ~below
            hi[below] = p[below]
            lo[above] = p[above] + 1
        slot = lo
        pos[:, :j] += pos[:, :j] >= slot[:, None]
        pos[:, j] = slot
    return pos + 1


def coin_tossing_pattern_samples(
    m: int,
    d: int,
    n_samples: int,
    seed: int,
) -> np.ndarray:
    """Lexicographic codes of the delay-d pattern of the first (m-1)d+1 objects."""
    span = (m - 1) * d + 1
    ranks = coin_tossing_rank_samples(span, n_samples, seed)
    sub = ranks[:, ::d].astype(np.float64)
    codes = np.zeros(n_samples, dtype=np.int64)
    for k in range(m - 1):
        weight = factorial(m - 1 - k)
        for j in range(k + 1, m):
            codes += weight * (sub[:, j] < sub[:, k])
    return codes


def u_energy(pattern: Pattern | Sequence) -> int:
    """Energy u(pi): comparisons a coin-tossing order needs to fix pi.

    Closed form: the number of pairs (i, j), i < j, such that no position k
    between them carries a rank strictly between the ranks at i and j.  The
    pattern probability at delay 1 is 2**(-u).
    """
    ranks = pattern.ranks if isinstance(pattern, Pattern) else ranks_of(pattern)
    m = len(ranks)
    u = 0
    for i in range(m - 1):
        for j in range(i + 1, m):
            lo, hi = min(ranks[i], ranks[j]), max(ranks[i], ranks[j])
            if not any(lo < ranks[k] < hi for k in range(i + 1, j)):
                u += 1
    return u


def _perm_matrix(m: int) -> np.ndarray:
    """All permutations of 1..m as an (m!, m) int8 array (arbitrary row order)."""
    perms = np.ones((1, 1), dtype=np.int8)
    for size in range(2, m + 1):
        blocks = []
        for slot in range(size):
            blk = np.empty((perms.shape[0], size), dtype=np.int8)
            blk[:, :slot] = perms[:, :slot]
            blk[:, slot] = size
            blk[:, slot + 1 :] = perms[:, slot:]
            blocks.append(blk)
        perms = np.concatenate(blocks)
    return perms


def _u_energy_rows(perms: np.ndarray) -> np.ndarray:
    """Vectorised u over the rows of a permutation matrix."""
    n, m = perms.shape
    u = np.zeros(n, dtype=np.int64)
    for i in range(m - 1):
        for j in range(i + 1, m):
            lo = np.minimum(perms[:, i], perms[:, j])
            hi = np.maximum(perms[:, i], perms[:, j])
            between = np.zeros(n, dtype=bool)
            for k in range(i + 1, j):
                col = perms[:, k]
                between |= (col > lo) & (col < hi)
            u += ~between
    return u


def _lex_codes_rows(values: np.ndarray) -> np.ndarray:
    """Lexicographic pattern codes of the rows of a value matrix."""
    n, m = values.shape
    codes = np.zeros(n, dtype=np.int64)
    for k in range(m - 1):
        weight = factorial(m - 1 - k)
        for j in range(k + 1, m):
            codes += weight * (values[:, j] < values[:, k])
    return codes


def coin_tossing_distribution(m: int) -> PatternDistribution:
    """Exact delay-1 pattern law of the coin-tossing order.

    Every probability is the dyadic rational 2**(-u(pi)); for m <= 10 these
    are exactly representable in double precision, so the returned float
    vector is exact.
    """
    if m > MAX_EXACT_OBJECTS:
        raise SizeLimit(f"exact coin-tossing law supports m <= {MAX_EXACT_OBJECTS}")
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    perms = _perm_matrix(m)
    u = _u_energy_rows(perms)
    codes = _lex_codes_rows(perms)
    probs = np.bincount(codes, weights=np.ldexp(1.0, -u), minlength=factorial(m))
    return PatternDistribution(m, probs, kind="model")


def coin_tossing_energies(m: int) -> np.ndarray:
    """u(pi) for every pattern of length m, in lexicographic order."""
    if m > MAX_EXACT_OBJECTS:
        raise SizeLimit(f"exact energies support m <= {MAX_EXACT_OBJECTS}")
    perms = _perm_matrix(m)
    u = _u_energy_rows(perms)
    codes = _lex_codes_rows(perms)
    out = np.zeros(factorial(m), dtype=np.int64)
    out[codes] = u
    return out


def coin_tossing_distribution_delayed(
    m: int,
    d: int,
    method: Literal["exact", "monte_carlo"] = "exact",
    n_samples: int = 100_000,
    seed: int | None = None,
) -> PatternDistribution:
    """Pattern law of the coin-tossing order subsampled at delay d.

    The exact method sums 2**(-u(eta)) over all orderings eta of the
    (m-1)d+1 consecutive objects whose stride-d subsample shows each
    pattern; it is limited to 10 objects.  Unlike the self-similar
    random-walk law, the result genuinely depends on d.
    """
    if m < 2 or d < 1:
        raise ValueError("need m >= 2 and d >= 1")
    span = (m - 1) * d + 1
    if method == "exact":
        if span > MAX_EXACT_OBJECTS:
            raise SizeLimit(
                f"exact delayed law needs (m-1)d+1 <= {MAX_EXACT_OBJECTS}, got {span}"
            )
        perms = _perm_matrix(span)
        u = _u_energy_rows(perms)
        codes = _lex_codes_rows(perms[:, ::d].astype(np.float64))
        probs = np.bincount(codes, weights=np.ldexp(1.0, -u), minlength=factorial(m))
        return PatternDistribution(m, probs, kind="model")
    if method == "monte_carlo":
        if seed is None:
            raise ValueError("monte_carlo method requires a seed")
        codes = coin_tossing_pattern_samples(m, d, n_samples, seed)
        counts = np.bincount(codes, minlength=factorial(m))
        # independent prefix draws, not windows of one series: d stays unset
        return PatternDistribution(
            m,
            counts / n_samples,
            kind="empirical",
            counts=counts,
            n_windows=n_samples,
        )
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class GibbsReport:
    """Both sides of the Gibbs identity for the coin-tossing law.

    The entropy of the coin law equals its mean energy times log 2, and no
    other distribution on the same patterns exceeds its own mean energy in
    entropy, which characterises the law as a Gibbs measure for u.
    """

    m: int
    entropy: float
    mean_energy: float

    @property
    def identity_gap(self) -> float:
        return self.entropy - self.mean_energy * np.log(2.0)


def gibbs_check(m: int) -> GibbsReport:
    """Entropy H(Q) and mean energy M_Q(u) of the coin-tossing law."""
    dist = coin_tossing_distribution(m)
    u = coin_tossing_energies(m)
    probs = dist.probs
    mask = probs > 0
    entropy = float(-np.sum(probs[mask] * np.log(probs[mask])))
    mean_energy = float(np.dot(probs, u))
    return GibbsReport(m=m, entropy=entropy, mean_energy=mean_energy)
