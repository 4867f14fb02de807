"""Null models for serial-dependence testing of length-3 pattern statistics.

Two processes admit exact length-3 frequency covariances: i.i.d. sequences
and symmetric random walks.  Both 6x6 matrices are stored as integer
matrices with scale factors 1/360 and 1/192; rows and columns follow the
lexicographic pattern order 123, 132, 213, 231, 312, 321, and all algebra
on them (constraint annihilation, contrast variances, the random-walk
eigenstructure) is done in exact rational arithmetic.

Note on the i.i.d. matrix: published versions of it exist with the 231 and
312 coordinates interchanged, which is the same matrix written in the
inverse-pattern notation.  The matrix below is oriented for patterns read
along the time axis; in this orientation it annihilates both constraint
vectors and reproduces the known contrast variances (e.g. Var(tau) = 8/45T
and Var(gamma) = 2/5T), which pins the convention unambiguously.

Critical values of the scaled entropy deviation Z = T*(h_max - h) under the
i.i.d. null come either from a built-in table for m = 3 and m = 4 or from
direct Monte Carlo simulation, which is reproducible bit for bit for a
given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, log

import numpy as np
from scipy.special import erfc, ndtri, xlogy

from .contrasts import contrast_vector, pattern_frequencies
from .entropy import MIN_SERIES_LEN, z_statistic
from .errors import SeriesTooShort
from .patterns import TiePolicy, as_time_series, window_codes
from .processes import batch_paths

IID = "iid"
RANDOM_WALK = "symmetric_random_walk"

# Integer covariance numerators; the T-scaled covariance is num/den.
_SIGMA_W_NUM = np.array(
    [
        [46, -23, -23, 7, 7, -14],
        [-23, 28, 10, -20, -2, 7],
        [-23, 10, 28, -2, -20, 7],
        [7, -20, -2, 28, 10, -23],
        [7, -2, -20, 10, 28, -23],
        [-14, 7, 7, -23, -23, 46],
    ],
    dtype=np.int64,
)
_SIGMA_W_DEN = 360

_SIGMA_B_NUM = np.array(
    [
        [60, -6, -6, -6, -6, -36],
        [-6, 15, 7, -9, -1, -6],
        [-6, 7, 15, -1, -9, -6],
        [-6, -9, -1, 15, 7, -6],
        [-6, -1, -9, 7, 15, -6],
        [-36, -6, -6, -6, -6, 60],
    ],
    dtype=np.int64,
)
_SIGMA_B_DEN = 192

#: Contrast row vectors in lexicographic pattern order (exact rationals).
CONTRAST_VECTORS: dict[str, tuple[Fraction, ...]] = {
    "beta": tuple(map(Fraction, (1, 0, 0, 0, 0, -1))),
    "tau": (
        Fraction(2, 3),
        Fraction(-1, 3),
        Fraction(-1, 3),
        Fraction(-1, 3),
        Fraction(-1, 3),
        Fraction(2, 3),
    ),
    "gamma": tuple(map(Fraction, (0, -1, 1, 1, -1, 0))),
    "delta": tuple(map(Fraction, (0, 1, 1, -1, -1, 0))),
}

#: Kernel of both covariance matrices: the normalization constraint and the
#: min/max balance constraint.
CONSTRAINT_VECTORS: dict[str, tuple[int, ...]] = {
    "c1": (1, 1, 1, 1, 1, 1),
    "c2": (0, -1, 1, -1, 1, 0),
}

#: T-scaled variances of the two length-4 contrasts
#: beta4 = p1234 - p4321 and tau4 = p1234 + p4321 - 1/12 under the i.i.d.
#: null, derived from the asymptotic covariance matrix of (p1234, p4321),
#: (1/4032) * [[199, -17], [-17, 199]].  For tau4 this gives 182/2016 =
#: 91/1008; the value 181/2016 is also found in print, but it is
#: inconsistent with that matrix, so the matrix-derived value is used.
M4_CONTRAST_TVARS: dict[str, Fraction] = {
    "beta4": Fraction(2 * 199 + 2 * 17, 4032),
    "tau4": Fraction(2 * 199 - 2 * 17, 4032),
}


def _quad(x: tuple, num: np.ndarray, den: int, y: tuple) -> Fraction:
    """Exact quadratic form x (num/den) y^T with Fraction arithmetic."""
    total = Fraction(0)
    for i in range(6):
        xi = Fraction(x[i])
        if xi == 0:
            continue
        row = num[i]
        total += xi * sum(Fraction(int(row[j])) * Fraction(y[j]) for j in range(6))
    return total / den


@dataclass(frozen=True)
class NullModel:
    """Exact frequency covariance of one null hypothesis (T-scaled)."""

    name: str
    sigma_numerators: np.ndarray
    sigma_denominator: int
    contrast_variances: dict[str, Fraction]
    cov_beta_delta: Fraction

    def sigma(self) -> tuple[tuple[Fraction, ...], ...]:
        """The T-scaled covariance matrix as exact rationals."""
        den = self.sigma_denominator
        return tuple(
            tuple(Fraction(int(v), den) for v in row) for row in self.sigma_numerators
        )

    def sigma_array(self, t: float = 1.0) -> np.ndarray:
        """Float covariance matrix, scaled to sample length ``t``."""
        return self.sigma_numerators / (self.sigma_denominator * t)


def null_covariance(model: str) -> NullModel:
    """The exact covariance model for ``"iid"`` or ``"symmetric_random_walk"``."""
    if model == IID:
        num, den = _SIGMA_W_NUM, _SIGMA_W_DEN
    elif model == RANDOM_WALK:
        num, den = _SIGMA_B_NUM, _SIGMA_B_DEN
    else:
        raise ValueError(f"unknown null model {model!r}")
    variances = {
        name: _quad(vec, num, den, vec) for name, vec in CONTRAST_VECTORS.items()
    }
    cov_bd = _quad(CONTRAST_VECTORS["beta"], num, den, CONTRAST_VECTORS["delta"])
    return NullModel(
        name=model,
        sigma_numerators=num.copy(),
        sigma_denominator=den,
        contrast_variances=variances,
        cov_beta_delta=cov_bd,
    )


@dataclass(frozen=True)
class ContrastMoments:
    """T-scaled second moments of (beta, tau, gamma, delta) under a null."""

    model: str
    variances: dict[str, Fraction]
    cov_beta_delta: Fraction

    @property
    def corr_beta_delta(self) -> float:
        denom = math.sqrt(
            float(self.variances["beta"]) * float(self.variances["delta"])
        )
        return float(self.cov_beta_delta) / denom


def contrast_moments(model: str) -> ContrastMoments:
    """Variances and the only nonzero covariance of the four contrasts.

    Under the random walk all four contrasts are uncorrelated; under the
    i.i.d. model beta and delta carry a strong negative correlation
    -sqrt(2)/2 while every other pair is uncorrelated.
    """
    nm = null_covariance(model)
    return ContrastMoments(
        model=model,
        variances=dict(nm.contrast_variances),
        cov_beta_delta=nm.cov_beta_delta,
    )


@dataclass(frozen=True)
class EigenPair:
    """One eigenpair of a T-scaled covariance matrix.

    ``value`` is a Fraction when the eigenvalue is rational and a float for
    the two irrational i.i.d. eigenvalues (2 +- sqrt(2))/12.
    """

    label: str
    value: Fraction | float
    vector: tuple


@dataclass(frozen=True)
class EigenStructure:
    model: str
    pairs: tuple[EigenPair, ...]
    kernel: tuple[tuple[int, ...], ...]

    def eigenvalues(self) -> list[float]:
        return sorted(float(p.value) for p in self.pairs)


def eigen_structure(model: str) -> EigenStructure:
    """Eigenpairs of the T-scaled covariance matrix.

    Random walk: the four contrast vectors themselves are the eigenvectors,
    with eigenvalues 1/2 (beta), 3/16 (tau), 1/6 (delta) and 1/12 (gamma).
    I.i.d.: tau and gamma remain eigenvectors with eigenvalues 2/15 and
    1/10; the beta/delta plane holds the eigenvectors
    -(1/2)*beta_bar +- (1/2)*delta_bar/sqrt(2) with eigenvalues
    (2 +- sqrt(2))/12.  Both kernels are spanned by the two constraints.
    """
    if model == RANDOM_WALK:
        pairs = (
            EigenPair("beta", Fraction(1, 2), CONTRAST_VECTORS["beta"]),
            EigenPair("tau", Fraction(3, 16), CONTRAST_VECTORS["tau"]),
            EigenPair("delta", Fraction(1, 6), CONTRAST_VECTORS["delta"]),
            EigenPair("gamma", Fraction(1, 12), CONTRAST_VECTORS["gamma"]),
        )
    elif model == IID:
        beta = np.array([float(v) for v in CONTRAST_VECTORS["beta"]])
        delta = np.array([float(v) for v in CONTRAST_VECTORS["delta"]])
        plus = tuple(-0.5 * beta + 0.5 * delta / math.sqrt(2.0))
        minus = tuple(-0.5 * beta - 0.5 * delta / math.sqrt(2.0))
        pairs = (
            EigenPair("tau", Fraction(2, 15), CONTRAST_VECTORS["tau"]),
            EigenPair("gamma", Fraction(1, 10), CONTRAST_VECTORS["gamma"]),
            EigenPair("beta-delta:+", (2.0 + math.sqrt(2.0)) / 12.0, plus),
            EigenPair("beta-delta:-", (2.0 - math.sqrt(2.0)) / 12.0, minus),
        )
    else:
        raise ValueError(f"unknown null model {model!r}")
    return EigenStructure(
        model=model,
        pairs=pairs,
        kernel=(CONSTRAINT_VECTORS["c1"], CONSTRAINT_VECTORS["c2"]),
    )


# ---------------------------------------------------------------------------
# Monte Carlo simulation of the entropy deviation under the nulls
# ---------------------------------------------------------------------------

QUANTILE_LEVELS = (0.95, 0.99, 0.999)


def simulate_entropy_deviations(
    m: int,
    length: int,
    n_reps: int,
    seed: int,
    process: str = "white_noise",
) -> np.ndarray:
    """h_max - h for ``n_reps`` independent series of ``length`` samples.

    Replicates are generated in fixed-size blocks with per-block derived
    seeds (see :func:`ordpat.processes.chunk_rng`), so the result is
    deterministic for a given seed and independent of scheduling.
    """
    if m < 2 or m > 6:
        raise ValueError(f"m must be in 2..6, got {m}")
    mf = factorial(m)
    h_max = log(mf)
    out = np.empty(n_reps)
    done = 0
    for block in batch_paths(process, n_reps, length, seed):
        codes, _ = window_codes(block, m, 1, check_ties=False)
        r, n = codes.shape
        offsets = np.arange(r, dtype=np.int64)[:, None] * mf
        counts = np.bincount((codes + offsets).ravel(), minlength=r * mf)
        p = counts.reshape(r, mf) / n
        h = -np.sum(xlogy(p, p), axis=1)
        out[done : done + r] = h_max - h
        done += r
    return out


@dataclass(frozen=True)
class QuantileTable:
    """Critical values of Z at the standard levels for one (m, T).

    ``provenance`` records where the numbers come from: the built-in table
    or a seeded simulation.
    """

    m: int
    length: float
    levels: tuple[float, ...]
    values: tuple[float, ...]
    provenance: str
    seed: int | None = None
    n_reps: int | None = None

    def __post_init__(self):
        if len(self.levels) != len(self.values):
            raise ValueError("levels and values must align")
        if list(self.values) != sorted(self.values):
            raise ValueError("critical values must increase with the level")

    def critical(self, level: float) -> float:
        for lv, val in zip(self.levels, self.values):
            if lv == level:
                return val
        raise ValueError(f"level {level} not tabulated (have {self.levels})")


#: Built-in critical values of Z = T*(h_max - h) under the i.i.d. null.
#: The m = 4 entry at length = inf is an extrapolation kept for reference;
#: lookups only ever select finite rows.
REFERENCE_QUANTILES: dict[tuple[int, float], QuantileTable] = {
    (m, t): QuantileTable(m, t, QUANTILE_LEVELS, vals, provenance="reference")
    for (m, t), vals in {
        (3, 200): (4.49, 6.91, 10.39),
        (3, 400): (4.47, 6.82, 10.37),
        (3, 800): (4.46, 6.81, 10.36),
        (4, 100): (18.40, 22.89, 28.88),
        (4, 200): (17.64, 22.06, 28.08),
        (4, 400): (17.39, 21.75, 27.69),
        (4, 800): (17.29, 21.63, 27.56),
        (4, math.inf): (17.22, 21.55, 27.48),
    }.items()
}


def reference_quantile_table(m: int, length: int) -> QuantileTable:
    """Built-in table row for the largest tabulated finite length <= ``length``."""
    rows = sorted(
        t for (mm, t) in REFERENCE_QUANTILES if mm == m and math.isfinite(t)
    )
    if not rows:
        raise ValueError(f"no built-in quantiles for m={m} (have m=3 and m=4)")
    chosen = rows[0]
    for t in rows:
        if t <= length:
            chosen = t
    return REFERENCE_QUANTILES[(m, chosen)]


def simulate_quantiles(m: int, length: int, n_reps: int, seed: int) -> QuantileTable:
    """Empirical critical values of Z under the i.i.d. null.

    Deterministic for a given seed; requires at least 10^4 replicates so
    the 99.9% level is supported by a reasonable tail sample.
    """
    if n_reps < 10_000:
        raise ValueError(f"n_reps must be >= 10000, got {n_reps}")
    devs = simulate_entropy_deviations(m, length, n_reps, seed)
    z = length * devs
    values = tuple(float(v) for v in np.quantile(z, QUANTILE_LEVELS))
    return QuantileTable(
        m=m,
        length=length,
        levels=QUANTILE_LEVELS,
        values=values,
        provenance=f"simulated(seed={seed}, n_reps={n_reps})",
        seed=seed,
        n_reps=n_reps,
    )


# ---------------------------------------------------------------------------
# Tests
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestReport:
    """Outcome of one serial-dependence test."""

    statistic: str
    value: float
    level: float
    p_value: float
    reject: bool
    direction: str  # "larger" | "smaller" | "accepted"
    null_mean: float | None = None
    null_scale: float | None = None
    critical_value: float | None = None
    quantile_provenance: str | None = None

    def __post_init__(self):
        if self.direction not in ("larger", "smaller", "accepted"):
            raise ValueError(f"bad direction {self.direction!r}")
        if (self.direction == "accepted") == self.reject:
            raise ValueError("decision and direction are inconsistent")


def exponential_tail_probability(z: float) -> float:
    """The empirical m = 3 tail formula P(Z >= z) ~ exp(-2z/3)."""
    return min(1.0, math.exp(-2.0 * z / 3.0))


def _tail_probability_from_table(z: float, table: QuantileTable) -> float:
    """Log-linear tail interpolation through (0, 1) and the table anchors."""
    anchors = [(0.0, 0.0)] + [
        (val, math.log(1.0 - lv)) for lv, val in zip(table.levels, table.values)
    ]
    if z <= 0.0:
        return 1.0
    for (z0, lp0), (z1, lp1) in zip(anchors, anchors[1:]):
        if z <= z1:
            slope = (lp1 - lp0) / (z1 - z0)
            return math.exp(lp0 + slope * (z - z0))
    (z0, lp0), (z1, lp1) = anchors[-2], anchors[-1]
    slope = (lp1 - lp0) / (z1 - z0)
    return math.exp(lp1 + slope * (z - z1))


def entropy_test(
    x,
    m: int,
    d: int = 1,
    level: float = 0.95,
    quantile_source: QuantileTable | str = "reference",
    tie_policy: TiePolicy = "skip",
    jitter_seed: int | None = None,
) -> TestReport:
    """One-sided i.i.d. test on the scaled entropy deviation Z.

    The null is rejected when Z exceeds the critical quantile from
    ``quantile_source`` (the built-in table, or a simulated
    :class:`QuantileTable`).  The p-value uses the exponential tail formula
    for m = 3 and table interpolation for m = 4; near the critical value it
    may disagree with the table decision by the table's own resolution.
    """
    report = z_statistic(x, m, d, tie_policy, jitter_seed)
    if isinstance(quantile_source, QuantileTable):
        table = quantile_source
        if table.m != m:
            raise ValueError(f"quantile table is for m={table.m}, test is for m={m}")
    elif quantile_source == "reference":
        table = reference_quantile_table(m, report.series_length)
    else:
        raise ValueError(f"unknown quantile source {quantile_source!r}")
    crit = table.critical(level)
    z = report.z
    if m == 3:
        p = exponential_tail_probability(z)
    else:
        p = _tail_probability_from_table(z, table)
    reject = z > crit
    return TestReport(
        statistic=f"H{m}",
        value=z,
        level=level,
        p_value=p,
        reject=reject,
        direction="larger" if reject else "accepted",
        critical_value=crit,
        quantile_provenance=table.provenance,
    )


_M3_CONTRASTS = ("beta", "tau", "gamma", "delta")
_M4_CONTRASTS = ("tau4", "beta4")


def contrast_test(
    x,
    contrast: str,
    d: int = 1,
    level: float = 0.95,
    tie_policy: TiePolicy = "skip",
    jitter_seed: int | None = None,
) -> TestReport:
    """Two-sided normal i.i.d. test on one pattern contrast.

    Under the null the contrast has mean zero and variance TVar/T with the
    exact TVar from :func:`contrast_moments` (length 3) or the length-4
    covariance matrix.
    """
    x = as_time_series(x)
    t = len(x)
    if t < MIN_SERIES_LEN:
        raise SeriesTooShort(f"contrast test needs at least {MIN_SERIES_LEN} samples")
    if contrast in _M3_CONTRASTS:
        dist = pattern_frequencies(x, 3, d, tie_policy, jitter_seed)
        value = getattr(contrast_vector(dist), contrast)
        tvar = contrast_moments(IID).variances[contrast]
    elif contrast in _M4_CONTRASTS:
        dist = pattern_frequencies(x, 4, d, tie_policy, jitter_seed)
        p_up, p_down = float(dist.probs[0]), float(dist.probs[-1])
        value = p_up - p_down if contrast == "beta4" else p_up + p_down - 1.0 / 12.0
        tvar = M4_CONTRAST_TVARS[contrast]
    else:
        raise ValueError(
            f"unknown contrast {contrast!r} "
            f"(supported: {_M3_CONTRASTS + _M4_CONTRASTS})"
        )
    scale = math.sqrt(float(tvar) / t)
    zscore = value / scale
    p = float(erfc(abs(zscore) / math.sqrt(2.0)))
    alpha = 1.0 - level
    reject = p < alpha
    direction = "accepted" if not reject else ("larger" if value > 0 else "smaller")
    return TestReport(
        statistic=contrast,
        value=value,
        level=level,
        p_value=p,
        reject=reject,
        direction=direction,
        null_mean=0.0,
        null_scale=scale,
        critical_value=float(ndtri(1.0 - alpha / 2.0)) * scale,
    )


@dataclass(frozen=True)
class BatchCell:
    d: int
    statistic: str
    report: TestReport | None  # None marks a cell with a too-short series

    @property
    def missing(self) -> bool:
        return self.report is None


@dataclass(frozen=True)
class TrichotomySummary:
    statistic: str
    n: int
    n_missing: int
    accepted_pct: float
    larger_pct: float
    smaller_pct: float


@dataclass(frozen=True)
class BatchTestResult:
    level: float
    cells: tuple[BatchCell, ...]
    summaries: dict[str, TrichotomySummary]


def batch_test(
    x,
    d_max: int,
    m_list: tuple[int, ...] = (3, 4),
    level: float = 0.95,
    quantile_source: QuantileTable | str = "reference",
    tie_policy: TiePolicy = "skip",
    jitter_seed: int | None = None,
) -> BatchTestResult:
    """Run the entropy and contrast tests for every delay d = 1..d_max.

    Returns the full grid of reports plus, per statistic, the percentage of
    cells where the i.i.d. hypothesis was accepted, rejected upward, or
    rejected downward.  Cells whose series is too short are marked missing.
    """
    x = as_time_series(x)
    stats: list[tuple[str, int]] = []
    for m in m_list:
        if m == 3:
            stats.append(("H3", 3))
            stats.extend((c, 3) for c in _M3_CONTRASTS)
        elif m == 4:
            stats.append(("H4", 4))
            stats.extend((c, 4) for c in _M4_CONTRASTS)
        else:
            raise ValueError(f"batch tests support m in (3, 4), got {m}")

    cells: list[BatchCell] = []
    for d in range(1, d_max + 1):
        for name, m in stats:
            try:
                if name.startswith("H"):
                    rep = entropy_test(
                        x, m, d, level, quantile_source, tie_policy, jitter_seed
                    )
                else:
                    rep = contrast_test(x, name, d, level, tie_policy, jitter_seed)
            except SeriesTooShort:
                rep = None
            cells.append(BatchCell(d=d, statistic=name, report=rep))

    summaries: dict[str, TrichotomySummary] = {}
    for name, _ in stats:
        own = [c for c in cells if c.statistic == name]
        present = [c.report for c in own if c.report is not None]
        n = len(present)
        count = {"accepted": 0, "larger": 0, "smaller": 0}
        for rep in present:
            count[rep.direction] += 1
        summaries[name] = TrichotomySummary(
            statistic=name,
            n=n,
            n_missing=len(own) - n,
            accepted_pct=100.0 * count["accepted"] / n if n else math.nan,
            larger_pct=100.0 * count["larger"] / n if n else math.nan,
            smaller_pct=100.0 * count["smaller"] / n if n else math.nan,
        )
    return BatchTestResult(level=level, cells=tuple(cells), summaries=summaries)


# ---------------------------------------------------------------------------
# Quantile cache file
# ---------------------------------------------------------------------------

CACHE_HEADER = "# ordpat-quantile-cache v1"
_CACHE_COLUMNS = "# columns: m T level z seed n_reps"


def save_quantile_tables(tables, path) -> None:
    """Write simulated quantile tables to the versioned columnar text format."""
    lines = [CACHE_HEADER, _CACHE_COLUMNS]
    for table in tables:
        if table.seed is None or table.n_reps is None:
            raise ValueError("only simulated tables (with seed and n_reps) are cached")
        for lv, val in zip(table.levels, table.values):
            lines.append(
                f"{table.m} {int(table.length)} {lv:g} {val!r} {table.seed} {table.n_reps}"
            )
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_quantile_tables(path) -> list[QuantileTable]:
    """Read a quantile cache file written by :func:`save_quantile_tables`."""
    with open(path, encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != CACHE_HEADER:
        raise ValueError(f"{path}: not a {CACHE_HEADER!r} file")
    grouped: dict[tuple, dict[float, float]] = {}
    for ln in lines:
        if ln.startswith("#"):
            continue
        m_s, t_s, lv_s, z_s, seed_s, reps_s = ln.split()
        key = (int(m_s), int(t_s), int(seed_s), int(reps_s))
        grouped.setdefault(key, {})[float(lv_s)] = float(z_s)
    tables = []
    for (m, t, seed, reps), levels in grouped.items():
        lvls = tuple(sorted(levels))
        tables.append(
            QuantileTable(
                m=m,
                length=t,
                levels=lvls,
                values=tuple(levels[lv] for lv in lvls),
                provenance=f"simulated(seed={seed}, n_reps={reps})",
                seed=seed,
                n_reps=reps,
            )
        )
    return tables


def update_quantile_cache(path, table: QuantileTable) -> list[QuantileTable]:
    """Insert or replace the cache row group for ``(table.m, table.length)``."""
    import os

    existing = load_quantile_tables(path) if os.path.exists(path) else []
    kept = [t for t in existing if (t.m, t.length) != (table.m, table.length)]
    kept.append(table)
    kept.sort(key=lambda t: (t.m, t.length))
    save_quantile_tables(kept, path)
    return kept
