"""Shared test utilities: batch frequency simulation and exact samplers."""

from __future__ import annotations

from fractions import Fraction
from math import factorial

import numpy as np

from ordpat.orders import PatternMeasure
from ordpat.patterns import window_codes
from ordpat.processes import batch_paths


def batch_pattern_freqs(process: str, n_reps: int, length: int, seed: int, m: int = 3):
    """Per-replicate pattern frequency vectors, shape (n_reps, m!)."""
    mf = factorial(m)
    out = np.empty((n_reps, mf))
    done = 0
    for block in batch_paths(process, n_reps, length, seed):
        codes, _ = window_codes(block, m, 1, check_ties=False)
        r, n = codes.shape
        offsets = np.arange(r, dtype=np.int64)[:, None] * mf
        counts = np.bincount((codes + offsets).ravel(), minlength=r * mf)
        out[done : done + r] = counts.reshape(r, mf) / n
        done += r
    return out


# Vertices of the polytope {p >= 0, sum p = 1, p213 + p312 = p231 + p132}:
# the two monotone point masses plus the four balanced min/max pairs.
_STATIONARY_M3_VERTICES = (
    (1, 0, 0, 0, 0, 0),
    (0, 0, 0, 0, 0, 1),
    (0, Fraction(1, 2), Fraction(1, 2), 0, 0, 0),
    (0, Fraction(1, 2), 0, 0, Fraction(1, 2), 0),
    (0, 0, Fraction(1, 2), Fraction(1, 2), 0, 0),
    (0, 0, 0, Fraction(1, 2), Fraction(1, 2), 0),
)


def random_stationary_m3(rng: np.random.Generator, max_weight: int = 100) -> PatternMeasure:
    """Random stationary full-support measure on S_3, exact rationals.

    Convex combination of the constraint-polytope vertices with positive
    integer weights; every coordinate of the result is strictly positive
    and the min/max balance holds exactly.
    """
    weights = [int(w) for w in rng.integers(1, max_weight + 1, len(_STATIONARY_M3_VERTICES))]
    total = sum(weights)
    probs = [Fraction(0)] * 6
    for w, vertex in zip(weights, _STATIONARY_M3_VERTICES):
        for i, v in enumerate(vertex):
            probs[i] += Fraction(w, total) * v
    return PatternMeasure(3, tuple(probs))


def random_balanced_probs_m3(rng: np.random.Generator) -> np.ndarray:
    """Float version of :func:`random_stationary_m3` for numeric tests."""
    weights = rng.random(len(_STATIONARY_M3_VERTICES)) + 1e-3
    weights /= weights.sum()
    vertices = np.array(
        [[float(v) for v in vertex] for vertex in _STATIONARY_M3_VERTICES]
    )
    return weights @ vertices
