"""Exhaustive oracle for the worst-case bias of score-ranked cleaning.

Among all calibrated cleanings of a world that commit a fixed number of
errors, the one that flips the highest-scoring observed negatives
overstates the false-positive rate gap the most.  This module checks that
claim by enumerating every admissible cleaning of a small world and
comparing the score-ranked one against the exact maximum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from .cleaning import clean_direct_calibrated
from .gbdt import ScoredExample
from .tabular import DataError

MAX_N = 20


@dataclass(frozen=True)
class ExtremalityReport:
    threshold: float
    flip_budget: int
    error_count: int
    n_admissible: int
    max_gap: float
    direct_gap: float
    direct_attains_max: bool
    direct_gap_nonnegative: bool
    argmax_flip_ids: tuple[int, ...]
    direct_flip_ids: tuple[int, ...]

    @property
    def passed(self) -> bool:
        return self.direct_attains_max and self.direct_gap_nonnegative

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "flip_budget": self.flip_budget,
            "error_count": self.error_count,
            "n_admissible": self.n_admissible,
            "max_gap": self.max_gap,
            "direct_gap": self.direct_gap,
            "direct_attains_max": self.direct_attains_max,
            "direct_gap_nonnegative": self.direct_gap_nonnegative,
            "argmax_flip_ids": list(self.argmax_flip_ids),
            "direct_flip_ids": list(self.direct_flip_ids),
        }


def _best_pool_choice(pool: list[int], take: int, above: list[int]) -> tuple[int, tuple[int, ...]]:
    """Max exceedance count over all `take`-subsets of `pool`, with the
    lexicographically smallest argmax.

    Literal enumeration; `combinations` on an ascending pool emits subsets
    in lexicographic order, so the first maximum seen is the smallest.
    """
    best = -1
    best_subset: tuple[int, ...] = ()
    for subset in combinations(pool, take):
        count = sum(above[i] for i in subset)
        if count > best:
            best = count
            best_subset = subset
    return best, best_subset


def brute_force_max_fpr_gap(
    scores,
    y_true,
    y_observed,
    e: int,
    t: float,
) -> ExtremalityReport:
    """Enumerate every calibrated cleaning with e errors of each type and
    compare the score-ranked (direct) cleaning against the exact maximum
    FPR gap.

    A cleaning is admissible when it keeps every observed positive, flips
    exactly enough observed negatives to calibrate, and commits exactly e
    type-1 errors (hence e type-2 errors, by the count identity).  The
    search space splits into independent choices among true negatives and
    among hidden positives, so the product enumeration is exact.
    """
    scores = np.array(scores, dtype=np.float64)
    y = np.array(y_true, dtype=np.int8)
    y_star = np.array(y_observed, dtype=np.int8)
    n = scores.size
    if n > MAX_N:
        raise ValueError(f"enumeration bounded at n <= {MAX_N}, got {n}")
    if y.size != n or y_star.size != n:
        raise DataError("world arrays must have equal length")
    if np.any((y_star == 1) & (y == 0)):
        raise DataError("y_observed=1 requires y_true=1")

    n_pos = int(y.sum())
    n_star = int(y_star.sum())
    m = n_pos - n_star  # flips needed for #(c=1) == #(y=1)
    n_y0 = n - n_pos
    if n_y0 == 0:
        raise DataError("no admissible assignment: every example is a true positive")
    if n_pos == n:  # unreachable given the previous check; kept for clarity
        raise DataError("no admissible assignment: c=0 would be empty")

    # flipping a true negative causes an e1 error; skipping a hidden positive causes an e2 error
    pool0 = [int(i) for i in np.flatnonzero((y_star == 0) & (y == 0))]
    pool1 = [int(i) for i in np.flatnonzero((y_star == 0) & (y == 1))]
    if e < 0 or e > m:
        raise DataError(f"no admissible assignment: error count {e} outside [0, budget {m}]")
    if e > len(pool0):
        raise DataError(f"no admissible assignment: only {len(pool0)} true negatives for {e} type-1 errors")
    if m - e > len(pool1):
        raise DataError(f"no admissible assignment: only {len(pool1)} hidden positives for {m - e} correct flips")

    above = [int(v) for v in (scores > t)]
    n_admissible = comb(len(pool0), e) * comb(len(pool1), m - e)
    best0, subset0 = _best_pool_choice(pool0, e, above)
    best1, subset1 = _best_pool_choice(pool1, m - e, above)
    # the union of per-pool lex-minima is the lex-min over the product family
    argmax_ids = tuple(sorted(subset0 + subset1))
    max_exceed = best0 + best1

    # direct = flip the m highest-scoring observed negatives, ties by ascending id
    scored = [
        ScoredExample(id=i, score=float(scores[i]), y_true=int(y[i]), y_observed=int(y_star[i]))
        for i in range(n)
    ]
    direct = clean_direct_calibrated(scored, m)
    direct_ids = direct.flipped_ids()
    e_direct = sum(1 for i in direct_ids if y[i] == 0)
    if e_direct != e:
        raise DataError(f"the score-ranked cleaning commits {e_direct} type-1 errors, not {e}")
    direct_exceed = sum(above[i] for i in direct_ids)

    gap_of = _gap_formula(scores, y, y_star, n_pos, t)
    max_gap = gap_of(max_exceed)
    direct_gap = gap_of(direct_exceed)
    return ExtremalityReport(
        threshold=float(t),
        flip_budget=m,
        error_count=e,
        n_admissible=n_admissible,
        max_gap=float(max_gap),
        direct_gap=float(direct_gap),
        direct_attains_max=direct_exceed == max_exceed,
        direct_gap_nonnegative=direct_gap >= 0,
        argmax_flip_ids=argmax_ids,
        direct_flip_ids=direct_ids,
    )


def random_extremality_instance(
    rng: np.random.Generator,
    n_max: int = 12,
    max_errors: int = 2,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Random small world whose score-ranked cleaning commits few errors.

    Returns (scores, y_true, y_observed, e) where e is the type-1 error
    count the score-ranked cleaning realizes, capped at max_errors by
    resampling.  Half the draws correlate scores with the true label so the
    cleaning sometimes actually works; half leave them independent.
    """
    if n_max < 4:
        raise ValueError(f"need n_max >= 4, got {n_max}")
    while True:
        n = int(rng.integers(4, n_max + 1))
        scores = rng.random(n)
        if rng.random() < 0.5:
            scores = np.round(scores, 1)  # force ties
        y = (rng.random(n) < rng.uniform(0.2, 0.7)).astype(np.int8)
        if rng.random() < 0.5:
            scores = np.clip(scores * 0.6 + y * 0.4, 0.0, 1.0)
        n_pos = int(y.sum())
        if n_pos == 0 or n_pos == n:
            continue
        keep = rng.random(n) < rng.uniform(0.2, 1.0)
        y_star = (y.astype(bool) & keep).astype(np.int8)
        m = n_pos - int(y_star.sum())
        scored = [
            ScoredExample(id=i, score=float(scores[i]), y_true=int(y[i]), y_observed=int(y_star[i]))
            for i in range(n)
        ]
        direct = clean_direct_calibrated(scored, m)
        e = sum(1 for i in direct.flipped_ids() if y[i] == 0)
        if e <= max_errors:
            return scores, y, y_star, e


def _gap_formula(scores, y, y_star, n_pos, t):
    """FPR gap of an admissible cleaning as a function of its flip-set
    exceedance count, in exact rationals.

    c=0 is the observed negatives minus the flip set and has fixed size, so
    the gap depends on the flip set only through how many of its members
    score above t.
    """
    n = scores.size
    n_y0 = n - n_pos
    n_c0 = n - n_pos  # calibrated: #(c=1) = n_pos
    above = scores > t
    actual = Fraction(int((above & (y == 0)).sum()), n_y0)
    observed_neg_above = int((above & (y_star == 0)).sum())

    def gap(flip_exceed: int) -> Fraction:
        return actual - Fraction(observed_neg_above - flip_exceed, n_c0)

    return gap
