"""Executable checks of the cleaning-error identities on empirical worlds.

An EmpiricalWorld is a finite population of (score, y_true, y_observed, c)
tuples; every probability is an exact count ratio, so each identity is
verified in rational arithmetic and the 1e-12 tolerance only absorbs the
final float conversion.

The two cleaning error events are
    e1: c=1 but y_true=0  (a true negative marked positive)
    e2: c=0 but y_true=1  (a true positive left marked negative)
and the count identity  #(c=1) - #(y=1) = #e1 - #e2  holds for every world,
which makes "calibrated" (#(c=1) = #(y=1)) equivalent to #e1 = #e2.

For a calibrated cleaning, splitting each conditioning set by the other
label gives the exact error decompositions verified here:

    FPR_actual - FPR_est = [p(f>t, e1) - p(f>t, e2)] / p(y=0)
    TPR_actual - TPR_est = -[p(f>t, e1) - p(f>t, e2)] / p(y=1)

(p(c=0) = p(y=0) and p(c=1) = p(y=1) under calibration, so either marginal
may appear in the denominators).  The numerator is a covariance contrast:
with R_i := p(f>t, e_i) - p(f>t) p(e_i) and p(e1) = p(e2), it equals
R1 - R2, so estimates are exact precisely when score exceedance is equally
correlated with both error types.  Dividing the two decompositions gives
the ratio identity  TPR gap / FPR gap = -p(c=0)/p(c=1).

Note the constant multiplying the conditional bracket
[p(f>t|e1) - p(f>t|e2)] is p(e)/p(y=0), NOT p(c=1): writing the gap as
p(c=1) times the bracket is only valid when the cleaning errors are
independent of the true label, which calibration does not imply.  A
four-example counterexample lives in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .tabular import DataError

TOLERANCE = 1e-12


@dataclass(frozen=True)
class IdentityReport:
    name: str
    lhs: float
    rhs: float
    gap: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "passed": self.passed,
        }


class EmpiricalWorld:
    """Finite scored population with true, observed, and cleaned labels."""

    def __init__(self, scores, y_true, y_observed, c) -> None:
        self.scores = np.array(scores, dtype=np.float64)
        self.y_true = np.array(y_true, dtype=np.int8)
        self.y_observed = np.array(y_observed, dtype=np.int8)
        self.c = np.array(c, dtype=np.int8)
        n = self.scores.size
        if not (self.y_true.size == self.y_observed.size == self.c.size == n):
            raise DataError("world arrays must have equal length")
        if n == 0:
            raise DataError("world must contain at least one example")
        if not np.isfinite(self.scores).all():
            raise DataError("scores must be finite")
        for name, arr in (("y_true", self.y_true), ("y_observed", self.y_observed), ("c", self.c)):
            if not np.isin(arr, (0, 1)).all():
                raise DataError(f"{name} values must be 0 or 1")
        if np.any((self.y_observed == 1) & (self.y_true == 0)):
            raise DataError("y_observed=1 requires y_true=1")
        if np.any((self.y_observed == 1) & (self.c == 0)):
            raise DataError("c=0 on an observed positive violates the cleaning contract")
        for arr in (self.scores, self.y_true, self.y_observed, self.c):
            arr.flags.writeable = False
        # per-event sorted score arrays make exceedance counts O(log n)
        self._sorted = {
            name: np.sort(self.scores[mask])
            for name, mask in self._event_masks().items()
        }

    def _event_masks(self) -> dict[str, np.ndarray]:
        y, c = self.y_true, self.c
        ones = np.ones(self.n, dtype=bool)
        return {
            "all": ones,
            "y=0": y == 0,
            "y=1": y == 1,
            "c=0": c == 0,
            "c=1": c == 1,
            "e1": (c == 1) & (y == 0),
            "e2": (c == 0) & (y == 1),
        }

    @property
    def n(self) -> int:
        return self.scores.size

    def count(self, event: str) -> int:
        return self._sorted[event].size

    def count_above(self, event: str, t: float) -> int:
        arr = self._sorted[event]
        return int(arr.size - np.searchsorted(arr, t, side="right"))

    def prob(self, event: str) -> Fraction:
        return Fraction(self.count(event), self.n)

    def prob_above(self, event: str, t: float) -> Fraction:
        """p(score > t, event) as an exact fraction of the whole population."""
        return Fraction(self.count_above(event, t), self.n)

    def prob_above_given(self, event: str, t: float) -> Fraction:
        k = self.count(event)
        if k == 0:
            raise DataError(f"conditioning event {event!r} is empty")
        return Fraction(self.count_above(event, t), k)

    def is_calibrated(self) -> bool:
        return self.count("c=1") == self.count("y=1")

    def distinct_scores(self) -> np.ndarray:
        return np.unique(self.scores)

    def to_dict(self) -> dict:
        return {
            "scores": self.scores.tolist(),
            "y_true": self.y_true.tolist(),
            "y_observed": self.y_observed.tolist(),
            "c": self.c.tolist(),
        }


def _report(name: str, lhs: Fraction, rhs: Fraction) -> IdentityReport:
    gap = abs(float(lhs - rhs))
    return IdentityReport(name=name, lhs=float(lhs), rhs=float(rhs), gap=gap, passed=gap <= TOLERANCE)


def check_calibration_balance(world: EmpiricalWorld) -> IdentityReport:
    """#(c=1) - #(y=1) = #e1 - #e2, exactly, on every world.

    Both directions of the calibration equivalence follow: the left side is
    zero iff the right side is.
    """
    lhs = Fraction(world.count("c=1") - world.count("y=1"))
    rhs = Fraction(world.count("e1") - world.count("e2"))
    return _report("calibration_balance", lhs, rhs)


def _require_calibrated(world: EmpiricalWorld) -> None:
    if not world.is_calibrated():
        raise DataError("identity requires a calibrated world (#(c=1) == #(y=1))")


def _error_contrast(world: EmpiricalWorld, t: float) -> Fraction:
    """p(f>t, e1) - p(f>t, e2) as exact joint probabilities.

    Empty error events contribute 0 with no special casing; when both are
    nonempty this equals p(e) / 2 times the conditional bracket
    [p(f>t|e1) - p(f>t|e2)] on a calibrated world (where p(e1) = p(e2)).
    """
    return world.prob_above("e1", t) - world.prob_above("e2", t)


def check_fpr_gap(world: EmpiricalWorld, t: float) -> IdentityReport:
    """FPR_actual - FPR_est = [p(f>t, e1) - p(f>t, e2)] / p(y=0), calibrated worlds.

    The denominator may equivalently be written p(c=0).  Scaling the
    conditional bracket [p(f>t|e1) - p(f>t|e2)] instead, the constant is
    p(e1)/p(y=0); it is NOT p(c=1) unless the errors happen to be
    independent of the true label.
    """
    _require_calibrated(world)
    if world.count("y=0") == 0 or world.count("c=0") == 0:
        raise DataError("FPR gap needs nonempty y=0 and c=0")
    lhs = world.prob_above_given("y=0", t) - world.prob_above_given("c=0", t)
    rhs = _error_contrast(world, t) / world.prob("y=0")
    return _report("fpr_gap", lhs, rhs)


def check_tpr_gap(world: EmpiricalWorld, t: float) -> IdentityReport:
    """TPR_actual - TPR_est = -[p(f>t, e1) - p(f>t, e2)] / p(y=1), calibrated worlds.

    Same contrast as the FPR gap, opposite sign, scaled by the positive
    mass: moving an error between the conditioning sets trades one gap for
    the other at rate -p(y=0)/p(y=1).
    """
    _require_calibrated(world)
    if world.count("y=1") == 0 or world.count("c=1") == 0:
        raise DataError("TPR gap needs nonempty y=1 and c=1")
    lhs = world.prob_above_given("y=1", t) - world.prob_above_given("c=1", t)
    rhs = -_error_contrast(world, t) / world.prob("y=1")
    return _report("tpr_gap", lhs, rhs)


def check_covariance_form(world: EmpiricalWorld, t: float) -> IdentityReport:
    """FPR gap as a covariance contrast of score exceedance with the error events.

    With R_i := p(f>t, e_i) - p(f>t) p(e_i):
    FPR_actual - FPR_est = (R1 - R2) / p(y=0).  Calibration makes
    p(e1) = p(e2), so the product terms cancel and R1 - R2 collapses to the
    joint contrast; estimates are exact at t precisely when exceedance
    covaries equally with both error types.  When p(e) = 0 every R_i is
    zero and both sides degenerate to zero.
    """
    _require_calibrated(world)
    if world.count("y=0") == 0 or world.count("c=0") == 0:
        raise DataError("FPR gap needs nonempty y=0 and c=0")
    lhs = world.prob_above_given("y=0", t) - world.prob_above_given("c=0", t)
    r1 = world.prob_above("e1", t) - world.prob_above("all", t) * world.prob("e1")
    r2 = world.prob_above("e2", t) - world.prob_above("all", t) * world.prob("e2")
    rhs = (r1 - r2) / world.prob("y=0")
    return _report("covariance_form", lhs, rhs)


def check_gap_ratio(world: EmpiricalWorld, t: float) -> IdentityReport | None:
    """TPR gap / FPR gap = -p(c=0)/p(c=1); None when the FPR gap is zero."""
    _require_calibrated(world)
    if world.count("y=0") == 0 or world.count("c=0") == 0:
        raise DataError("gap ratio needs nonempty y=0 and c=0")
    if world.count("y=1") == 0 or world.count("c=1") == 0:
        raise DataError("gap ratio needs nonempty y=1 and c=1")
    fpr_gap = world.prob_above_given("y=0", t) - world.prob_above_given("c=0", t)
    if fpr_gap == 0:
        return None
    tpr_gap = world.prob_above_given("y=1", t) - world.prob_above_given("c=1", t)
    lhs = tpr_gap / fpr_gap
    rhs = -world.prob("c=0") / world.prob("c=1")
    return _report("gap_ratio", lhs, rhs)


def random_world(
    rng: np.random.Generator,
    n: int,
    calibrated: bool = True,
    tie_scores: bool = False,
) -> EmpiricalWorld:
    """Random world respecting both label constraints.

    Scores are uniform; `tie_scores` quantizes them to one decimal so that
    exceedance ties actually occur.  For calibrated worlds the cleaned
    positives are completed to exactly #(y=1) by a uniform choice among the
    observed negatives; otherwise the completion count is forced away from
    the calibrated one.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    while True:
        scores = rng.random(n)
        if tie_scores:
            scores = np.round(scores, 1)
        y = (rng.random(n) < rng.uniform(0.2, 0.8)).astype(np.int8)
        keep = rng.random(n) < rng.uniform(0.2, 1.0)  # survival of the observed positive
        y_star = (y.astype(bool) & keep).astype(np.int8)
        n_pos = int(y.sum())
        n_star = int(y_star.sum())
        pool = np.flatnonzero(y_star == 0)
        want = n_pos - n_star  # completion count that calibrates
        if calibrated:
            extra = want
        else:
            options = [k for k in range(pool.size + 1) if k != want]
            if not options:
                continue
            extra = int(rng.choice(options))
        c = np.array(y_star)
        if extra:
            c[rng.choice(pool, size=extra, replace=False)] = 1
        world = EmpiricalWorld(scores, y, y_star, c)
        # gap checks need all four of y=0/y=1/c=0/c=1 nonempty
        if min(world.count("y=0"), world.count("y=1"), world.count("c=0"), world.count("c=1")) > 0:
            return world
