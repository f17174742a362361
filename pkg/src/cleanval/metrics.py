"""Threshold selection and FPR/TPR measurement on scored examples.

All rates use the strict inequality f > t: an example scoring exactly t is
not an alert.  Thresholds are searched over the observed scores, so the
reported threshold is always a score present in the data and the achieved
rate is the largest one not exceeding the target.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cleaning import CleaningAssignment
from .gbdt import ScoredExample
from .tabular import DataError

LABELS_TRUE = "true"
LABELS_OBSERVED = "observed"
LABELS_CLEANED = "cleaned"

# conditioning events for rate_at_threshold
_CONDITIONS = ("y=0", "y=1", "ystar=0", "ystar=1", "c=0", "c=1")


@dataclass(frozen=True)
class ThresholdReport:
    target_fpr: float
    threshold: float
    achieved_fpr: float

    def to_dict(self) -> dict:
        return {
            "target_fpr": self.target_fpr,
            "threshold": self.threshold,
            "achieved_fpr": self.achieved_fpr,
        }


@dataclass(frozen=True)
class MetricsReport:
    method: str
    target_fpr: float
    threshold: float
    fpr_estimate: float
    tpr_estimate: float
    fpr_actual: float
    delta_fpr: float
    relative_error: float

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "target_fpr": self.target_fpr,
            "threshold": self.threshold,
            "fpr_estimate": self.fpr_estimate,
            "tpr_estimate": self.tpr_estimate,
            "fpr_actual": self.fpr_actual,
            "delta_fpr": self.delta_fpr,
            "relative_error": self.relative_error,
        }


def _label_array(
    scored: Sequence[ScoredExample],
    labels: str,
    assignment: CleaningAssignment | None,
) -> np.ndarray:
    if labels == LABELS_TRUE:
        return np.array([s.y_true for s in scored], dtype=np.int8)
    if labels == LABELS_OBSERVED:
        return np.array([s.y_observed for s in scored], dtype=np.int8)
    if labels == LABELS_CLEANED:
        if assignment is None:
            raise ValueError("labels='cleaned' requires an assignment")
        return assignment.c_for_ids([s.id for s in scored])
    raise ValueError(f"labels must be one of true/observed/cleaned, got {labels!r}")


def threshold_for_fpr(
    scored: Sequence[ScoredExample],
    target_fpr: float,
    labels: str = LABELS_TRUE,
    assignment: CleaningAssignment | None = None,
) -> ThresholdReport:
    """Smallest observed score whose strict-exceedance FPR is <= target.

    The count of allowed false alerts is floor(target * n_neg) in exact
    rational arithmetic, so the achieved FPR is the largest step-function
    value not exceeding the target.
    """
    if not (0.0 < target_fpr < 1.0):
        raise ValueError(f"target_fpr must be in (0,1), got {target_fpr}")
    y = _label_array(scored, labels, assignment)
    scores = np.array([s.score for s in scored], dtype=np.float64)
    neg = np.sort(scores[y == 0])[::-1]  # descending
    n_neg = neg.size
    if n_neg == 0:
        raise DataError("no negative examples under the chosen labels")
    allowed = int(Fraction(target_fpr) * n_neg)  # floor for non-negative values
    t = float(neg[allowed])
    achieved = int((neg > t).sum()) / n_neg
    return ThresholdReport(target_fpr=target_fpr, threshold=t, achieved_fpr=achieved)


def rate_at_threshold(
    scored: Sequence[ScoredExample],
    t: float,
    conditioning: str,
    assignment: CleaningAssignment | None = None,
) -> float:
    """Empirical p(score > t | conditioning event), an exact count ratio."""
    if conditioning not in _CONDITIONS:
        raise ValueError(f"conditioning must be one of {_CONDITIONS}, got {conditioning!r}")
    field, value = conditioning.split("=")
    labels = {"y": LABELS_TRUE, "ystar": LABELS_OBSERVED, "c": LABELS_CLEANED}[field]
    arr = _label_array(scored, labels, assignment)
    mask = arr == int(value)
    k = int(mask.sum())
    if k == 0:
        raise DataError(f"conditioning set {conditioning!r} is empty")
    scores = np.array([s.score for s in scored], dtype=np.float64)
    return int((scores[mask] > t).sum()) / k


def evaluate_method(
    scored: Sequence[ScoredExample],
    assignment: CleaningAssignment,
    t: float,
    target_fpr: float,
) -> MetricsReport:
    """Measure estimated vs actual rates at a fixed threshold.

    `delta_fpr` keeps the sign (actual minus estimate); `relative_error`
    is the magnitude of that gap relative to the target.
    """
    fpr_estimate = rate_at_threshold(scored, t, "c=0", assignment)
    tpr_estimate = rate_at_threshold(scored, t, "c=1", assignment)
    fpr_actual = rate_at_threshold(scored, t, "y=0")
    return MetricsReport(
        method=assignment.method,
        target_fpr=target_fpr,
        threshold=t,
        fpr_estimate=fpr_estimate,
        tpr_estimate=tpr_estimate,
        fpr_actual=fpr_actual,
        delta_fpr=fpr_actual - fpr_estimate,
        relative_error=abs(fpr_estimate - fpr_actual) / target_fpr,
    )


def roc_points(
    scored: Sequence[ScoredExample],
    labels: str = LABELS_TRUE,
    assignment: CleaningAssignment | None = None,
) -> list[tuple[float, float, float]]:
    """(threshold, fpr, tpr) for every distinct score, descending threshold.

    A sentinel above the max score anchors the curve at (0, 0); rates are
    non-decreasing as the threshold drops.
    """
    y = _label_array(scored, labels, assignment)
    scores = np.array([s.score for s in scored], dtype=np.float64)
    n_neg = int((y == 0).sum())
    n_pos = int((y == 1).sum())
    if n_neg == 0 or n_pos == 0:
        raise DataError("ROC needs at least one positive and one negative")
    distinct = np.unique(scores)[::-1]
    thresholds = np.concatenate(([distinct[0] + 1.0], distinct))
    out = []
    for t in thresholds:
        above = scores > t
        out.append((
            float(t),
            int((above & (y == 0)).sum()) / n_neg,
            int((above & (y == 1)).sum()) / n_pos,
        ))
    return out
