"""Label-cleaning methods for noisy binary validation data.

Every method maps (scores, observed labels) to cleaned labels c with the
guarantee c=1 wherever y_observed=1: cleaning may surface hidden positives,
it never erases an observed one.  Methods differ in how they rank the
observed negatives and when they stop flipping.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .gbdt import ScoredExample
from .tabular import Dataset, DataError
from .util import round_half_up

METHOD_NONE = "none"
METHOD_DIRECT = "direct"
METHOD_CLEANLAB = "cleanlab"
METHOD_MICROMODEL = "micromodel"


@dataclass(frozen=True)
class CleaningAssignment:
    """Cleaned labels for one dataset, aligned by id.

    `rank_statistic` is the per-example ordering value the method used
    (model score or vote fraction), NaN for methods that rank nothing.
    """

    method: str
    ids: np.ndarray
    y_observed: np.ndarray
    c: np.ndarray
    rank_statistic: np.ndarray
    target_positive_rate: float | None
    achieved_positive_rate: float

    def __post_init__(self) -> None:
        ids = np.array(self.ids, dtype=np.int64)
        y_obs = np.array(self.y_observed, dtype=np.int8)
        c = np.array(self.c, dtype=np.int8)
        rank = np.array(self.rank_statistic, dtype=np.float64)
        n = len(ids)
        if not (len(y_obs) == len(c) == len(rank) == n):
            raise DataError("assignment arrays must have equal length")
        if len(np.unique(ids)) != n:
            raise DataError("assignment ids must be unique")
        for name, arr in (("y_observed", y_obs), ("c", c)):
            if not np.isin(arr, (0, 1)).all():
                raise DataError(f"{name} values must be 0 or 1")
        # cleaning can only add positives: observed 1s stay 1
        if np.any((y_obs == 1) & (c == 0)):
            raise DataError("cleaned label 0 on an observed positive violates the cleaning contract")
        for arr in (ids, y_obs, c, rank):
            arr.flags.writeable = False
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "y_observed", y_obs)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "rank_statistic", rank)

    @property
    def n(self) -> int:
        return len(self.ids)

    def positive_count(self) -> int:
        return int(self.c.sum())

    def flipped_ids(self) -> tuple[int, ...]:
        return tuple(int(i) for i in self.ids[(self.y_observed == 0) & (self.c == 1)])

    def c_for_ids(self, ids: Sequence[int]) -> np.ndarray:
        """Cleaned labels for the requested ids, in the requested order."""
        lookup = {int(i): int(v) for i, v in zip(self.ids, self.c)}
        try:
            return np.array([lookup[int(i)] for i in ids], dtype=np.int8)
        except KeyError as exc:
            raise DataError(f"id {exc.args[0]} not covered by the assignment") from None

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["id", "y_observed", "c", "rank_statistic", "method"])
            for i in range(self.n):
                r = self.rank_statistic[i]
                writer.writerow([
                    int(self.ids[i]),
                    int(self.y_observed[i]),
                    int(self.c[i]),
                    "" if np.isnan(r) else repr(float(r)),
                    self.method,
                ])


@dataclass(frozen=True)
class VoteMatrix:
    """Per-example binary votes from k ensemble members, plus vote fractions."""

    ids: np.ndarray
    y_observed: np.ndarray
    votes: np.ndarray  # shape (n, k)

    def __post_init__(self) -> None:
        ids = np.array(self.ids, dtype=np.int64)
        y_obs = np.array(self.y_observed, dtype=np.int8)
        votes = np.array(self.votes, dtype=np.int8)
        if votes.ndim != 2 or votes.shape[0] != len(ids) or len(y_obs) != len(ids):
            raise DataError("vote matrix shape does not match ids")
        if votes.size and not np.isin(votes, (0, 1)).all():
            raise DataError("votes must be 0 or 1")
        for arr in (ids, y_obs, votes):
            arr.flags.writeable = False
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "y_observed", y_obs)
        object.__setattr__(self, "votes", votes)

    @property
    def k(self) -> int:
        return self.votes.shape[1]

    def fractions(self) -> np.ndarray:
        return self.votes.sum(axis=1) / self.k

    @classmethod
    def from_member_scores(
        cls,
        member_scored: Sequence[Sequence[ScoredExample]],
        vote_threshold: float = 0.5,
    ) -> "VoteMatrix":
        """A member votes 1 when its score strictly exceeds the threshold.

        Members must score the same examples in the same order (they all
        come from `predict` on one dataset).
        """
        if not member_scored:
            raise DataError("need at least one member's scores")
        ids = [s.id for s in member_scored[0]]
        y_obs = [s.y_observed for s in member_scored[0]]
        votes = np.zeros((len(ids), len(member_scored)), dtype=np.int8)
        for j, scored in enumerate(member_scored):
            if [s.id for s in scored] != ids:
                raise DataError(f"member {j} scored different examples")
            votes[:, j] = [s.score > vote_threshold for s in scored]
        return cls(ids=np.asarray(ids), y_observed=np.asarray(y_obs), votes=votes)


class CleaningErrors(NamedTuple):
    e1_count: int
    e2_count: int
    e1_ids: tuple[int, ...]
    e2_ids: tuple[int, ...]


def clean_none(ds: Dataset) -> CleaningAssignment:
    """Take the observed labels at face value."""
    return CleaningAssignment(
        method=METHOD_NONE,
        ids=ds.ids,
        y_observed=ds.y_observed,
        c=ds.y_observed,
        rank_statistic=np.full(ds.n, np.nan),
        target_positive_rate=None,
        achieved_positive_rate=float(np.mean(ds.y_observed)) if ds.n else 0.0,
    )


def calibrated_flip_budget(ds: Dataset, p_y1: float) -> int:
    """Number of observed-0 labels to flip so #(c=1) hits round(p_y1 * n).

    Rounds half-up.  p_y1 below the observed positive rate is an error:
    observed positives cannot be un-flipped, so that rate is unreachable.
    """
    if not (0.0 <= p_y1 <= 1.0):
        raise ValueError(f"p_y1 must be in [0,1], got {p_y1}")
    if ds.n == 0:
        raise DataError("flip budget undefined on an empty dataset")
    n_star1 = int(ds.y_observed.sum())
    if p_y1 < n_star1 / ds.n:
        raise ValueError(
            f"target rate {p_y1} is below the observed positive rate {n_star1 / ds.n}"
        )
    return max(0, round_half_up(p_y1 * ds.n) - n_star1)


def _flip_ranked(
    ids: np.ndarray,
    y_observed: np.ndarray,
    rank: np.ndarray,
    candidate: np.ndarray,
    budget: int,
    method: str,
    target_rate: float | None,
) -> CleaningAssignment:
    """Flip up to `budget` candidates in descending rank order, ties by ascending id."""
    cand_idx = np.flatnonzero(candidate)
    # lexsort: last key is primary
    order = cand_idx[np.lexsort((ids[cand_idx], -rank[cand_idx]))]
    c = np.array(y_observed, dtype=np.int8)
    c[order[:budget]] = 1
    return CleaningAssignment(
        method=method,
        ids=ids,
        y_observed=y_observed,
        c=c,
        rank_statistic=rank,
        target_positive_rate=target_rate,
        achieved_positive_rate=float(c.mean()) if len(c) else 0.0,
    )


def _scored_arrays(scored: Sequence[ScoredExample]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ids = np.array([s.id for s in scored], dtype=np.int64)
    y_obs = np.array([s.y_observed for s in scored], dtype=np.int8)
    scores = np.array([s.score for s in scored], dtype=np.float64)
    return ids, y_obs, scores


def clean_direct_calibrated(
    scored: Sequence[ScoredExample],
    m: int,
    target_rate: float | None = None,
) -> CleaningAssignment:
    """Flip the m highest-scoring observed negatives (ties by ascending id).

    Equivalent to flipping every observed negative whose score exceeds a
    cutoff placed just below the m-th highest candidate score.
    """
    ids, y_obs, scores = _scored_arrays(scored)
    n_neg = int((y_obs == 0).sum())
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if m > n_neg:
        raise ValueError(f"cannot flip {m} of {n_neg} observed negatives")
    return _flip_ranked(ids, y_obs, scores, y_obs == 0, m, METHOD_DIRECT, target_rate)


def clean_cleanlab_style(scored: Sequence[ScoredExample], m_cap: int) -> CleaningAssignment:
    """Flip observed negatives scoring above the mean score of observed positives.

    The cutoff is self-calibrated from the data, so the candidate list can
    run out before m_cap flips; m_cap is a cap, not a quota.
    """
    if m_cap < 0:
        raise ValueError(f"m_cap must be >= 0, got {m_cap}")
    ids, y_obs, scores = _scored_arrays(scored)
    pos = y_obs == 1
    if not pos.any():
        raise DataError("cutoff undefined: no observed positives")
    tau = float(np.mean(scores[pos]))
    candidate = (y_obs == 0) & (scores > tau)
    return _flip_ranked(ids, y_obs, scores, candidate, m_cap, METHOD_CLEANLAB, None)


def clean_micromodel(votes: VoteMatrix, m: int) -> CleaningAssignment:
    """Flip observed negatives by descending vote fraction, m at most.

    Examples with zero votes are never flipped: unanimous consensus that an
    example is negative is a hard floor, so the achieved positive count may
    undershoot the budget.
    """
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    n_neg = int((votes.y_observed == 0).sum())
    if m > n_neg:
        raise ValueError(f"cannot flip {m} of {n_neg} observed negatives")
    fractions = votes.fractions()
    candidate = (votes.y_observed == 0) & (fractions > 0)
    return _flip_ranked(votes.ids, votes.y_observed, fractions, candidate, m, METHOD_MICROMODEL, None)


def cleaning_errors(assign: CleaningAssignment, ds: Dataset) -> CleaningErrors:
    """Count both cleaning error types against the true labels.

    A type-1 error marks a true negative as positive (c=1, y=0); a type-2
    error leaves a true positive marked negative (c=0, y=1).
    """
    if sorted(assign.ids.tolist()) != sorted(ds.ids.tolist()):
        raise DataError("assignment ids do not match the dataset")
    c = assign.c_for_ids(ds.ids)
    e1_mask = (c == 1) & (ds.y_true == 0)
    e2_mask = (c == 0) & (ds.y_true == 1)
    return CleaningErrors(
        e1_count=int(e1_mask.sum()),
        e2_count=int(e2_mask.sum()),
        e1_ids=tuple(int(i) for i in ds.ids[e1_mask]),
        e2_ids=tuple(int(i) for i in ds.ids[e2_mask]),
    )
