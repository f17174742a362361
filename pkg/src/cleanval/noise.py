"""Class-conditional label noise: hide positives, never invent them.

Only examples with y_true=1 can have their observed label flipped to 0, so
the noised dataset always satisfies y_observed=1 => y_true=1.  Under
time-linear weighting, more recent examples are more likely to be flipped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tabular import Dataset, DataError
from .util import round_half_up

TIME_LINEAR = "time_linear"
UNIFORM = "uniform"


@dataclass(frozen=True)
class NoiseSpec:
    flip_fraction: float = 0.30
    weighting: str = TIME_LINEAR
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.flip_fraction <= 1.0):
            raise ValueError(f"flip_fraction must be in [0,1], got {self.flip_fraction}")
        if self.weighting not in (TIME_LINEAR, UNIFORM):
            raise ValueError(f"weighting must be {TIME_LINEAR!r} or {UNIFORM!r}, got {self.weighting!r}")


@dataclass(frozen=True)
class NoiseReport:
    n_fraud: int
    n_flipped: int
    flipped_ids: tuple[int, ...]
    realized_noise_rate: float  # p(y_true=1 | y_observed=0) in the noised output

    def to_dict(self) -> dict:
        return {
            "n_fraud": self.n_fraud,
            "n_flipped": self.n_flipped,
            "flipped_ids": list(self.flipped_ids),
            "realized_noise_rate": self.realized_noise_rate,
        }


def inject_noise(ds: Dataset, spec: NoiseSpec) -> tuple[Dataset, NoiseReport]:
    """Flip exactly round-half-up(flip_fraction * n_fraud) positives to observed 0.

    Sampling is without replacement.  Time-linear weighting gives example i
    weight (timestamp_i - min_timestamp) + 1 ms, where min_timestamp is the
    oldest timestamp in the whole dataset; the +1 keeps the oldest example
    flippable.
    """
    if not np.array_equal(ds.y_true, ds.y_observed):
        raise DataError("inject_noise requires a clean dataset (y_true == y_observed)")
    fraud_idx = np.flatnonzero(ds.y_true == 1)
    n_fraud = int(fraud_idx.size)
    if spec.flip_fraction > 0 and n_fraud == 0:
        raise DataError("cannot inject noise: no positive examples to flip")
    n_flip = round_half_up(spec.flip_fraction * n_fraud)
    if n_flip == 0:
        return ds, NoiseReport(n_fraud=n_fraud, n_flipped=0, flipped_ids=(), realized_noise_rate=0.0)

    if spec.weighting == TIME_LINEAR:
        elapsed = ds.timestamp_ms[fraud_idx] - int(ds.timestamp_ms.min())
        weights = elapsed.astype(np.float64) + 1.0
        p = weights / weights.sum()
    else:
        p = None
    rng = np.random.default_rng(spec.seed)
    chosen = rng.choice(fraud_idx, size=n_flip, replace=False, p=p)

    y_observed = np.array(ds.y_observed)
    y_observed[chosen] = 0
    noised = ds.with_observed_labels(y_observed)
    n_observed_zero = ds.n - (n_fraud - n_flip)
    return noised, NoiseReport(
        n_fraud=n_fraud,
        n_flipped=n_flip,
        flipped_ids=tuple(sorted(int(ds.ids[i]) for i in chosen)),
        realized_noise_rate=n_flip / n_observed_zero,
    )


def true_fraud_rate_from_noise(p_y1_given_ystar0: float, p_ystar1: float) -> float:
    """Recover the true positive rate from the noise rate and the observed rate.

    Under class-conditional noise every true positive is either observed
    positive or hidden among the observed negatives, so
    p(y=1) = p(y*=1) + p(y=1 | y*=0) * (1 - p(y*=1)).
    """
    for name, value in (("p_y1_given_ystar0", p_y1_given_ystar0), ("p_ystar1", p_ystar1)):
        if not (0.0 <= value <= 1.0):
            raise ValueError(f"{name} must be in [0,1], got {value}")
    return p_ystar1 + p_y1_given_ystar0 * (1.0 - p_ystar1)
