"""Hide positives from a clean dataset and recover the true rate.

Class-conditional label noise only runs one way here: a true positive can
be observed as a negative (fraud not yet caught), never the reverse.  The
injector flips an exact count of positives, preferring newer transactions
under the time-linear weighting, and the observed rate plus the known
noise rate pin down the true rate again.
"""

import numpy as np

import cleanval as cv

rng = np.random.default_rng(0)
n = 2_000

# a minimal clean dataset: one feature, timestamps spread over ~23 days
schema = cv.FeatureSchema(
    columns=(cv.Column("amount", cv.NUMERIC),),
    label_column="is_fraud",
    timestamp_column="event_time",
)
y = (rng.random(n) < 0.10).astype(np.int8)
ds = cv.Dataset(
    schema=schema,
    feature_columns={"amount": rng.lognormal(3.0, 1.0, n)},
    y_true=y,
    y_observed=y,
    timestamp_ms=np.sort(rng.integers(0, 2_000_000_000, n)),
    ids=np.arange(n),
)
print(f"clean dataset: {ds.n} rows, fraud rate {ds.fraud_rate():.4f}")

spec = cv.NoiseSpec(flip_fraction=0.30, weighting=cv.TIME_LINEAR, seed=7)
noisy, report = cv.inject_noise(ds, spec)
print(f"flipped {report.n_flipped} of {report.n_fraud} positives "
      f"(realized noise rate {report.realized_noise_rate:.4f})")
print(f"observed rate dropped to {noisy.observed_positive_rate():.4f}")

# newer fraud is likelier to be hidden: compare median timestamps
flipped = np.isin(noisy.ids, report.flipped_ids)
kept = (noisy.y_true == 1) & ~flipped
print(f"median timestamp, flipped fraud: {np.median(noisy.timestamp_ms[flipped]):.3e} ms")
print(f"median timestamp, labeled fraud: {np.median(noisy.timestamp_ms[kept]):.3e} ms")

# the noise rate among observed negatives plus the observed rate
# recover the true rate exactly
recovered = cv.true_fraud_rate_from_noise(
    p_y1_given_ystar0=report.realized_noise_rate,
    p_ystar1=noisy.observed_positive_rate(),
)
print(f"recovered true rate {recovered:.6f} vs actual {ds.fraud_rate():.6f}")
