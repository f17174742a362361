from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import cleanval as cv

from conftest import build_dataset


class TestNoiseSpec:
    def test_defaults(self):
        spec = cv.NoiseSpec()
        assert spec.flip_fraction == 0.30
        assert spec.weighting == cv.TIME_LINEAR

    def test_fraction_bounds(self):
        with pytest.raises(ValueError):
            cv.NoiseSpec(flip_fraction=-0.1)
        with pytest.raises(ValueError):
            cv.NoiseSpec(flip_fraction=1.1)

    def test_weighting_validated(self):
        with pytest.raises(ValueError):
            cv.NoiseSpec(weighting="exponential")


class TestInjectNoise:
    def test_flip_fraction_zero_is_identity(self):
        ds = build_dataset([1, 1, 0, 0])
        noisy, report = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.0, seed=1))
        assert noisy.equals(ds)
        assert report.n_flipped == 0
        assert report.flipped_ids == ()
        assert report.realized_noise_rate == 0.0

    def test_flip_fraction_one_hides_every_positive(self):
        ds = build_dataset([1, 1, 0, 1, 0])
        noisy, report = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=1.0, seed=1))
        assert noisy.y_observed.sum() == 0
        assert noisy.y_true.tolist() == ds.y_true.tolist()
        assert report.n_flipped == 3
        assert sorted(report.flipped_ids) == [0, 1, 3]

    def test_exact_count_round_half_up(self):
        # 10 fraud, fraction 0.3 -> exactly 3; 0.25 -> round(2.5) = 3 as well
        y = np.array([1] * 10 + [0] * 10, dtype=np.int8)
        ds = build_dataset(y)
        _, r1 = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.3, seed=0))
        assert r1.n_fraud == 10 and r1.n_flipped == 3
        _, r2 = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.25, seed=0))
        assert r2.n_flipped == 3

    def test_requires_clean_input(self):
        ds = build_dataset([1, 1, 0], y_observed=[0, 1, 0])
        with pytest.raises(cv.DataError, match="clean"):
            cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.3, seed=0))

    def test_no_fraud_with_positive_fraction_rejected(self):
        ds = build_dataset([0, 0, 0])
        with pytest.raises(cv.DataError):
            cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.3, seed=0))

    def test_no_fraud_with_zero_fraction_ok(self):
        ds = build_dataset([0, 0, 0])
        noisy, report = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.0, seed=0))
        assert noisy.equals(ds)
        assert report.n_fraud == 0

    def test_deterministic(self):
        y = (np.arange(50) % 3 == 0).astype(np.int8)
        ds = build_dataset(y)
        a, ra = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.5, seed=42))
        b, rb = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.5, seed=42))
        assert a.equals(b) and ra.flipped_ids == rb.flipped_ids
        _, rc = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.5, seed=43))
        assert rc.flipped_ids != ra.flipped_ids

    def test_report_serializes(self):
        ds = build_dataset([1, 1, 0, 0])
        _, report = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.5, seed=3))
        d = report.to_dict()
        assert d["n_fraud"] == 2 and d["n_flipped"] == 1
        assert isinstance(d["flipped_ids"], list)

    @settings(max_examples=50, deadline=None)
    @given(
        n_fraud=st.integers(1, 30),
        n_legit=st.integers(0, 30),
        fraction=st.floats(0.0, 1.0),
        seed=st.integers(0, 10),
    )
    def test_count_exactness_and_constraint_property(self, n_fraud, n_legit, fraction, seed):
        y = np.array([1] * n_fraud + [0] * n_legit, dtype=np.int8)
        ds = build_dataset(y)
        noisy, report = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=fraction, seed=seed))
        assert report.n_flipped == cv.round_half_up(fraction * n_fraud)
        assert not np.any((noisy.y_observed == 1) & (noisy.y_true == 0))
        assert set(report.flipped_ids) <= set(ds.ids[ds.y_true == 1].tolist())
        assert noisy.y_true.sum() - noisy.y_observed.sum() == report.n_flipped


class TestTimeWeighting:
    def test_newer_fraud_flipped_with_linear_time_weight(self):
        # two fraud examples at elapsed 0 ms and 999 ms; weights 1 and 1000
        y = np.array([1, 1, 0], dtype=np.int8)
        ts = np.array([5000, 5999, 5500], dtype=np.int64)
        ds = build_dataset(y, timestamps=ts)
        hits = 0
        trials = 10_000
        for seed in range(trials):
            _, report = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.5, seed=seed))
            assert report.n_flipped == 1
            hits += report.flipped_ids[0] == 1
        assert abs(hits / trials - 1000 / 1001) <= 0.01

    def test_uniform_weighting_ignores_time(self):
        y = np.array([1, 1, 0], dtype=np.int8)
        ts = np.array([0, 999_999, 500], dtype=np.int64)
        ds = build_dataset(y, timestamps=ts)
        hits = 0
        trials = 4000
        for seed in range(trials):
            _, report = cv.inject_noise(
                ds, cv.NoiseSpec(flip_fraction=0.5, weighting=cv.UNIFORM, seed=seed)
            )
            hits += report.flipped_ids[0] == 1
        assert abs(hits / trials - 0.5) <= 0.03

    def test_oldest_fraud_still_flippable(self):
        # +1 ms offset keeps the oldest example's weight positive
        y = np.array([1, 1], dtype=np.int8)
        ds = build_dataset(y, timestamps=np.array([100, 200], dtype=np.int64))
        seen = set()
        for seed in range(200):
            _, report = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.5, seed=seed))
            seen.update(report.flipped_ids)
        assert seen == {0, 1}


class TestFraudRateIdentity:
    def test_stated_values(self):
        assert cv.true_fraud_rate_from_noise(0.0, 0.1) == pytest.approx(0.1)
        assert cv.true_fraud_rate_from_noise(1.0, 0.0) == pytest.approx(1.0)
        assert cv.true_fraud_rate_from_noise(0.2, 0.1) == pytest.approx(0.28)

    def test_out_of_range_rejected(self):
        for bad in (-0.1, 1.1):
            with pytest.raises(ValueError):
                cv.true_fraud_rate_from_noise(bad, 0.5)
            with pytest.raises(ValueError):
                cv.true_fraud_rate_from_noise(0.5, bad)

    def test_recovers_true_rate_after_injection_exactly(self):
        # exact rational arithmetic on realized counts
        y = (np.arange(40) % 4 == 0).astype(np.int8)  # 10 fraud of 40
        ds = build_dataset(y)
        noisy, report = cv.inject_noise(ds, cv.NoiseSpec(flip_fraction=0.3, seed=7))
        n = noisy.n
        n_star1 = int(noisy.y_observed.sum())
        hidden = Fraction(report.n_flipped, n - n_star1)
        p_star1 = Fraction(n_star1, n)
        recovered = p_star1 + hidden * (1 - p_star1)
        assert recovered == Fraction(int(ds.y_true.sum()), n)
        # the float API agrees to numerical precision
        via_api = cv.true_fraud_rate_from_noise(float(hidden), float(p_star1))
        assert via_api == pytest.approx(ds.fraud_rate(), abs=1e-12)
        # and the report's realized rate is that hidden-positive rate
        assert report.realized_noise_rate == pytest.approx(float(hidden))
