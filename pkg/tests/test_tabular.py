import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import cleanval as cv

from conftest import build_dataset


class TestSchema:
    def test_column_kind_validated(self):
        with pytest.raises(cv.SchemaError):
            cv.Column("x", "text")

    def test_duplicate_feature_names_rejected(self):
        with pytest.raises(cv.SchemaError, match="duplicate"):
            cv.FeatureSchema(
                columns=(cv.Column("a", cv.NUMERIC), cv.Column("a", cv.CATEGORICAL)),
                label_column="label",
                timestamp_column="ts",
            )

    def test_label_cannot_be_feature(self):
        with pytest.raises(cv.SchemaError):
            cv.FeatureSchema(
                columns=(cv.Column("a", cv.NUMERIC),),
                label_column="a",
                timestamp_column="ts",
            )

    def test_label_timestamp_distinct(self):
        with pytest.raises(cv.SchemaError):
            cv.FeatureSchema(
                columns=(cv.Column("a", cv.NUMERIC),),
                label_column="y",
                timestamp_column="y",
            )

    def test_needs_a_feature(self):
        with pytest.raises(cv.SchemaError):
            cv.FeatureSchema(columns=(), label_column="y", timestamp_column="ts")

    def test_properties(self):
        schema = cv.FeatureSchema(
            columns=(cv.Column("a", cv.NUMERIC), cv.Column("b", cv.CATEGORICAL)),
            label_column="y",
            timestamp_column="ts",
        )
        assert schema.feature_names == ("a", "b")
        assert schema.feature_kinds == (cv.NUMERIC, cv.CATEGORICAL)
        assert schema.n_features == 2


class TestDataset:
    def test_observed_positive_needs_true_positive(self):
        with pytest.raises(cv.DataError, match="class-conditional"):
            build_dataset(y_true=[0, 1], y_observed=[1, 1])

    def test_hiding_positives_is_fine(self):
        ds = build_dataset(y_true=[1, 1, 0], y_observed=[0, 1, 0])
        assert ds.fraud_rate() == pytest.approx(2 / 3)
        assert ds.observed_positive_rate() == pytest.approx(1 / 3)

    def test_labels_must_be_binary(self):
        with pytest.raises(cv.DataError):
            build_dataset(y_true=[0, 2])

    def test_ids_must_be_unique(self):
        with pytest.raises(cv.DataError, match="unique"):
            build_dataset(y_true=[0, 0], ids=[3, 3])

    def test_non_finite_feature_rejected(self):
        with pytest.raises(cv.DataError):
            build_dataset(y_true=[0, 0], X=np.array([1.0, np.inf]))

    def test_nan_feature_means_missing(self):
        ds = build_dataset(y_true=[0, 0], X=np.array([1.0, np.nan]))
        ex = ds.example(1)
        assert ex.features == (None,)

    def test_arrays_frozen(self):
        ds = build_dataset(y_true=[0, 1])
        with pytest.raises(ValueError):
            ds.y_true[0] = 1
        with pytest.raises(ValueError):
            ds.feature_column("x0")[0] = 9.0

    def test_iteration_matches_columns(self):
        ds = build_dataset(y_true=[1, 0], y_observed=[0, 0], X=np.array([[1.0, 5.0], [2.0, 6.0]]))
        rows = list(ds)
        assert [r.id for r in rows] == [0, 1]
        assert rows[0].features == (1.0, 5.0)
        assert rows[0].y_true == 1 and rows[0].y_observed == 0
        assert rows[1].timestamp_ms == 1000

    def test_subset_picks_rows(self):
        ds = build_dataset(y_true=[0, 1, 0, 1])
        sub = ds.subset(np.array([1, 3]))
        assert sub.n == 2
        assert sub.ids.tolist() == [1, 3]
        assert sub.y_true.tolist() == [1, 1]

    def test_with_observed_labels_keeps_truth(self):
        ds = build_dataset(y_true=[1, 1, 0])
        noisy = ds.with_observed_labels(np.array([0, 1, 0]))
        assert noisy.y_true.tolist() == [1, 1, 0]
        assert noisy.y_observed.tolist() == [0, 1, 0]
        # original untouched
        assert ds.y_observed.tolist() == [1, 1, 0]

    def test_equals_detects_category_difference(self):
        schema = cv.FeatureSchema(
            columns=(cv.Column("c", cv.CATEGORICAL),),
            label_column="label",
            timestamp_column="ts",
        )
        kwargs = dict(
            schema=schema,
            y_true=np.array([0, 1]),
            y_observed=np.array([0, 1]),
            timestamp_ms=np.array([0, 1]),
            ids=np.array([0, 1]),
        )
        a = cv.Dataset(feature_columns={"c": np.array(["x", "y"], dtype=object)}, **kwargs)
        b = cv.Dataset(feature_columns={"c": np.array(["x", "y"], dtype=object)}, **kwargs)
        d = cv.Dataset(feature_columns={"c": np.array(["x", "z"], dtype=object)}, **kwargs)
        assert a.equals(b)
        assert not a.equals(d)

    def test_equals_treats_nan_as_equal(self):
        a = build_dataset(y_true=[0, 0], X=np.array([1.0, np.nan]))
        b = build_dataset(y_true=[0, 0], X=np.array([1.0, np.nan]))
        assert a.equals(b)


class TestManifest:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({
            "columns": [
                {"name": "amount", "kind": "numeric"},
                {"name": "merchant", "kind": "categorical"},
            ],
            "label": "is_fraud",
            "timestamp": "event_time",
        }))
        schema = cv.parse_manifest(str(path))
        assert schema.feature_names == ("amount", "merchant")
        assert schema.label_column == "is_fraud"
        assert schema.timestamp_column == "event_time"

    def test_missing_key(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"columns": [], "label": "y"}))
        with pytest.raises(cv.SchemaError, match="timestamp"):
            cv.parse_manifest(str(path))

    def test_not_json(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("not json {")
        with pytest.raises(cv.SchemaError):
            cv.parse_manifest(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(cv.SchemaError):
            cv.parse_manifest(str(tmp_path / "nope.json"))

    def test_malformed_column_entry(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"columns": [{"name": "a"}], "label": "y", "timestamp": "ts"}))
        with pytest.raises(cv.SchemaError, match="column"):
            cv.parse_manifest(str(path))


class TestLoadDataset:
    def write_csv(self, tmp_path, text):
        path = tmp_path / "data.csv"
        path.write_text(text)
        return str(path)

    def schema(self):
        return cv.FeatureSchema(
            columns=(cv.Column("amount", cv.NUMERIC), cv.Column("merchant", cv.CATEGORICAL)),
            label_column="label",
            timestamp_column="ts",
        )

    def test_happy_path_with_extra_column(self, tmp_path):
        path = self.write_csv(tmp_path, "\n".join([
            "ignored,amount,merchant,label,ts",
            "junk,10.5,shoes,1,1000",
            "junk,,books,0,2000",
            "junk,3.25,,0,3000",
        ]) + "\n")
        ds = cv.load_dataset(self.schema(), path)
        assert ds.n == 3
        assert ds.ids.tolist() == [0, 1, 2]
        assert ds.y_true.tolist() == [1, 0, 0]
        # clean load: observed == true
        assert np.array_equal(ds.y_true, ds.y_observed)
        amount = ds.feature_column("amount")
        assert amount[0] == 10.5 and np.isnan(amount[1])
        assert ds.feature_column("merchant").tolist() == ["shoes", "books", None]
        assert ds.timestamp_ms.tolist() == [1000, 2000, 3000]

    def test_rfc3339_timestamps(self, tmp_path):
        path = self.write_csv(tmp_path, "\n".join([
            "amount,merchant,label,ts",
            "1.0,a,0,1970-01-01T00:00:01Z",
            "2.0,b,0,1970-01-01T00:00:02+00:00",
        ]) + "\n")
        ds = cv.load_dataset(self.schema(), path)
        assert ds.timestamp_ms.tolist() == [1000, 2000]

    def test_missing_header_column(self, tmp_path):
        path = self.write_csv(tmp_path, "amount,label,ts\n1.0,0,0\n")
        with pytest.raises(cv.DataError, match="merchant"):
            cv.load_dataset(self.schema(), path)

    def test_bad_label_reports_row(self, tmp_path):
        path = self.write_csv(tmp_path, "amount,merchant,label,ts\n1.0,a,2,0\n")
        with pytest.raises(cv.DataError, match="row 2"):
            cv.load_dataset(self.schema(), path)

    def test_bad_numeric_reports_column(self, tmp_path):
        path = self.write_csv(tmp_path, "amount,merchant,label,ts\nabc,a,0,0\n")
        with pytest.raises(cv.DataError, match="amount"):
            cv.load_dataset(self.schema(), path)

    def test_bad_timestamp(self, tmp_path):
        path = self.write_csv(tmp_path, "amount,merchant,label,ts\n1.0,a,0,yesterday\n")
        with pytest.raises(cv.DataError, match="timestamp"):
            cv.load_dataset(self.schema(), path)

    def test_empty_file(self, tmp_path):
        path = self.write_csv(tmp_path, "")
        with pytest.raises(cv.DataError, match="empty"):
            cv.load_dataset(self.schema(), path)

    def test_header_only(self, tmp_path):
        path = self.write_csv(tmp_path, "amount,merchant,label,ts\n")
        with pytest.raises(cv.DataError, match="no data rows"):
            cv.load_dataset(self.schema(), path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(cv.DataError, match="not found"):
            cv.load_dataset(self.schema(), str(tmp_path / "nope.csv"))

    def test_to_csv_round_trip(self, tmp_path):
        schema = self.schema()
        ds = cv.Dataset(
            schema=schema,
            feature_columns={
                "amount": np.array([1.5, np.nan, 0.25]),
                "merchant": np.array(["a", None, "c"], dtype=object),
            },
            y_true=np.array([1, 0, 0]),
            y_observed=np.array([1, 0, 0]),
            timestamp_ms=np.array([10, 20, 30]),
            ids=np.array([0, 1, 2]),
        )
        path = str(tmp_path / "out.csv")
        ds.to_csv(path)
        again = cv.load_dataset(schema, path)
        assert ds.equals(again)


class TestSplit:
    def test_sizes_round_half_up(self):
        ds = build_dataset(np.zeros(10, dtype=np.int8))
        train, val = cv.split_train_validation(ds, 0.25, seed=0)
        assert (train.n, val.n) == (7, 3)  # round_half_up(2.5) = 3

    def test_partition_and_order(self):
        ds = build_dataset(np.arange(20) % 2)
        train, val = cv.split_train_validation(ds, 0.3, seed=5)
        ids = sorted(train.ids.tolist() + val.ids.tolist())
        assert ids == list(range(20))
        assert train.ids.tolist() == sorted(train.ids.tolist())
        assert val.ids.tolist() == sorted(val.ids.tolist())

    def test_deterministic(self):
        ds = build_dataset(np.arange(30) % 2)
        a = cv.split_train_validation(ds, 0.5, seed=9)
        b = cv.split_train_validation(ds, 0.5, seed=9)
        assert a[0].equals(b[0]) and a[1].equals(b[1])
        c = cv.split_train_validation(ds, 0.5, seed=10)
        assert not a[1].equals(c[1])

    def test_bad_fraction(self):
        ds = build_dataset([0, 1])
        for frac in (0.0, 1.0, -0.2, 1.5):
            with pytest.raises(ValueError):
                cv.split_train_validation(ds, frac, seed=0)

    def test_degenerate_split_rejected(self):
        ds = build_dataset([0, 1, 0])
        with pytest.raises(cv.DataError):
            cv.split_train_validation(ds, 0.01, seed=0)  # rounds to an empty validation

    def test_too_small(self):
        ds = build_dataset([0])
        with pytest.raises(cv.DataError):
            cv.split_train_validation(ds, 0.5, seed=0)


class TestSliceShuffled:
    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(2, 60), k=st.integers(2, 8), seed=st.integers(0, 5))
    def test_partition_property(self, n, k, seed):
        if k > n:
            return
        ds = build_dataset(np.arange(n) % 2)
        slices = cv.slice_shuffled(ds, k, seed)
        assert len(slices) == k
        all_ids = sorted(i for s in slices for i in s.ids.tolist())
        assert all_ids == list(range(n))
        sizes = [s.n for s in slices]
        assert max(sizes) - min(sizes) <= 1

    def test_k_bounds(self):
        ds = build_dataset([0, 1, 0])
        with pytest.raises(ValueError):
            cv.slice_shuffled(ds, 1, seed=0)
        with pytest.raises(cv.DataError):
            cv.slice_shuffled(ds, 4, seed=0)

    def test_deterministic(self):
        ds = build_dataset(np.arange(12) % 2)
        a = cv.slice_shuffled(ds, 3, seed=1)
        b = cv.slice_shuffled(ds, 3, seed=1)
        assert all(x.equals(y) for x, y in zip(a, b))
