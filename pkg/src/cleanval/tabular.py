"""Tabular datasets for noisy-label experiments.

A `Dataset` is an immutable, column-oriented table of examples, each carrying
a feature vector, a true label, an observed (possibly noisy) label, and a
timestamp in epoch milliseconds.  Labels are binary; observed labels obey the
class-conditional constraint y_observed=1 => y_true=1, i.e. noise only hides
positives, it never invents them.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterator

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"


class SchemaError(ValueError):
    """Raised for invalid schema manifests or schema violations."""


class DataError(ValueError):
    """Raised for unparseable or inconsistent data files."""


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # NUMERIC or CATEGORICAL

    def __post_init__(self) -> None:
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaError(f"unknown column kind {self.kind!r} for {self.name!r}")


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature columns plus the label and timestamp column names."""

    columns: tuple[Column, ...]
    label_column: str
    timestamp_column: str

    def __post_init__(self) -> None:
        if not self.columns:
            raise SchemaError("schema needs at least one feature column")
        names = [c.name for c in self.columns]
        seen: set[str] = set()
        for name in names:
            if name in seen:
                raise SchemaError(f"duplicate column {name!r}")
            seen.add(name)
        for special, key in ((self.label_column, "label"), (self.timestamp_column, "timestamp")):
            if not special:
                raise SchemaError(f"missing {key!r} column name")
            if special in seen:
                raise SchemaError(f"{special!r} cannot be both a feature and the {key} column")
        if self.label_column == self.timestamp_column:
            raise SchemaError(f"{self.label_column!r} used as both label and timestamp")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    @property
    def feature_kinds(self) -> tuple[str, ...]:
        return tuple(c.kind for c in self.columns)

    @property
    def n_features(self) -> int:
        return len(self.columns)


@dataclass(frozen=True)
class Example:
    """Row view of a Dataset; features follow the schema's column order."""

    id: int
    features: tuple[float | str | None, ...]
    y_true: int
    y_observed: int
    timestamp_ms: int


class Dataset:
    """Immutable collection of examples with columnar storage.

    Numeric feature columns are float64 arrays with NaN for missing values;
    categorical columns are object arrays of token strings, None for missing.
    Safe to share across threads once constructed.
    """

    def __init__(
        self,
        schema: FeatureSchema,
        feature_columns: dict[str, np.ndarray],
        y_true: np.ndarray,
        y_observed: np.ndarray,
        timestamp_ms: np.ndarray,
        ids: np.ndarray,
    ) -> None:
        self.schema = schema
        n = len(ids)
        if set(feature_columns) != set(schema.feature_names):
            raise SchemaError("feature columns do not match schema")
        self._features = {}
        for col in schema.columns:
            values = feature_columns[col.name]
            if len(values) != n:
                raise DataError(f"column {col.name!r} has {len(values)} values, expected {n}")
            if col.kind == NUMERIC:
                values = np.array(values, dtype=np.float64)  # owned copy
                if np.isinf(values).any():
                    raise DataError(f"column {col.name!r} contains non-finite values")
            else:
                values = np.array(values, dtype=object)
            values.flags.writeable = False
            self._features[col.name] = values
        self.y_true = _as_label_array(y_true, n, "y_true")
        self.y_observed = _as_label_array(y_observed, n, "y_observed")
        self.timestamp_ms = np.array(timestamp_ms, dtype=np.int64)
        self.ids = np.array(ids, dtype=np.int64)
        if len(self.timestamp_ms) != n:
            raise DataError("timestamp length mismatch")
        if len(np.unique(self.ids)) != n:
            raise DataError("example ids must be unique")
        # class-conditional constraint: an observed positive is always a true positive
        if np.any((self.y_observed == 1) & (self.y_true == 0)):
            raise DataError("y_observed=1 with y_true=0 violates the class-conditional constraint")
        for arr in (self.y_true, self.y_observed, self.timestamp_ms, self.ids):
            arr.flags.writeable = False

    @property
    def n(self) -> int:
        return len(self.ids)

    def __len__(self) -> int:
        return self.n

    def feature_column(self, name: str) -> np.ndarray:
        return self._features[name]

    def fraud_rate(self) -> float:
        """Empirical p(y_true=1)."""
        if self.n == 0:
            raise DataError("fraud rate undefined on an empty dataset")
        return float(np.mean(self.y_true))

    def observed_positive_rate(self) -> float:
        """Empirical p(y_observed=1)."""
        if self.n == 0:
            raise DataError("observed rate undefined on an empty dataset")
        return float(np.mean(self.y_observed))

    def example(self, i: int) -> Example:
        feats = tuple(_cell(self._features[c.name][i], c.kind) for c in self.schema.columns)
        return Example(
            id=int(self.ids[i]),
            features=feats,
            y_true=int(self.y_true[i]),
            y_observed=int(self.y_observed[i]),
            timestamp_ms=int(self.timestamp_ms[i]),
        )

    def __iter__(self) -> Iterator[Example]:
        return (self.example(i) for i in range(self.n))

    def subset(self, indices: np.ndarray) -> "Dataset":
        """New Dataset with the selected rows (positional indices)."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            schema=self.schema,
            feature_columns={name: col[idx] for name, col in self._features.items()},
            y_true=self.y_true[idx],
            y_observed=self.y_observed[idx],
            timestamp_ms=self.timestamp_ms[idx],
            ids=self.ids[idx],
        )

    def with_observed_labels(self, y_observed: np.ndarray) -> "Dataset":
        """Copy of this dataset with replaced observed labels (y_true kept)."""
        return Dataset(
            schema=self.schema,
            feature_columns=dict(self._features),
            y_true=self.y_true,
            y_observed=y_observed,
            timestamp_ms=self.timestamp_ms,
            ids=self.ids,
        )

    def equals(self, other: "Dataset") -> bool:
        if self.schema != other.schema or self.n != other.n:
            return False
        if not (
            np.array_equal(self.ids, other.ids)
            and np.array_equal(self.y_true, other.y_true)
            and np.array_equal(self.y_observed, other.y_observed)
            and np.array_equal(self.timestamp_ms, other.timestamp_ms)
        ):
            return False
        for col in self.schema.columns:
            a, b = self._features[col.name], other._features[col.name]
            if col.kind == NUMERIC:
                if not np.array_equal(a, b, equal_nan=True):
                    return False
            elif not all(x == y for x, y in zip(a, b)):
                return False
        return True

    def to_csv(self, path: str) -> None:
        """Write the dataset as CSV (features, then label, then timestamp).

        The label column holds the observed label; a clean dataset therefore
        round-trips exactly through `load_dataset`.
        """
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(self.schema.feature_names) + [self.schema.label_column, self.schema.timestamp_column])
            for i in range(self.n):
                row: list[str] = []
                for col in self.schema.columns:
                    row.append(_format_cell(self._features[col.name][i], col.kind))
                row.append(str(int(self.y_observed[i])))
                row.append(str(int(self.timestamp_ms[i])))
                writer.writerow(row)


def _as_label_array(values: np.ndarray, n: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.int8)
    if len(arr) != n:
        raise DataError(f"{name} length mismatch")
    if not np.isin(arr, (0, 1)).all():
        raise DataError(f"{name} values must be 0 or 1")
    return arr


def _cell(value, kind: str) -> float | str | None:
    if kind == NUMERIC:
        v = float(value)
        return None if np.isnan(v) else v
    return None if value is None else str(value)


def _format_cell(value, kind: str) -> str:
    if kind == NUMERIC:
        v = float(value)
        return "" if np.isnan(v) else repr(v)
    return "" if value is None else str(value)


def parse_manifest(path: str) -> FeatureSchema:
    """Read a schema manifest: JSON with `columns`, `label` and `timestamp` keys.

    Each entry of `columns` is ``{"name": ..., "kind": "numeric"|"categorical"}``.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise SchemaError(f"manifest not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"manifest is not valid JSON: {path}: {exc}") from exc
    for key in ("columns", "label", "timestamp"):
        if key not in raw:
            raise SchemaError(f"manifest missing key {key!r}")
    columns = []
    for entry in raw["columns"]:
        if not isinstance(entry, dict) or "name" not in entry or "kind" not in entry:
            raise SchemaError(f"malformed column entry {entry!r}")
        columns.append(Column(name=str(entry["name"]), kind=str(entry["kind"])))
    return FeatureSchema(
        columns=tuple(columns),
        label_column=str(raw["label"]),
        timestamp_column=str(raw["timestamp"]),
    )


def load_dataset(schema: FeatureSchema, path: str) -> Dataset:
    """Load a CSV into a clean Dataset (y_true = y_observed = file label).

    The header must contain every schema column; extra columns are ignored.
    Labels must parse to 0/1; timestamps to integer milliseconds or RFC-3339
    datetimes.  Ids are assigned 0..n-1 in file order.
    """
    try:
        fh = open(path, "r", newline="", encoding="utf-8")
    except FileNotFoundError as exc:
        raise DataError(f"data file not found: {path}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty data file: {path}") from None
        positions: dict[str, int] = {}
        for needed in list(schema.feature_names) + [schema.label_column, schema.timestamp_column]:
            if needed not in header:
                raise DataError(f"column {needed!r} missing from CSV header")
            positions[needed] = header.index(needed)

        features: dict[str, list] = {name: [] for name in schema.feature_names}
        labels: list[int] = []
        timestamps: list[int] = []
        for row_no, row in enumerate(reader, start=2):  # 1-based, header is row 1
            if len(row) < len(header):
                raise DataError(f"row {row_no}: expected {len(header)} fields, got {len(row)}")
            labels.append(_parse_label(row[positions[schema.label_column]], row_no))
            timestamps.append(_parse_timestamp(row[positions[schema.timestamp_column]], row_no))
            for col in schema.columns:
                token = row[positions[col.name]]
                if col.kind == NUMERIC:
                    features[col.name].append(_parse_numeric(token, col.name, row_no))
                else:
                    features[col.name].append(token if token != "" else None)
    if not labels:
        raise DataError(f"no data rows in {path}")
    n = len(labels)
    y = np.asarray(labels, dtype=np.int8)
    columns = {}
    for col in schema.columns:
        if col.kind == NUMERIC:
            columns[col.name] = np.asarray(features[col.name], dtype=np.float64)
        else:
            columns[col.name] = np.asarray(features[col.name], dtype=object)
    return Dataset(
        schema=schema,
        feature_columns=columns,
        y_true=y,
        y_observed=y,
        timestamp_ms=np.asarray(timestamps, dtype=np.int64),
        ids=np.arange(n, dtype=np.int64),
    )


def _parse_label(token: str, row_no: int) -> int:
    token = token.strip()
    try:
        value = float(token)
    except ValueError:
        raise DataError(f"row {row_no}: label {token!r} is not a number") from None
    if value not in (0.0, 1.0):
        raise DataError(f"row {row_no}: label {token!r} is not 0 or 1")
    return int(value)


def _parse_numeric(token: str, column: str, row_no: int) -> float:
    token = token.strip()
    if token == "":
        return float("nan")
    try:
        value = float(token)
    except ValueError:
        raise DataError(f"row {row_no}: column {column!r} value {token!r} is not numeric") from None
    if not np.isfinite(value):
        raise DataError(f"row {row_no}: column {column!r} value {token!r} is not finite")
    return value


def _parse_timestamp(token: str, row_no: int) -> int:
    """Integer tokens are taken as epoch milliseconds; otherwise RFC-3339."""
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(token.replace("Z", "+00:00"))
    except ValueError:
        raise DataError(f"row {row_no}: timestamp {token!r} is neither integer ms nor RFC-3339") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp() * 1000)


def split_train_validation(ds: Dataset, validation_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded shuffle, then split into (train, validation).

    The validation size is round-half-up of ``validation_fraction * n``; both
    splits must be non-empty.  Each split is returned in ascending-id order.
    """
    from .util import round_half_up

    if ds.n < 2:
        raise DataError("need at least 2 examples to split")
    if not (0.0 < validation_fraction < 1.0):
        raise ValueError(f"validation_fraction must be in (0,1), got {validation_fraction}")
    n_val = round_half_up(validation_fraction * ds.n)
    if n_val == 0 or n_val == ds.n:
        raise DataError(f"validation_fraction {validation_fraction} leaves an empty split for n={ds.n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(ds.n)
    val_idx = np.sort(perm[:n_val])
    train_idx = np.sort(perm[n_val:])
    return ds.subset(train_idx), ds.subset(val_idx)


def slice_shuffled(ds: Dataset, k: int, seed: int) -> list[Dataset]:
    """Seeded shuffle, then k disjoint near-equal slices (sizes differ by <= 1)."""
    if k < 2:
        raise ValueError(f"need k >= 2 slices, got {k}")
    if k > ds.n:
        raise DataError(f"cannot cut {ds.n} examples into {k} slices")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(ds.n)
    return [ds.subset(np.sort(part)) for part in np.array_split(perm, k)]
