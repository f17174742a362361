"""Shared builders for small, fully deterministic test inputs."""

import numpy as np
import pytest

import cleanval as cv


def numeric_schema(n_features: int = 2) -> cv.FeatureSchema:
    return cv.FeatureSchema(
        columns=tuple(cv.Column(f"x{i}", cv.NUMERIC) for i in range(n_features)),
        label_column="label",
        timestamp_column="ts",
    )


def build_dataset(y_true, y_observed=None, X=None, timestamps=None, schema=None, ids=None):
    """Tiny Dataset with deterministic filler features unless given."""
    y_true = np.asarray(y_true, dtype=np.int8)
    n = y_true.size
    if y_observed is None:
        y_observed = y_true
    if X is None:
        X = np.column_stack([np.arange(n) * 0.1, (np.arange(n) % 3).astype(float)])
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if schema is None:
        schema = numeric_schema(X.shape[1])
    if timestamps is None:
        timestamps = np.arange(n, dtype=np.int64) * 1000
    if ids is None:
        ids = np.arange(n, dtype=np.int64)
    return cv.Dataset(
        schema=schema,
        feature_columns={f"x{i}": X[:, i] for i in range(X.shape[1])},
        y_true=y_true,
        y_observed=np.asarray(y_observed, dtype=np.int8),
        timestamp_ms=np.asarray(timestamps, dtype=np.int64),
        ids=np.asarray(ids, dtype=np.int64),
    )


def scored_examples(scores, y_true=None, y_observed=None, ids=None):
    scores = [float(s) for s in scores]
    n = len(scores)
    if y_true is None:
        y_true = [0] * n
    if y_observed is None:
        y_observed = list(y_true)
    if ids is None:
        ids = list(range(n))
    return [
        cv.ScoredExample(id=int(i), score=s, y_true=int(yt), y_observed=int(yo))
        for i, s, yt, yo in zip(ids, scores, y_true, y_observed)
    ]


def separable_dataset(n: int = 200, seed: int = 0):
    """Balanced 1-feature dataset with sign(x) = label and a wide margin.

    Balanced classes put a quantile bin edge inside the margin, so a boosted
    tree can reach training AUC 1.0.
    """
    assert n % 2 == 0
    rng = np.random.default_rng(seed)
    half = n // 2
    x = np.concatenate([rng.uniform(-2.0, -0.5, half), rng.uniform(0.5, 2.0, half)])
    y = np.concatenate([np.zeros(half, dtype=np.int8), np.ones(half, dtype=np.int8)])
    order = rng.permutation(n)
    return build_dataset(y[order], X=x[order])


@pytest.fixture
def tiny_dataset():
    return build_dataset([1, 1, 0, 0, 0, 0])
