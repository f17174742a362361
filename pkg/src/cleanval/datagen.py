"""Synthetic card-transaction benchmark with a known fraud mechanism.

Generates a mixed categorical/numeric table whose fraud probability is a
steep logistic function of a latent risk score, so the classes are nearly
separable and the true fraud rate is controlled.  Useful for exercising
the full pipeline when no real transaction data is at hand.

The CSV deliberately contains one extra column (`txn_uuid`) that the
manifest does not mention, plus sprinkled missing values in both numeric
and categorical columns.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

DEFAULT_FRAUD_RATE = 0.057
_START_MS = 1_704_067_200_000  # 2024-01-01T00:00:00Z
_SPAN_MS = 90 * 24 * 3600 * 1000

# (name, number of tokens, loading scale)
_CATEGORICAL = (
    ("merchant_category", 12, 1.4),
    ("merchant_state", 20, 0.8),
    ("card_network", 4, 0.6),
    ("channel", 3, 1.0),
    ("device_os", 5, 0.9),
    ("merchant_size", 4, 0.7),
    ("pos_entry_mode", 6, 1.1),
    ("currency", 8, 0.5),
    ("customer_segment", 5, 0.8),
    ("issuer_bank", 10, 0.9),
)
_NUMERIC = (
    "amount",
    "account_age_days",
    "txn_hour",
    "distance_km",
    "amount_to_avg_ratio",
    "velocity_24h",
)


def benchmark_manifest() -> dict:
    columns = [{"name": name, "kind": "categorical"} for name, _, _ in _CATEGORICAL]
    columns += [{"name": name, "kind": "numeric"} for name in _NUMERIC]
    return {"columns": columns, "label": "is_fraud", "timestamp": "event_time"}


def _solve_intercept(z: np.ndarray, steepness: float, target_rate: float) -> float:
    """Bisect the logistic intercept so the mean fraud probability hits the target."""
    lo, hi = -30.0, 30.0
    for _ in range(80):
        mid = (lo + hi) / 2
        if _expit(steepness * z + mid).mean() < target_rate:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def _expit(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def generate_benchmark(
    n: int,
    seed: int,
    fraud_rate: float = DEFAULT_FRAUD_RATE,
    steepness: float = 5.0,
):
    """Return (column dict, y, timestamps, uuids) for n synthetic transactions."""
    if n < 10:
        raise ValueError(f"need n >= 10, got {n}")
    if not (0.0 < fraud_rate < 0.5):
        raise ValueError(f"fraud_rate must be in (0, 0.5), got {fraud_rate}")
    rng = np.random.default_rng(seed)
    z = np.zeros(n, dtype=np.float64)
    columns: dict[str, np.ndarray] = {}

    for name, n_tokens, scale in _CATEGORICAL:
        popularity = rng.dirichlet(np.full(n_tokens, 2.0))
        idx = rng.choice(n_tokens, size=n, p=popularity)
        loadings = rng.normal(0.0, scale, size=n_tokens)
        z += loadings[idx]
        tokens = np.array([f"{name[:3]}_{j:02d}" for j in range(n_tokens)], dtype=object)
        columns[name] = tokens[idx]

    amount = rng.lognormal(3.0, 1.0, size=n)
    age = rng.uniform(1.0, 2000.0, size=n)
    hour = rng.integers(0, 24, size=n).astype(np.float64)
    distance = rng.exponential(50.0, size=n)
    ratio = rng.lognormal(0.0, 0.8, size=n)
    velocity = rng.poisson(2.0, size=n).astype(np.float64)
    z += 1.2 * (np.log(amount) - 3.0)
    z += -0.7 * (age - 1000.0) / 577.0
    z += 0.8 * np.cos(2.0 * np.pi * (hour - 3.0) / 24.0)
    z += 0.6 * (distance / 50.0 - 1.0)
    z += 1.0 * np.log(ratio) / 0.8
    z += 0.9 * (velocity - 2.0) / 1.4
    columns["amount"] = amount
    columns["account_age_days"] = age
    columns["txn_hour"] = hour
    columns["distance_km"] = distance
    columns["amount_to_avg_ratio"] = ratio
    columns["velocity_24h"] = velocity

    z = (z - z.mean()) / z.std()
    intercept = _solve_intercept(z, steepness, fraud_rate)
    p = _expit(steepness * z + intercept)
    y = (rng.random(n) < p).astype(np.int8)

    # missingness is independent of the risk score
    for name in _NUMERIC:
        if name == "amount":
            continue
        miss = rng.random(n) < 0.02
        col = np.array(columns[name])
        col[miss] = np.nan
        columns[name] = col
    for name, _, _ in _CATEGORICAL:
        miss = rng.random(n) < 0.01
        col = np.array(columns[name], dtype=object)
        col[miss] = None
        columns[name] = col

    timestamps = _START_MS + rng.integers(0, _SPAN_MS, size=n)
    uuids = np.array([f"{v:032x}" for v in rng.integers(0, 2**63, size=n, dtype=np.uint64)], dtype=object)
    return columns, y, timestamps, uuids


def write_benchmark(
    out_dir: str,
    n: int = 50_000,
    seed: int = 0,
    fraud_rate: float = DEFAULT_FRAUD_RATE,
    steepness: float = 5.0,
) -> tuple[str, str]:
    """Write manifest.json and transactions.csv; returns their paths."""
    os.makedirs(out_dir, exist_ok=True)
    manifest_path = os.path.join(out_dir, "manifest.json")
    data_path = os.path.join(out_dir, "transactions.csv")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(benchmark_manifest(), fh, indent=2)
        fh.write("\n")

    columns, y, timestamps, uuids = generate_benchmark(n, seed, fraud_rate, steepness)
    cat_names = [name for name, _, _ in _CATEGORICAL]
    with open(data_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["txn_uuid"] + cat_names + list(_NUMERIC) + ["is_fraud", "event_time"])
        for i in range(n):
            row = [uuids[i]]
            for name in cat_names:
                v = columns[name][i]
                row.append("" if v is None else v)
            for name in _NUMERIC:
                v = columns[name][i]
                row.append("" if np.isnan(v) else repr(float(v)))
            row.append(str(int(y[i])))
            row.append(str(int(timestamps[i])))
            writer.writerow(row)
    return manifest_path, data_path
