"""Gradient-boosted decision trees for mixed tabular data, from scratch.

Logistic-loss boosting with histogram split finding over quantile bins.
Categorical columns are encoded with smoothed per-category target statistics
learned on the training fold; missing numeric values occupy a dedicated bin
(index 0) so a split can isolate them.  Training is fully deterministic given
the data and config: no subsampling, ties in split gain resolve to the lowest
feature index, then the lowest bin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .tabular import CATEGORICAL, NUMERIC, Dataset, SchemaError
from .util import derive_seed

MODEL_FORMAT_VERSION = 1

# L2 regularization on leaf hessians; also keeps leaf values finite on pure leaves.
_HESSIAN_REG = 1.0
_MIN_GAIN = 1e-12
# Smoothing strength pulling per-category target means toward the prior.
_CATEGORY_SMOOTHING = 10.0
# Laplace count added on each side when a training fold is single-class.
_LAPLACE = 1.0


@dataclass(frozen=True)
class GbdtConfig:
    n_rounds: int = 500
    max_depth: int = 6
    learning_rate: float = 0.1
    n_bins: int = 64
    min_leaf: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_rounds < 1:
            raise ValueError(f"n_rounds must be >= 1, got {self.n_rounds}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if not (0.0 < self.learning_rate <= 1.0):
            raise ValueError(f"learning_rate must be in (0,1], got {self.learning_rate}")
        if self.n_bins < 2:
            raise ValueError(f"n_bins must be >= 2, got {self.n_bins}")
        if self.min_leaf < 1:
            raise ValueError(f"min_leaf must be >= 1, got {self.min_leaf}")


@dataclass(frozen=True)
class ScoredExample:
    id: int
    score: float
    y_true: int
    y_observed: int


@dataclass
class CategoryEncoder:
    """Smoothed target statistics for one categorical column."""

    mapping: dict[str, float]
    missing_value: float
    prior: float

    def encode(self, tokens: np.ndarray) -> np.ndarray:
        get = self.mapping.get
        prior, missing = self.prior, self.missing_value
        return np.fromiter(
            (missing if t is None else get(t, prior) for t in tokens),
            dtype=np.float64,
            count=len(tokens),
        )


@dataclass
class Tree:
    """Flat node arrays; feature == -1 marks a leaf."""

    feature: np.ndarray
    bin_threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def leaf_values(self, binned: np.ndarray) -> np.ndarray:
        cur = np.zeros(binned.shape[0], dtype=np.int32)
        while True:
            feat = self.feature[cur]
            internal = np.flatnonzero(feat >= 0)
            if internal.size == 0:
                break
            nodes = cur[internal]
            go_left = binned[internal, feat[internal]] <= self.bin_threshold[nodes]
            cur[internal] = np.where(go_left, self.left[nodes], self.right[nodes])
        return self.value[cur]


@dataclass
class Model:
    """Trained scorer mapping examples to probabilities in [0, 1]."""

    feature_names: tuple[str, ...]
    feature_kinds: tuple[str, ...]
    config: GbdtConfig
    base_log_odds: float
    encoders: dict[str, CategoryEncoder]
    bin_edges: list[np.ndarray]
    trees: list[Tree]
    degenerate: bool = False
    train_loss: tuple[float, ...] = field(default_factory=tuple)

    def score_dataset(self, ds: Dataset) -> np.ndarray:
        self._check_schema(ds)
        z = np.full(ds.n, self.base_log_odds, dtype=np.float64)
        if self.trees:
            binned = _bin_matrix(self._encode(ds), self.bin_edges)
            for tree in self.trees:
                z += tree.leaf_values(binned)
        return _sigmoid(z)

    def _check_schema(self, ds: Dataset) -> None:
        if ds.schema.feature_names != self.feature_names or ds.schema.feature_kinds != self.feature_kinds:
            raise SchemaError(
                "dataset schema does not match the model "
                f"(model: {len(self.feature_names)} features, dataset: {ds.schema.n_features})"
            )

    def _encode(self, ds: Dataset) -> np.ndarray:
        X = np.empty((ds.n, len(self.feature_names)), dtype=np.float64)
        for j, (name, kind) in enumerate(zip(self.feature_names, self.feature_kinds)):
            col = ds.feature_column(name)
            X[:, j] = self.encoders[name].encode(col) if kind == CATEGORICAL else col
        return X


def train(ds: Dataset, use_labels: str, cfg: GbdtConfig) -> Model:
    """Fit a logistic-loss GBDT on the dataset's observed or true labels.

    A single-class training fold yields a degenerate constant model scoring
    the Laplace-smoothed prior (flagged, not an error): micro-model slices of
    rare-positive data can legitimately contain no positives.
    """
    y = _select_labels(ds, use_labels)
    n = ds.n
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    n_pos = int(y.sum())
    names, kinds = ds.schema.feature_names, ds.schema.feature_kinds
    if n_pos == 0 or n_pos == n:
        p = (n_pos + _LAPLACE) / (n + 2 * _LAPLACE)
        return Model(
            feature_names=names,
            feature_kinds=kinds,
            config=cfg,
            base_log_odds=float(np.log(p / (1 - p))),
            encoders={},
            bin_edges=[],
            trees=[],
            degenerate=True,
            train_loss=(),
        )

    yf = y.astype(np.float64)
    prior = float(yf.mean())
    encoders = {
        name: _fit_encoder(ds.feature_column(name), yf, prior)
        for name, kind in zip(names, kinds)
        if kind == CATEGORICAL
    }
    model = Model(
        feature_names=names,
        feature_kinds=kinds,
        config=cfg,
        base_log_odds=float(np.log(prior / (1 - prior))),
        encoders=encoders,
        bin_edges=[],
        trees=[],
    )
    X = model._encode(ds)
    model.bin_edges = [_quantile_edges(X[:, j], cfg.n_bins) for j in range(X.shape[1])]
    binned = _bin_matrix(X, model.bin_edges)

    z = np.full(n, model.base_log_odds, dtype=np.float64)
    losses = [_logloss(yf, z)]
    for _ in range(cfg.n_rounds):
        p = _sigmoid(z)
        tree = _build_tree(binned, p - yf, p * (1 - p), cfg)
        delta = tree.leaf_values(binned)
        # step-halving guard: a Newton step can overshoot on extreme leaves;
        # shrink until the training loss is non-increasing
        scale = 1.0
        z_new = z + delta
        loss_new = _logloss(yf, z_new)
        while loss_new > losses[-1] and scale > 2**-20:
            scale *= 0.5
            z_new = z + scale * delta
            loss_new = _logloss(yf, z_new)
        if loss_new > losses[-1]:
            losses.append(losses[-1])  # give up on this round, keep the curve aligned
            continue
        if scale != 1.0:
            tree.value = tree.value * scale
        model.trees.append(tree)
        z = z_new
        losses.append(loss_new)
    model.train_loss = tuple(losses)
    return model


def predict(model: Model, ds: Dataset) -> list[ScoredExample]:
    """Score every example, preserving dataset order."""
    scores = model.score_dataset(ds)
    return [
        ScoredExample(
            id=int(ds.ids[i]),
            score=float(scores[i]),
            y_true=int(ds.y_true[i]),
            y_observed=int(ds.y_observed[i]),
        )
        for i in range(ds.n)
    ]


def train_micromodels(
    train_ds: Dataset,
    k: int,
    cfg: GbdtConfig | None = None,
    seed: int = 0,
) -> list[Model]:
    """Train k models on disjoint shuffled slices of the training data.

    Members default to 100 boosting rounds: individually weak, mutually
    independent by construction (disjoint data).
    """
    from .tabular import slice_shuffled

    if cfg is None:
        cfg = GbdtConfig(n_rounds=100)
    slices = slice_shuffled(train_ds, k, seed)
    return [
        train(part, "observed", replace(cfg, seed=derive_seed(seed, f"member-{i}")))
        for i, part in enumerate(slices)
    ]


def _select_labels(ds: Dataset, use_labels: str) -> np.ndarray:
    if use_labels == "observed":
        return ds.y_observed
    if use_labels == "true":
        return ds.y_true
    raise ValueError(f"use_labels must be 'observed' or 'true', got {use_labels!r}")


def _fit_encoder(tokens: np.ndarray, yf: np.ndarray, prior: float) -> CategoryEncoder:
    sums: dict = {}
    counts: dict = {}
    for t, label in zip(tokens, yf):
        sums[t] = sums.get(t, 0.0) + label
        counts[t] = counts.get(t, 0) + 1
    m = _CATEGORY_SMOOTHING
    stats = {t: (sums[t] + m * prior) / (counts[t] + m) for t in sums}
    missing = stats.pop(None, prior)
    return CategoryEncoder(mapping=stats, missing_value=missing, prior=prior)


def _quantile_edges(values: np.ndarray, n_bins: int) -> np.ndarray:
    present = values[~np.isnan(values)]
    if present.size == 0:
        return np.empty(0, dtype=np.float64)
    qs = np.arange(1, n_bins) / n_bins
    return np.unique(np.quantile(present, qs))


def _bin_matrix(X: np.ndarray, edges: list[np.ndarray]) -> np.ndarray:
    """Bin 0 holds missing values; present values land in 1..len(edges)+1."""
    n, d = X.shape
    binned = np.zeros((n, d), dtype=np.int32)
    for j in range(d):
        col = X[:, j]
        present = ~np.isnan(col)
        binned[present, j] = np.searchsorted(edges[j], col[present], side="left") + 1
    return binned


def _build_tree(binned: np.ndarray, g: np.ndarray, h: np.ndarray, cfg: GbdtConfig) -> Tree:
    n, d = binned.shape
    n_bins_total = cfg.n_bins + 1  # bin 0 is the missing-value bin
    lam = _HESSIAN_REG

    feature = [-1]
    bin_threshold = [0]
    left = [-1]
    right = [-1]
    value = [0.0]

    # per-example compact index of its frontier node; -1 once settled in a leaf
    membership = np.zeros(n, dtype=np.int64)
    frontier = [(0, float(g.sum()), float(h.sum()), n)]  # (node id, G, H, count)

    for _ in range(cfg.max_depth):
        if not frontier:
            break
        n_front = len(frontier)
        live = membership >= 0
        idx = np.flatnonzero(live)
        flat = (membership[idx, None] * d + np.arange(d)) * n_bins_total + binned[idx]
        flat = flat.ravel()
        size = n_front * d * n_bins_total
        rep_g = np.broadcast_to(g[idx, None], (idx.size, d)).ravel()
        rep_h = np.broadcast_to(h[idx, None], (idx.size, d)).ravel()
        hist_g = np.bincount(flat, weights=rep_g, minlength=size).reshape(n_front, d, n_bins_total)
        hist_h = np.bincount(flat, weights=rep_h, minlength=size).reshape(n_front, d, n_bins_total)
        hist_c = np.bincount(flat, minlength=size).reshape(n_front, d, n_bins_total)

        split_feat = np.full(n_front, -1, dtype=np.int64)
        split_bin = np.zeros(n_front, dtype=np.int64)
        next_frontier = []
        child_left = np.full(n_front, -1, dtype=np.int64)  # compact ids in next frontier

        for j, (nid, G, H, cnt) in enumerate(frontier):
            best = _best_split(hist_g[j], hist_h[j], hist_c[j], G, H, cnt, cfg.min_leaf, lam)
            if best is None:
                value[nid] = -cfg.learning_rate * G / (H + lam)
                continue
            f, b, stats_left, stats_right = best
            split_feat[j] = f
            split_bin[j] = b
            feature[nid] = f
            bin_threshold[nid] = b
            left_id, right_id = len(feature), len(feature) + 1
            left[nid], right[nid] = left_id, right_id
            for _nid in (left_id, right_id):
                feature.append(-1)
                bin_threshold.append(0)
                left.append(-1)
                right.append(-1)
                value.append(0.0)
            child_left[j] = len(next_frontier)
            next_frontier.append((left_id, *stats_left))
            next_frontier.append((right_id, *stats_right))

        # route live examples to children; examples in finished leaves drop out
        feats = split_feat[membership[idx]]
        settled = feats < 0
        membership[idx[settled]] = -1
        moving = idx[~settled]
        if moving.size:
            mf = split_feat[membership[moving]]
            goes_right = binned[moving, mf] > split_bin[membership[moving]]
            membership[moving] = child_left[membership[moving]] + goes_right
        frontier = next_frontier

    # nodes still on the frontier at max depth become leaves
    for nid, G, H, _ in frontier:
        value[nid] = -cfg.learning_rate * G / (H + lam)

    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        bin_threshold=np.asarray(bin_threshold, dtype=np.int32),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=np.asarray(value, dtype=np.float64),
    )


def _best_split(
    gb: np.ndarray,
    hb: np.ndarray,
    cb: np.ndarray,
    G: float,
    H: float,
    cnt: int,
    min_leaf: int,
    lam: float,
):
    """Best (feature, bin) split of one node, or None if nothing gains.

    Candidate b sends bins <= b left.  First maximum wins, so ties resolve
    to the lowest feature index, then the lowest bin.
    """
    if cnt < 2 * min_leaf:
        return None
    GL = np.cumsum(gb, axis=1)[:, :-1]
    HL = np.cumsum(hb, axis=1)[:, :-1]
    CL = np.cumsum(cb, axis=1)[:, :-1]
    Gf = GL[:, -1:] + gb[:, -1:]  # per-feature totals, consistent with the cumsums
    Hf = HL[:, -1:] + hb[:, -1:]
    GR = Gf - GL
    HR = Hf - HL
    CR = cnt - CL
    parent_score = G * G / (H + lam)
    gain = GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent_score
    gain[(CL < min_leaf) | (CR < min_leaf)] = -np.inf
    flat_best = int(np.argmax(gain))
    f, b = divmod(flat_best, gain.shape[1])
    if not (gain[f, b] > _MIN_GAIN):
        return None
    stats_left = (float(GL[f, b]), float(HL[f, b]), int(CL[f, b]))
    stats_right = (float(GR[f, b]), float(HR[f, b]), int(CR[f, b]))
    return f, b, stats_left, stats_right


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _logloss(yf: np.ndarray, z: np.ndarray) -> float:
    return float(np.mean(np.logaddexp(0.0, z) - yf * z))


# -- serialization -------------------------------------------------------


def model_to_dict(model: Model) -> dict:
    """Versioned JSON-safe representation; `model_from_dict` restores scores bit-identically."""
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "feature_names": list(model.feature_names),
        "feature_kinds": list(model.feature_kinds),
        "config": {
            "n_rounds": model.config.n_rounds,
            "max_depth": model.config.max_depth,
            "learning_rate": model.config.learning_rate,
            "n_bins": model.config.n_bins,
            "min_leaf": model.config.min_leaf,
            "seed": model.config.seed,
        },
        "base_log_odds": model.base_log_odds,
        "degenerate": model.degenerate,
        "train_loss": list(model.train_loss),
        "encoders": {
            name: {
                "mapping": enc.mapping,
                "missing_value": enc.missing_value,
                "prior": enc.prior,
            }
            for name, enc in model.encoders.items()
        },
        "bin_edges": [edges.tolist() for edges in model.bin_edges],
        "trees": [
            {
                "feature": tree.feature.tolist(),
                "bin_threshold": tree.bin_threshold.tolist(),
                "left": tree.left.tolist(),
                "right": tree.right.tolist(),
                "value": tree.value.tolist(),
            }
            for tree in model.trees
        ],
    }


def model_from_dict(obj: dict) -> Model:
    version = obj.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {version!r}")
    return Model(
        feature_names=tuple(obj["feature_names"]),
        feature_kinds=tuple(obj["feature_kinds"]),
        config=GbdtConfig(**obj["config"]),
        base_log_odds=float(obj["base_log_odds"]),
        encoders={
            name: CategoryEncoder(
                mapping=dict(raw["mapping"]),
                missing_value=float(raw["missing_value"]),
                prior=float(raw["prior"]),
            )
            for name, raw in obj["encoders"].items()
        },
        bin_edges=[np.asarray(edges, dtype=np.float64) for edges in obj["bin_edges"]],
        trees=[
            Tree(
                feature=np.asarray(raw["feature"], dtype=np.int32),
                bin_threshold=np.asarray(raw["bin_threshold"], dtype=np.int32),
                left=np.asarray(raw["left"], dtype=np.int32),
                right=np.asarray(raw["right"], dtype=np.int32),
                value=np.asarray(raw["value"], dtype=np.float64),
            )
            for raw in obj["trees"]
        ],
        degenerate=bool(obj["degenerate"]),
        train_loss=tuple(obj["train_loss"]),
    )


def save_model(model: Model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path: str) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
