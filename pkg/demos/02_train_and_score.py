"""Train the boosted-tree scorer on noisy labels and round-trip it to disk.

The model never sees true labels: `use_labels="observed"` is the only
training mode, which keeps experiments honest by construction.  Scores
are probabilities from a logistic objective; serialization is exact, so a
reloaded model scores bit-for-bit identically.
"""

import tempfile

import numpy as np

import cleanval as cv

out_dir = tempfile.mkdtemp(prefix="cleanval_demo_")
manifest_path, data_path = cv.write_benchmark(out_dir, n=6_000, seed=1)
ds = cv.load_dataset(cv.parse_manifest(manifest_path), data_path)
print(f"benchmark: {ds.n} rows, fraud rate {ds.fraud_rate():.4f}")

noisy, _ = cv.inject_noise(ds, cv.NoiseSpec(0.30, cv.TIME_LINEAR, seed=3))
train_ds, val_ds = cv.split_train_validation(noisy, validation_fraction=0.3, seed=5)

config = cv.GbdtConfig(n_rounds=80, max_depth=3)
model = cv.train(train_ds, "observed", config)
print(f"trained {len(model.trees)} trees; "
      f"loss {model.train_loss[0]:.4f} -> {model.train_loss[-1]:.4f}")

scored = cv.predict(model, val_ds)
scores = np.array([s.score for s in scored])
y_true = np.array([s.y_true for s in scored])
print(f"validation scores in [{scores.min():.3f}, {scores.max():.3f}]")
print(f"mean score, true fraud:     {scores[y_true == 1].mean():.3f}")
print(f"mean score, true non-fraud: {scores[y_true == 0].mean():.3f}")

# exact serialization round trip
path = f"{out_dir}/model.json"
cv.save_model(model, path)
reloaded = cv.load_model(path)
rescored = cv.predict(reloaded, val_ds)
assert all(a.score == b.score for a, b in zip(scored, rescored))
print(f"saved and reloaded {path}: scores identical")
