"""The whole pipeline end to end, as the CLI would run it.

Generate a benchmark, write a JSON config, run the experiment, and read
the rendered tables.  The equivalent shell session is:

    cleanval run --config config.json
    cleanval theory-check --trials 200 --output theory_report.json
    cleanval emit --result out/result.json --format markdown

Every artifact except timings.json is byte-identical across reruns with
the same master seed.
"""

import json
import tempfile

import cleanval as cv

root = tempfile.mkdtemp(prefix="cleanval_demo_")
manifest_path, data_path = cv.write_benchmark(f"{root}/data", n=10_000, seed=0)

config_path = f"{root}/config.json"
with open(config_path, "w", encoding="utf-8") as fh:
    json.dump({
        "manifest": manifest_path,
        "data": data_path,
        "output_dir": f"{root}/out",
        "noise": {"flip_fraction": 0.30, "weighting": "time_linear"},
        "base_model": {"n_rounds": 120, "max_depth": 4},
        "micro_model": {"n_rounds": 60, "max_depth": 3},
        "n_micromodels": 8,
        "fpr_targets": [0.02, 0.04, 0.08],
        "master_seed": 0,
    }, fh, indent=2)

cfg = cv.load_config(config_path)
result = cv.run_experiment(cfg)
paths = cv.write_outputs(result, cfg.output_dir)

print(f"config hash {result.config_hash[:16]}..., "
      f"{result.n_train} train / {result.n_validation} validation rows")
print(f"hidden positives in validation: {result.validation_noise.n_flipped}, "
      f"flip budget {result.flip_budget}")
for name in sorted(paths):
    print(f"wrote {paths[name]}")

print("\n" + open(paths["tables.md"], encoding="utf-8").read())

# the identity suite doubles as a fast self-test of the algebra
theory = cv.run_theory_suite(seed=0, trials=100, n_max=20)
status = "ok" if theory["passed"] else "FAILED"
print(f"theory suite: {sum(e['runs'] for e in theory['checks'].values())} checks [{status}]")
