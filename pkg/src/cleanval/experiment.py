"""End-to-end experiment harness: load, noise, train, clean, evaluate.

The pipeline mirrors a realistic deployment study: labels are hidden from a
clean dataset to a known degree, a model is trained on the noisy training
half, the threshold that hits each FPR target is read off the clean
validation labels, and each cleaning method is judged by how close its
estimated FPR at that threshold comes to the actual one.

Every stage draws its seed from the master seed keyed by stage name, so a
config plus master seed reproduces every emitted number byte for byte.
Wall-clock timings are collected but kept out of the deterministic outputs.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .cleaning import (
    METHOD_CLEANLAB,
    METHOD_DIRECT,
    METHOD_MICROMODEL,
    METHOD_NONE,
    CleaningAssignment,
    VoteMatrix,
    calibrated_flip_budget,
    clean_cleanlab_style,
    clean_direct_calibrated,
    clean_micromodel,
    clean_none,
)
from .extremality import brute_force_max_fpr_gap, random_extremality_instance
from .gbdt import GbdtConfig, predict, train, train_micromodels
from .identities import (
    check_calibration_balance,
    check_covariance_form,
    check_fpr_gap,
    check_gap_ratio,
    check_tpr_gap,
    random_world,
)
from .metrics import MetricsReport, ThresholdReport, evaluate_method, threshold_for_fpr
from .noise import NoiseReport, NoiseSpec, inject_noise
from .tabular import load_dataset, parse_manifest, split_train_validation
from .util import derive_seed

DEFAULT_FPR_TARGETS = (0.01, 0.02, 0.04, 0.08)
DEFAULT_METHODS = (METHOD_NONE, METHOD_DIRECT, METHOD_CLEANLAB, METHOD_MICROMODEL)


class ConfigError(ValueError):
    """Raised for unreadable, malformed, or invalid experiment configs."""


class ExperimentError(RuntimeError):
    """A pipeline stage failed; carries the stage name, cause preserved."""

    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


@dataclass(frozen=True)
class ExperimentConfig:
    manifest_path: str
    data_path: str
    output_dir: str = "."
    validation_fraction: float = 0.3
    noise_flip_fraction: float = 0.30
    noise_weighting: str = "time_linear"
    base_model: GbdtConfig = field(default_factory=GbdtConfig)
    micro_model: GbdtConfig = field(default_factory=lambda: GbdtConfig(n_rounds=100))
    n_micromodels: int = 10
    vote_threshold: float = 0.5
    fpr_targets: tuple[float, ...] = DEFAULT_FPR_TARGETS
    methods: tuple[str, ...] = DEFAULT_METHODS
    master_seed: int = 0

    def __post_init__(self) -> None:
        if not self.fpr_targets:
            raise ConfigError("fpr_targets must be non-empty")
        if list(self.fpr_targets) != sorted(self.fpr_targets):
            raise ConfigError("fpr_targets must be sorted ascending")
        if len(set(self.fpr_targets)) != len(self.fpr_targets):
            raise ConfigError("fpr_targets must be distinct")
        for t in self.fpr_targets:
            if not (0.0 < t < 1.0):
                raise ConfigError(f"fpr_target {t} outside (0,1)")
        if self.n_micromodels < 2:
            raise ConfigError(f"n_micromodels must be >= 2, got {self.n_micromodels}")
        if not (0.0 < self.validation_fraction < 1.0):
            raise ConfigError(f"validation_fraction must be in (0,1), got {self.validation_fraction}")
        if not (0.0 <= self.vote_threshold < 1.0):
            raise ConfigError(f"vote_threshold must be in [0,1), got {self.vote_threshold}")
        if not self.methods:
            raise ConfigError("methods must be non-empty")
        unknown = set(self.methods) - set(DEFAULT_METHODS)
        if unknown:
            raise ConfigError(f"unknown methods: {sorted(unknown)}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods must be distinct")


_GBDT_KEYS = ("n_rounds", "max_depth", "learning_rate", "n_bins", "min_leaf", "seed")
_CONFIG_KEYS = {
    "manifest": "manifest_path",
    "data": "data_path",
    "output_dir": "output_dir",
    "validation_fraction": "validation_fraction",
    "noise": None,
    "base_model": None,
    "micro_model": None,
    "n_micromodels": "n_micromodels",
    "vote_threshold": "vote_threshold",
    "fpr_targets": "fpr_targets",
    "methods": "methods",
    "master_seed": "master_seed",
}


def _gbdt_from_dict(raw: dict, what: str, defaults: GbdtConfig) -> GbdtConfig:
    unknown = set(raw) - set(_GBDT_KEYS)
    if unknown:
        raise ConfigError(f"unknown {what} keys: {sorted(unknown)}")
    try:
        return replace(defaults, **raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {what}: {exc}") from exc


def load_config(path: str) -> ExperimentConfig:
    """Read an experiment config from JSON; every problem is a ConfigError."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - set(_CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("manifest", "data"):
        if key not in raw:
            raise ConfigError(f"config missing key {key!r}")

    kwargs: dict = {
        "manifest_path": str(raw["manifest"]),
        "data_path": str(raw["data"]),
    }
    if "output_dir" in raw:
        kwargs["output_dir"] = str(raw["output_dir"])
    for key in ("validation_fraction", "vote_threshold"):
        if key in raw:
            kwargs[key] = float(raw[key])
    for key in ("n_micromodels", "master_seed"):
        if key in raw:
            kwargs[key] = int(raw[key])
    if "fpr_targets" in raw:
        kwargs["fpr_targets"] = tuple(float(t) for t in raw["fpr_targets"])
    if "methods" in raw:
        kwargs["methods"] = tuple(str(m) for m in raw["methods"])
    noise = raw.get("noise", {})
    if not isinstance(noise, dict):
        raise ConfigError("noise must be a JSON object")
    unknown = set(noise) - {"flip_fraction", "weighting"}
    if unknown:
        raise ConfigError(f"unknown noise keys: {sorted(unknown)}")
    if "flip_fraction" in noise:
        kwargs["noise_flip_fraction"] = float(noise["flip_fraction"])
    if "weighting" in noise:
        kwargs["noise_weighting"] = str(noise["weighting"])
    if "base_model" in raw:
        kwargs["base_model"] = _gbdt_from_dict(raw["base_model"], "base_model", GbdtConfig())
    if "micro_model" in raw:
        kwargs["micro_model"] = _gbdt_from_dict(raw["micro_model"], "micro_model", GbdtConfig(n_rounds=100))
    try:
        cfg = ExperimentConfig(**kwargs)
        # construct early so bad values surface as ConfigError too
        NoiseSpec(flip_fraction=cfg.noise_flip_fraction, weighting=cfg.noise_weighting)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def config_to_dict(cfg: ExperimentConfig) -> dict:
    def gbdt(c: GbdtConfig) -> dict:
        return {k: getattr(c, k) for k in _GBDT_KEYS}

    return {
        "manifest": cfg.manifest_path,
        "data": cfg.data_path,
        "output_dir": cfg.output_dir,
        "validation_fraction": cfg.validation_fraction,
        "noise": {"flip_fraction": cfg.noise_flip_fraction, "weighting": cfg.noise_weighting},
        "base_model": gbdt(cfg.base_model),
        "micro_model": gbdt(cfg.micro_model),
        "n_micromodels": cfg.n_micromodels,
        "vote_threshold": cfg.vote_threshold,
        "fpr_targets": list(cfg.fpr_targets),
        "methods": list(cfg.methods),
        "master_seed": cfg.master_seed,
    }


def config_hash(cfg: ExperimentConfig) -> str:
    canonical = json.dumps(config_to_dict(cfg), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class ExperimentResult:
    config_hash: str
    master_seed: int
    seeds: dict[str, int]
    n_train: int
    n_validation: int
    true_positive_rate: float
    flip_budget: int
    train_noise: NoiseReport
    validation_noise: NoiseReport
    thresholds: tuple[ThresholdReport, ...]
    method_summaries: dict[str, dict]
    metrics: tuple[MetricsReport, ...]
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        """Deterministic content only; timings are emitted separately."""
        return {
            "config_hash": self.config_hash,
            "master_seed": self.master_seed,
            "seeds": dict(self.seeds),
            "n_train": self.n_train,
            "n_validation": self.n_validation,
            "true_positive_rate": self.true_positive_rate,
            "flip_budget": self.flip_budget,
            "train_noise": self.train_noise.to_dict(),
            "validation_noise": self.validation_noise.to_dict(),
            "thresholds": [t.to_dict() for t in self.thresholds],
            "method_summaries": self.method_summaries,
            "metrics": [m.to_dict() for m in self.metrics],
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentResult":
        def noise(d: dict) -> NoiseReport:
            return NoiseReport(
                n_fraud=d["n_fraud"],
                n_flipped=d["n_flipped"],
                flipped_ids=tuple(d["flipped_ids"]),
                realized_noise_rate=d["realized_noise_rate"],
            )

        return cls(
            config_hash=obj["config_hash"],
            master_seed=obj["master_seed"],
            seeds=dict(obj["seeds"]),
            n_train=obj["n_train"],
            n_validation=obj["n_validation"],
            true_positive_rate=obj["true_positive_rate"],
            flip_budget=obj["flip_budget"],
            train_noise=noise(obj["train_noise"]),
            validation_noise=noise(obj["validation_noise"]),
            thresholds=tuple(ThresholdReport(**t) for t in obj["thresholds"]),
            method_summaries=dict(obj["method_summaries"]),
            metrics=tuple(MetricsReport(**m) for m in obj["metrics"]),
        )


@contextmanager
def _stage(name: str, timings: dict[str, float]) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    except ExperimentError:
        raise
    except Exception as exc:
        raise ExperimentError(name, exc) from exc
    finally:
        timings[name] = time.perf_counter() - start


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run the full protocol; any stage failure aborts, named after its stage."""
    timings: dict[str, float] = {}
    ms = cfg.master_seed
    seeds = {
        stage: derive_seed(ms, stage)
        for stage in ("split", "noise-train", "noise-validation", "base-model", "micromodels")
    }

    with _stage("load", timings):
        schema = parse_manifest(cfg.manifest_path)
        ds = load_dataset(schema, cfg.data_path)
    with _stage("split", timings):
        train_clean, val_clean = split_train_validation(ds, cfg.validation_fraction, seeds["split"])
    with _stage("noise", timings):
        train_noisy, train_report = inject_noise(
            train_clean,
            NoiseSpec(cfg.noise_flip_fraction, cfg.noise_weighting, seeds["noise-train"]),
        )
        val_noisy, val_report = inject_noise(
            val_clean,
            NoiseSpec(cfg.noise_flip_fraction, cfg.noise_weighting, seeds["noise-validation"]),
        )
    with _stage("base-model", timings):
        base = train(train_noisy, "observed", replace(cfg.base_model, seed=seeds["base-model"]))
        scored = predict(base, val_noisy)
    with _stage("thresholds", timings):
        thresholds = tuple(
            threshold_for_fpr(scored, target, labels="true") for target in cfg.fpr_targets
        )
    votes = None
    if METHOD_MICROMODEL in cfg.methods:
        with _stage("micromodels", timings):
            members = train_micromodels(train_noisy, cfg.n_micromodels, cfg.micro_model, seeds["micromodels"])
            member_scored = [predict(member, val_noisy) for member in members]
            votes = VoteMatrix.from_member_scores(member_scored, cfg.vote_threshold)
    with _stage("cleaning", timings):
        p_true = val_noisy.fraud_rate()
        budget = calibrated_flip_budget(val_noisy, p_true)
        assignments: dict[str, CleaningAssignment] = {}
        for method in cfg.methods:
            if method == METHOD_NONE:
                assignments[method] = clean_none(val_noisy)
            elif method == METHOD_DIRECT:
                assignments[method] = clean_direct_calibrated(scored, budget, target_rate=p_true)
            elif method == METHOD_CLEANLAB:
                assignments[method] = clean_cleanlab_style(scored, m_cap=budget)
            else:
                assignments[method] = clean_micromodel(votes, budget)
    with _stage("evaluate", timings):
        metrics = tuple(
            evaluate_method(scored, assignments[method], report.threshold, report.target_fpr)
            for method in cfg.methods
            for report in thresholds
        )
        summaries = {
            method: {
                "n_flipped": len(assignments[method].flipped_ids()),
                "achieved_positive_rate": assignments[method].achieved_positive_rate,
                "target_positive_rate": assignments[method].target_positive_rate,
            }
            for method in cfg.methods
        }

    return ExperimentResult(
        config_hash=config_hash(cfg),
        master_seed=ms,
        seeds=seeds,
        n_train=train_noisy.n,
        n_validation=val_noisy.n,
        true_positive_rate=p_true,
        flip_budget=budget,
        train_noise=train_report,
        validation_noise=val_report,
        thresholds=thresholds,
        method_summaries=summaries,
        metrics=metrics,
        timings=timings,
    )


def _best_error_methods(result: ExperimentResult, target: float) -> set[str]:
    errs = {m.method: m.relative_error for m in result.metrics if m.target_fpr == target}
    if not errs:
        return set()
    best = min(errs.values())
    return {method for method, err in errs.items() if err == best}


def emit_tables(result: ExperimentResult, format: str) -> str:
    """Render the per-method metrics table; methods as rows, targets as columns.

    csv carries full precision plus a best-error flag; markdown rounds the
    way the summary tables are usually read (rates to 3 decimals, errors to
    2) and bolds the best error per target.
    """
    targets = [t.target_fpr for t in result.thresholds]
    methods = list(dict.fromkeys(m.method for m in result.metrics))
    by_key = {(m.method, m.target_fpr): m for m in result.metrics}
    best = {target: _best_error_methods(result, target) for target in targets}

    if format == "csv":
        lines = []
        header = ["method"]
        for target in targets:
            header += [f"fpr_estimate@{target!r}", f"err@{target!r}", f"best@{target!r}"]
        lines.append(",".join(header))
        for method in methods:
            row = [method]
            for target in targets:
                m = by_key[(method, target)]
                row += [repr(m.fpr_estimate), repr(m.relative_error), str(int(method in best[target]))]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    if format == "markdown":
        header = "| method |" + "".join(f" fpr@{target:g} | err@{target:g} |" for target in targets)
        rule = "| --- |" + " --- | --- |" * len(targets)
        lines = [header, rule]
        for method in methods:
            cells = [method]
            for target in targets:
                m = by_key[(method, target)]
                err = f"{m.relative_error:.2f}"
                if method in best[target]:
                    err = f"**{err}**"
                cells += [f"{m.fpr_estimate:.3f}", err]
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"

    raise ValueError(f"format must be 'csv' or 'markdown', got {format!r}")


def write_outputs(result: ExperimentResult, out_dir: str) -> dict[str, str]:
    """Write all experiment artifacts; returns name -> path.

    Everything except timings.json is byte-identical across reruns of the
    same config and master seed.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    def emit(name: str, content: str) -> None:
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(content)
        paths[name] = path

    emit("results.csv", emit_tables(result, "csv"))
    emit("tables.md", emit_tables(result, "markdown"))
    emit(
        "noise_report.json",
        json.dumps(
            {"train": result.train_noise.to_dict(), "validation": result.validation_noise.to_dict()},
            indent=2,
            sort_keys=True,
        ) + "\n",
    )
    emit("result.json", json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n")
    emit("timings.json", json.dumps(result.timings, indent=2, sort_keys=True) + "\n")
    return paths


def run_theory_suite(seed: int = 0, trials: int = 1000, n_max: int = 50) -> dict:
    """Randomized verification of every identity plus the extremality oracle.

    Returns a JSON-ready report; `passed` is True only if every check on
    every sampled world succeeded.  Failing worlds are serialized for
    replay (at most five, to keep reports readable).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if n_max < 4:
        raise ValueError(f"n_max must be >= 4, got {n_max}")
    rng = np.random.default_rng(derive_seed(seed, "theory-suite"))
    checks: dict[str, dict[str, int]] = {}
    failures: list[dict] = []

    def record(name: str, passed: bool, detail: dict) -> None:
        entry = checks.setdefault(name, {"runs": 0, "failures": 0})
        entry["runs"] += 1
        if not passed:
            entry["failures"] += 1
            if len(failures) < 5:
                failures.append({"check": name, **detail})

    for trial in range(trials):
        n = int(rng.integers(4, n_max + 1))
        ties = trial % 2 == 1

        world = random_world(rng, n, calibrated=False, tie_scores=ties)
        report = check_calibration_balance(world)
        biconditional = world.is_calibrated() == (world.count("e1") == world.count("e2"))
        record("calibration_balance", report.passed and biconditional, world.to_dict())

        world = random_world(rng, n, calibrated=True, tie_scores=ties)
        record("calibration_balance", check_calibration_balance(world).passed, world.to_dict())
        distinct = world.distinct_scores()
        if distinct.size > 8:
            distinct = rng.choice(distinct, size=8, replace=False)
        for t in distinct:
            t = float(t)
            detail = {**world.to_dict(), "t": t}
            record("fpr_gap", check_fpr_gap(world, t).passed, detail)
            record("tpr_gap", check_tpr_gap(world, t).passed, detail)
            record("covariance_form", check_covariance_form(world, t).passed, detail)
            ratio = check_gap_ratio(world, t)
            if ratio is not None:
                record("gap_ratio", ratio.passed, detail)

    ext_trials = min(trials, 200)
    for _ in range(ext_trials):
        scores, y_true, y_observed, e = random_extremality_instance(rng, n_max=min(n_max, 12))
        detail = {
            "scores": scores.tolist(),
            "y_true": y_true.tolist(),
            "y_observed": y_observed.tolist(),
            "e": e,
        }
        for t in np.unique(scores):
            report = brute_force_max_fpr_gap(scores, y_true, y_observed, e, float(t))
            record("extremality", report.passed, {**detail, "t": float(t)})

    return {
        "seed": seed,
        "trials": trials,
        "n_max": n_max,
        "checks": checks,
        "failures": failures,
        "passed": all(entry["failures"] == 0 for entry in checks.values()),
    }
