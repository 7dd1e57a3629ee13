"""Experiment orchestration: multi-seed comparisons, beta sweeps, grid search.

Protocol: every arm trains once per seed (all arms share the same seed
list, so comparisons are paired), every run is persisted as JSON before
any aggregate is computed, and aggregates are recomputable from the
persisted files alone (:func:`reaggregate`).

Reported variance follows the percentage-point convention: test F is
expressed on a 0..100 scale, so the reported Var is 1e4 times the raw
variance of F in [0, 1].  Both values are stored.  The Best-k statistic
ranks runs by dev F and reports the highest test F among the top k.
"""

from __future__ import annotations

import csv
import itertools
import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import configio
from .data import Dataset, GeneratorConfig, generate, load
from .losses import Adaptive, LossStrategy
from .model import ModelSpec
from .trainer import RunReport, TrainConfig, evaluate, report_to_dict, train, write_run_report

__all__ = [
    "Arm",
    "ModelConfig",
    "SyntheticSource",
    "FileSource",
    "DatasetSource",
    "ExperimentConfig",
    "ArmSummary",
    "ComparisonReport",
    "SweepRow",
    "SweepReport",
    "GridCell",
    "GridResult",
    "best_k_test_score",
    "load_datasets",
    "run_experiment",
    "beta_sweep",
    "grid_search",
    "reaggregate",
    "experiment_from_json",
    "experiment_to_json",
]

VAR_PCT_SCALE = 1e4  # variance of 100*F equals 1e4 * variance of F


@dataclass(frozen=True)
class ModelConfig:
    """Architecture knobs; input width and class count come from the data."""

    hidden_dim: int | None = None
    activation: str = "tanh"


@dataclass(frozen=True)
class SyntheticSource:
    """Generate train/dev/test splits from one generator config.

    One pooled dataset of ``n + n_dev + n_test`` instances is generated
    with the configured seed and sliced consecutively, so all three splits
    share the same cluster layout and are disjoint.  ``generator.n`` is the
    training split size.
    """

    generator: GeneratorConfig = GeneratorConfig()
    n_dev: int = 2000
    n_test: int = 2000


@dataclass(frozen=True)
class FileSource:
    train_path: str
    dev_path: str
    test_path: str
    format: str | None = None


DatasetSource = SyntheticSource | FileSource


@dataclass(frozen=True)
class Arm:
    """One system under comparison: a loss strategy plus its training config."""

    name: str
    strategy: LossStrategy
    train: TrainConfig = TrainConfig()


@dataclass(frozen=True)
class ExperimentConfig:
    source: DatasetSource
    arms: tuple[Arm, ...]
    model: ModelConfig = ModelConfig()
    n_seeds: int = 10
    best_k: int = 3
    base_seed: int = 0
    beta_sweep: tuple[float, ...] | None = None
    grid: dict[str, dict[str, tuple]] | None = None
    output_dir: str = "out"
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be >= 1")
        if self.base_seed < 0:
            raise ValueError("base_seed must be non-negative")
        if not 1 <= self.best_k <= self.n_seeds:
            raise ValueError("best_k must lie in [1, n_seeds]")
        if not self.arms:
            raise ValueError("at least one arm is required")
        if len({arm.name for arm in self.arms}) != len(self.arms):
            raise ValueError("arm names must be unique")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class ArmSummary:
    name: str
    n_runs: int
    n_valid: int
    mean_test_f: float | None
    var_test_f: float | None
    var_test_f_pct: float | None
    best3_test_f: float | None
    invalid_seeds: list[int]
    runs: list[dict]


@dataclass
class ComparisonReport:
    n_seeds: int
    best_k: int
    base_seed: int
    arms: list[ArmSummary]

    def to_dict(self) -> dict:
        return {
            "format": "comparison-report",
            "version": 1,
            "n_seeds": self.n_seeds,
            "best_k": self.best_k,
            "base_seed": self.base_seed,
            "arms": [vars(a).copy() for a in self.arms],
        }


@dataclass
class SweepRow:
    beta: float
    n_valid: int
    mean_precision: float | None
    mean_recall: float | None
    mean_f1: float | None
    std_precision: float | None
    std_recall: float | None
    std_f1: float | None


@dataclass
class SweepReport:
    n_seeds: int
    base_seed: int
    rows: list[SweepRow]

    def to_dict(self) -> dict:
        return {
            "format": "sweep-report",
            "version": 1,
            "n_seeds": self.n_seeds,
            "base_seed": self.base_seed,
            "rows": [vars(r).copy() for r in self.rows],
        }


@dataclass
class GridCell:
    params: dict
    mean_dev_f: float | None
    n_valid: int
    test_f: list[float]
    reports: list[RunReport]


@dataclass
class GridResult:
    arm: str
    best_index: int
    best_params: dict
    cells: list[GridCell]

    def to_dict(self) -> dict:
        return {
            "format": "grid-report",
            "version": 1,
            "arm": self.arm,
            "best_index": self.best_index,
            "best_params": self.best_params,
            "cells": [
                {
                    "params": c.params,
                    "mean_dev_f": c.mean_dev_f,
                    "n_valid": c.n_valid,
                    "test_f": c.test_f,
                }
                for c in self.cells
            ],
        }


def best_k_test_score(dev_scores, test_scores, k: int) -> float:
    """Best test score among the k runs with the highest dev scores.

    Ranking ties keep the earlier run.  k is capped at the number of runs.
    """
    dev = list(dev_scores)
    test = list(test_scores)
    if len(dev) != len(test) or not dev:
        raise ValueError("dev and test score lists must be non-empty and equal length")
    order = sorted(range(len(dev)), key=lambda i: (-dev[i], i))
    top = order[: max(1, min(k, len(order)))]
    return max(test[i] for i in top)


def load_datasets(source: DatasetSource) -> tuple[Dataset, Dataset, Dataset]:
    if isinstance(source, SyntheticSource):
        gen = source.generator
        pool = generate(replace(gen, n=gen.n + source.n_dev + source.n_test))
        bounds = (gen.n, gen.n + source.n_dev, pool.n)
        return (
            Dataset(pool.features[: bounds[0]], pool.labels[: bounds[0]], pool.k),
            Dataset(pool.features[bounds[0] : bounds[1]], pool.labels[bounds[0] : bounds[1]], pool.k),
            Dataset(pool.features[bounds[1] :], pool.labels[bounds[1] :], pool.k),
        )
    if isinstance(source, FileSource):
        return (
            load(source.train_path, source.format),
            load(source.dev_path, source.format),
            load(source.test_path, source.format),
        )
    raise TypeError(f"unknown dataset source {source!r}")


def _build_spec(model: ModelConfig, dataset: Dataset) -> ModelSpec:
    return ModelSpec(
        input_dim=dataset.d,
        n_classes=dataset.k,
        hidden_dim=model.hidden_dim,
        activation=model.activation,
    )


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.+=-]", "-", name)


def _execute_run(task) -> tuple[RunReport, tuple[float, float, float]]:
    train_ds, dev_ds, test_ds, spec, config, arm_name = task
    params, report = train(train_ds, dev_ds, test_ds, spec, config)
    report.arm = arm_name
    extras = evaluate(params, test_ds, 1.0) if report.valid else (0.0, 0.0, 0.0)
    return report, extras


def _run_all(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [_execute_run(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_execute_run, tasks))


def _persist(report: RunReport, out_dir: Path) -> None:
    path = out_dir / f"run_{_safe_name(report.arm)}_{report.seed}.json"
    write_run_report(report, path)
    configio.validate_run_report(report_to_dict(report))


def _summarize_arm(name: str, reports: list[RunReport], best_k: int) -> ArmSummary:
    reports = sorted(reports, key=lambda r: r.seed)
    valid = [r for r in reports if r.valid]
    rows = [
        {
            "seed": r.seed,
            "best_dev_f": r.best_dev_f,
            "test_precision": r.test_precision,
            "test_recall": r.test_recall,
            "test_f": r.test_f,
            "valid": r.valid,
        }
        for r in reports
    ]
    if valid:
        test_f = np.array([r.test_f for r in valid])
        mean = float(np.mean(test_f))
        var = float(np.var(test_f))
        best = best_k_test_score([r.best_dev_f for r in valid], [r.test_f for r in valid], best_k)
        var_pct = var * VAR_PCT_SCALE
    else:
        mean = var = var_pct = best = None
    return ArmSummary(
        name=name,
        n_runs=len(reports),
        n_valid=len(valid),
        mean_test_f=mean,
        var_test_f=var,
        var_test_f_pct=var_pct,
        best3_test_f=best,
        invalid_seeds=[r.seed for r in reports if not r.valid],
        runs=rows,
    )


def _write_comparison_csv(report: ComparisonReport, path: Path) -> None:
    # Table-style scale: mean/best3 as percentage points, var on the same scale
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["arm", "mean", "var", "best3"])
        for arm in report.arms:
            if arm.mean_test_f is None:
                writer.writerow([arm.name, "", "", ""])
            else:
                writer.writerow(
                    [
                        arm.name,
                        f"{100.0 * arm.mean_test_f:.6f}",
                        f"{arm.var_test_f_pct:.6f}",
                        f"{100.0 * arm.best3_test_f:.6f}",
                    ]
                )


def run_experiment(config: ExperimentConfig) -> ComparisonReport:
    """Train every arm over the shared seed list and aggregate test F.

    Per-run JSON files land in ``output_dir`` before aggregation starts;
    invalid (aborted) runs are excluded from aggregates and listed in the
    arm summary.  Writes ``comparison.csv`` and ``comparison.json``.
    """
    train_ds, dev_ds, test_ds = load_datasets(config.source)
    spec = _build_spec(config.model, train_ds)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    tasks = [
        (
            train_ds,
            dev_ds,
            test_ds,
            spec,
            replace(arm.train, strategy=arm.strategy, seed=config.base_seed + s),
            arm.name,
        )
        for arm in config.arms
        for s in range(config.n_seeds)
    ]
    results = _run_all(tasks, config.workers)

    by_arm: dict[str, list[RunReport]] = {arm.name: [] for arm in config.arms}
    for report, _ in results:
        _persist(report, out_dir)
        by_arm[report.arm].append(report)

    report = ComparisonReport(
        n_seeds=config.n_seeds,
        best_k=config.best_k,
        base_seed=config.base_seed,
        arms=[_summarize_arm(arm.name, by_arm[arm.name], config.best_k) for arm in config.arms],
    )
    doc = report.to_dict()
    configio.validate_comparison_report(doc)
    configio.write_json(doc, out_dir / "comparison.json")
    _write_comparison_csv(report, out_dir / "comparison.csv")
    return report


def _mean_std(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    arr = np.array(values)
    return float(np.mean(arr)), float(np.std(arr))


def beta_sweep(config: ExperimentConfig) -> SweepReport:
    """Train the adaptive strategy at each beta in ``config.beta_sweep``.

    Dev-set model selection uses F at the matching beta; reported test
    metrics are precision, recall and F1 so rows are comparable across
    betas.  Writes ``sweep.csv`` (one row per beta, means plus population
    stddevs) and ``sweep.json``.
    """
    if not config.beta_sweep:
        raise ValueError("config.beta_sweep must be a non-empty list")
    template = next((arm for arm in config.arms if isinstance(arm.strategy, Adaptive)), None)
    if template is None:
        raise ValueError("beta sweep requires an adaptive arm in the experiment config")

    train_ds, dev_ds, test_ds = load_datasets(config.source)
    spec = _build_spec(config.model, train_ds)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rows: list[SweepRow] = []
    for beta in config.beta_sweep:
        arm_name = f"adaptive_beta{beta:g}"
        tasks = [
            (
                train_ds,
                dev_ds,
                test_ds,
                spec,
                replace(
                    template.train,
                    strategy=Adaptive(beta=beta),
                    eval_beta=beta,
                    seed=config.base_seed + s,
                ),
                arm_name,
            )
            for s in range(config.n_seeds)
        ]
        results = _run_all(tasks, config.workers)
        per_seed = []
        for report, extras in results:
            _persist(report, out_dir)
            if report.valid:
                per_seed.append(extras)
        mean_p, std_p = _mean_std([p for p, _, _ in per_seed])
        mean_r, std_r = _mean_std([r for _, r, _ in per_seed])
        mean_f, std_f = _mean_std([f for _, _, f in per_seed])
        rows.append(
            SweepRow(
                beta=float(beta),
                n_valid=len(per_seed),
                mean_precision=mean_p,
                mean_recall=mean_r,
                mean_f1=mean_f,
                std_precision=std_p,
                std_recall=std_r,
                std_f1=std_f,
            )
        )

    report = SweepReport(n_seeds=config.n_seeds, base_seed=config.base_seed, rows=rows)
    doc = report.to_dict()
    configio.validate_sweep_report(doc)
    configio.write_json(doc, out_dir / "sweep.json")
    with (out_dir / "sweep.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["beta", "mean_precision", "mean_recall", "mean_f1", "std_precision", "std_recall", "std_f1"]
        )
        for row in rows:
            writer.writerow(
                [f"{row.beta:g}"]
                + [
                    "" if v is None else f"{v:.6f}"
                    for v in (
                        row.mean_precision,
                        row.mean_recall,
                        row.mean_f1,
                        row.std_precision,
                        row.std_recall,
                        row.std_f1,
                    )
                ]
            )
    return report


def _apply_cell(arm: Arm, cell: dict) -> Arm:
    strategy = arm.strategy
    train_cfg = arm.train
    strategy_fields = {f.name for f in fields(strategy)}
    sampler_fields = {f.name for f in fields(train_cfg.sampler)}
    for key, value in cell.items():
        if key in strategy_fields:
            strategy = replace(strategy, **{key: value})
        elif key in sampler_fields:
            train_cfg = replace(train_cfg, sampler=replace(train_cfg.sampler, **{key: value}))
        else:
            raise ValueError(
                f"grid parameter {key!r} matches neither the strategy nor the sampler of arm {arm.name!r}"
            )
    return Arm(name=arm.name, strategy=strategy, train=train_cfg)


def grid_search(arm: Arm, grid: dict, config: ExperimentConfig) -> GridResult:
    """Exhaustive search over a per-arm hyper-parameter grid.

    Grid keys name fields of the arm's strategy or of its sampler; cells
    are the cartesian product in declared order.  Each cell is scored by
    mean dev F over the shared seed list; ties keep the first-declared
    cell.  An empty grid means the arm has nothing to tune and evaluates
    as a single cell.  Writes ``grid_<arm>.json``.
    """
    names = list(grid.keys())
    cells = [dict(zip(names, combo)) for combo in itertools.product(*(grid[n] for n in names))]
    if not cells:
        raise ValueError("grid value lists must be non-empty")

    train_ds, dev_ds, test_ds = load_datasets(config.source)
    spec = _build_spec(config.model, train_ds)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    results: list[GridCell] = []
    for cell in cells:
        cell_arm = _apply_cell(arm, cell)
        label = ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in cell.items())
        arm_name = f"{arm.name}#{label}" if label else arm.name
        tasks = [
            (
                train_ds,
                dev_ds,
                test_ds,
                spec,
                replace(cell_arm.train, strategy=cell_arm.strategy, seed=config.base_seed + s),
                arm_name,
            )
            for s in range(config.n_seeds)
        ]
        reports = []
        for report, _ in _run_all(tasks, config.workers):
            _persist(report, out_dir)
            reports.append(report)
        valid = [r for r in reports if r.valid]
        results.append(
            GridCell(
                params=cell,
                mean_dev_f=float(np.mean([r.best_dev_f for r in valid])) if valid else None,
                n_valid=len(valid),
                test_f=[r.test_f for r in valid],
                reports=reports,
            )
        )

    best_index = 0
    best_score = -1.0
    for i, cell in enumerate(results):
        score = -1.0 if cell.mean_dev_f is None else cell.mean_dev_f
        if score > best_score:
            best_score = score
            best_index = i

    grid_result = GridResult(
        arm=arm.name,
        best_index=best_index,
        best_params=results[best_index].params,
        cells=results,
    )
    doc = grid_result.to_dict()
    configio.validate_grid_report(doc)
    configio.write_json(doc, out_dir / f"grid_{_safe_name(arm.name)}.json")
    return grid_result


def reaggregate(run_dir, best_k: int = 3) -> dict[str, ArmSummary]:
    """Rebuild per-arm aggregates from persisted run files alone.

    Independent of in-memory state: reads every ``run_*.json`` under
    ``run_dir``, groups by the embedded arm name and recomputes
    mean/var/best-k exactly as :func:`run_experiment` does.
    """
    run_dir = Path(run_dir)
    by_arm: dict[str, list[RunReport]] = {}
    for path in sorted(run_dir.glob("run_*.json")):
        doc = json.loads(path.read_text())
        report = RunReport(
            seed=doc["seed"],
            arm=doc["arm"],
            strategy=doc["strategy"],
            eval_beta=doc["eval_beta"],
            epochs_run=doc["epochs_run"],
            best_epoch=doc["best_epoch"],
            best_dev_f=doc["best_dev_f"],
            dev_precision=doc["dev_precision"],
            dev_recall=doc["dev_recall"],
            dev_f=doc["dev_f"],
            loss_curve=doc["loss_curve"],
            w_history=doc["w_history"],
            skipped_steps=doc["skipped_steps"],
            test_precision=doc["test_precision"],
            test_recall=doc["test_recall"],
            test_f=doc["test_f"],
            valid=doc["valid"],
            failure=doc["failure"],
        )
        by_arm.setdefault(report.arm, []).append(report)
    return {name: _summarize_arm(name, reports, best_k) for name, reports in by_arm.items()}


def _model_from_json(doc: dict) -> ModelConfig:
    return ModelConfig(
        hidden_dim=doc.get("hidden_dim"),
        activation=doc.get("activation", "tanh"),
    )


def _model_to_json(model: ModelConfig) -> dict:
    return {"hidden_dim": model.hidden_dim, "activation": model.activation}


def _source_from_json(doc: dict) -> DatasetSource:
    kind = doc.get("kind")
    if kind == "synthetic":
        return SyntheticSource(
            generator=configio.generator_from_json(doc.get("generator", {})),
            n_dev=int(doc.get("n_dev", 2000)),
            n_test=int(doc.get("n_test", 2000)),
        )
    if kind == "files":
        return FileSource(
            train_path=doc["train"],
            dev_path=doc["dev"],
            test_path=doc["test"],
            format=doc.get("format"),
        )
    raise ValueError(f"unknown dataset source kind {kind!r}")


def _source_to_json(source: DatasetSource) -> dict:
    if isinstance(source, SyntheticSource):
        return {
            "kind": "synthetic",
            "generator": configio.generator_to_json(source.generator),
            "n_dev": source.n_dev,
            "n_test": source.n_test,
        }
    return {
        "kind": "files",
        "train": source.train_path,
        "dev": source.dev_path,
        "test": source.test_path,
        "format": source.format,
    }


def experiment_from_json(doc: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from its JSON document.

    An arm's optional "train" block is a shallow override of the top-level
    "train" defaults (nested optimizer/sampler objects replace, not merge).
    """
    configio.validate_experiment_config(doc)
    base_train = doc.get("train", {})
    arms = []
    for arm_doc in doc["arms"]:
        merged = {**base_train, **arm_doc.get("train", {})}
        arms.append(
            Arm(
                name=arm_doc["name"],
                strategy=configio.strategy_from_json(arm_doc["strategy"]),
                train=configio.train_config_from_json(merged),
            )
        )
    grid = doc.get("grid")
    if grid is not None:
        grid = {
            arm_name: {param: tuple(values) for param, values in params.items()}
            for arm_name, params in grid.items()
        }
    sweep = doc.get("beta_sweep")
    return ExperimentConfig(
        source=_source_from_json(doc["dataset"]),
        arms=tuple(arms),
        model=_model_from_json(doc.get("model", {})),
        n_seeds=int(doc.get("n_seeds", 10)),
        best_k=int(doc.get("best_k", 3)),
        base_seed=int(doc.get("base_seed", 0)),
        beta_sweep=None if sweep is None else tuple(float(b) for b in sweep),
        grid=grid,
        output_dir=doc.get("output_dir", "out"),
        workers=int(doc.get("workers", 1)),
    )


def experiment_to_json(config: ExperimentConfig) -> dict:
    doc = {
        "dataset": _source_to_json(config.source),
        "model": _model_to_json(config.model),
        "arms": [
            {
                "name": arm.name,
                "strategy": configio.strategy_to_json(arm.strategy),
                "train": configio.train_config_to_json(arm.train),
            }
            for arm in config.arms
        ],
        "n_seeds": config.n_seeds,
        "best_k": config.best_k,
        "base_seed": config.base_seed,
        "output_dir": config.output_dir,
        "workers": config.workers,
    }
    if config.beta_sweep is not None:
        doc["beta_sweep"] = list(config.beta_sweep)
    if config.grid is not None:
        doc["grid"] = {
            arm: {param: list(values) for param, values in params.items()}
            for arm, params in config.grid.items()
        }
    return doc
