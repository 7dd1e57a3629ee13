import json

import numpy as np
import pytest

from adascale import configio
from adascale.data import Dataset, GeneratorConfig, StratifiedSampler, UnderSampler, save
from adascale.harness import (
    Arm,
    ExperimentConfig,
    FileSource,
    ModelConfig,
    SyntheticSource,
    best_k_test_score,
    beta_sweep,
    experiment_from_json,
    experiment_to_json,
    grid_search,
    load_datasets,
    reaggregate,
    run_experiment,
)
from adascale.losses import Adaptive, Static, Vanilla
from adascale.trainer import SGD, Adam, TrainConfig


TINY_SOURCE = SyntheticSource(
    GeneratorConfig(n=400, d=5, k=3, positive_rate=0.1, seed=0),
    n_dev=150,
    n_test=150,
)
TINY_TRAIN = TrainConfig(
    optimizer=Adam(lr=0.01), epochs=3, batch_size=32, sampler=StratifiedSampler(1)
)


def _tiny_config(out_dir, arms=None, **kw):
    arms = arms or (
        Arm("vanilla", Vanilla(), TINY_TRAIN),
        Arm("adaptive", Adaptive(1.0), TINY_TRAIN),
    )
    base = dict(source=TINY_SOURCE, arms=arms, n_seeds=2, best_k=2, output_dir=str(out_dir))
    base.update(kw)
    return ExperimentConfig(**base)


class TestBestK:
    def test_worked_selection_example(self):
        dev = [0.40, 0.50, 0.45, 0.48, 0.30]
        test = [0.41, 0.52, 0.44, 0.50, 0.35]
        assert best_k_test_score(dev, test, 3) == 0.52

    def test_single_run(self):
        assert best_k_test_score([0.4], [0.7], 3) == 0.7

    def test_rank_ties_keep_earlier_run(self):
        assert best_k_test_score([0.5, 0.5, 0.5], [0.1, 0.9, 0.8], 1) == 0.1

    def test_rejects_empty_or_mismatched(self):
        with pytest.raises(ValueError):
            best_k_test_score([], [], 3)
        with pytest.raises(ValueError):
            best_k_test_score([0.1], [0.1, 0.2], 1)


class TestRunExperiment:
    def test_outputs_and_aggregates(self, tmp_path):
        config = _tiny_config(tmp_path / "out")
        report = run_experiment(config)
        out = tmp_path / "out"
        names = sorted(p.name for p in out.iterdir())
        assert "comparison.csv" in names and "comparison.json" in names
        for arm in ("vanilla", "adaptive"):
            for seed in (0, 1):
                assert f"run_{arm}_{seed}.json" in names
        doc = json.loads((out / "comparison.json").read_text())
        configio.validate_comparison_report(doc)
        for arm in report.arms:
            assert arm.n_valid == 2
            test_f = [r["test_f"] for r in arm.runs]
            assert arm.mean_test_f == pytest.approx(np.mean(test_f))
            assert arm.var_test_f == pytest.approx(np.var(test_f))
            assert arm.var_test_f_pct == pytest.approx(1e4 * np.var(test_f))
        csv_lines = (out / "comparison.csv").read_text().strip().splitlines()
        assert csv_lines[0] == "arm,mean,var,best3"
        assert len(csv_lines) == 3

    def test_identical_arms_identical_aggregates(self, tmp_path):
        config = _tiny_config(
            tmp_path / "out",
            arms=(
                Arm("first", Static(0.5), TINY_TRAIN),
                Arm("second", Static(0.5), TINY_TRAIN),
            ),
        )
        report = run_experiment(config)
        a, b = report.arms
        assert a.mean_test_f == b.mean_test_f
        assert a.var_test_f == b.var_test_f
        assert a.best3_test_f == b.best3_test_f

    def test_single_seed_mean_and_zero_variance(self, tmp_path):
        config = _tiny_config(tmp_path / "out", n_seeds=1, best_k=1)
        report = run_experiment(config)
        for arm in report.arms:
            assert arm.mean_test_f == arm.runs[0]["test_f"]
            assert arm.var_test_f == 0.0
            assert arm.best3_test_f == arm.runs[0]["test_f"]

    def test_byte_identical_reruns(self, tmp_path):
        r1 = run_experiment(_tiny_config(tmp_path / "a"))
        r2 = run_experiment(_tiny_config(tmp_path / "b"))
        files_a = sorted((tmp_path / "a").iterdir())
        files_b = sorted((tmp_path / "b").iterdir())
        assert [p.name for p in files_a] == [p.name for p in files_b]
        for pa, pb in zip(files_a, files_b):
            assert pa.read_bytes() == pb.read_bytes()
        assert r1.to_dict() == r2.to_dict()

    def test_reaggregation_reproduces_report(self, tmp_path):
        config = _tiny_config(tmp_path / "out")
        report = run_experiment(config)
        rebuilt = reaggregate(tmp_path / "out", best_k=config.best_k)
        for arm in report.arms:
            assert vars(rebuilt[arm.name]) == vars(arm)

    def test_worker_pool_matches_sequential(self, tmp_path):
        run_experiment(_tiny_config(tmp_path / "seq", workers=1))
        run_experiment(_tiny_config(tmp_path / "par", workers=2))
        for p in sorted((tmp_path / "seq").iterdir()):
            assert p.read_bytes() == (tmp_path / "par" / p.name).read_bytes()

    def test_invalid_runs_excluded_and_flagged(self, tmp_path):
        # contradictory labels + huge learning rate force divergence
        feats = np.ones((40, 3))
        labels = np.array([0, 1] * 20)
        ds = Dataset(feats, labels, k=2)
        for split in ("train", "dev", "test"):
            save(ds, tmp_path / f"{split}.csv")
        source = FileSource(
            str(tmp_path / "train.csv"), str(tmp_path / "dev.csv"), str(tmp_path / "test.csv")
        )
        bad_train = TrainConfig(optimizer=SGD(lr=1e12), epochs=2, batch_size=8)
        config = ExperimentConfig(
            source=source,
            arms=(Arm("diverges", Vanilla(), bad_train),),
            n_seeds=2,
            best_k=1,
            output_dir=str(tmp_path / "out"),
        )
        report = run_experiment(config)
        arm = report.arms[0]
        assert arm.n_valid == 0
        assert arm.invalid_seeds == [0, 1]
        assert arm.mean_test_f is None
        doc = json.loads((tmp_path / "out" / "comparison.json").read_text())
        configio.validate_comparison_report(doc)


class TestBetaSweep:
    def test_rows_and_files(self, tmp_path):
        config = _tiny_config(
            tmp_path / "out",
            arms=(Arm("adaptive", Adaptive(1.0), TINY_TRAIN),),
            beta_sweep=(0.5, 1.0),
        )
        report = beta_sweep(config)
        assert [row.beta for row in report.rows] == [0.5, 1.0]
        for row in report.rows:
            assert row.n_valid == 2
            assert 0.0 <= row.mean_f1 <= 1.0
        csv_lines = (tmp_path / "out" / "sweep.csv").read_text().strip().splitlines()
        assert csv_lines[0] == (
            "beta,mean_precision,mean_recall,mean_f1,std_precision,std_recall,std_f1"
        )
        assert len(csv_lines) == 3
        doc = json.loads((tmp_path / "out" / "sweep.json").read_text())
        configio.validate_sweep_report(doc)

    def test_single_beta_single_row(self, tmp_path):
        config = _tiny_config(
            tmp_path / "out",
            arms=(Arm("adaptive", Adaptive(1.0), TINY_TRAIN),),
            beta_sweep=(2.0,),
        )
        report = beta_sweep(config)
        assert len(report.rows) == 1
        assert report.rows[0].beta == 2.0

    def test_requires_adaptive_arm(self, tmp_path):
        config = _tiny_config(
            tmp_path / "out",
            arms=(Arm("vanilla", Vanilla(), TINY_TRAIN),),
            beta_sweep=(1.0,),
        )
        with pytest.raises(ValueError, match="adaptive"):
            beta_sweep(config)

    def test_requires_betas(self, tmp_path):
        config = _tiny_config(tmp_path / "out")
        with pytest.raises(ValueError, match="beta_sweep"):
            beta_sweep(config)


class TestGridSearch:
    def test_static_cost_grid(self, tmp_path):
        config = _tiny_config(tmp_path / "out")
        arm = Arm("static", Static(0.5), TINY_TRAIN)
        result = grid_search(arm, {"negative_cost": (0.2, 0.5, 1.0)}, config)
        assert len(result.cells) == 3
        assert [c.params["negative_cost"] for c in result.cells] == [0.2, 0.5, 1.0]
        best = max(
            range(3), key=lambda i: (result.cells[i].mean_dev_f, -i)
        )
        assert result.best_index == best
        assert result.best_params == result.cells[best].params
        doc = json.loads((tmp_path / "out" / "grid_static.json").read_text())
        configio.validate_grid_report(doc)

    def test_sampler_parameter_grid(self, tmp_path):
        config = _tiny_config(tmp_path / "out", n_seeds=1, best_k=1)
        arm = Arm(
            "undersample",
            Vanilla(),
            TrainConfig(optimizer=Adam(lr=0.01), epochs=2, batch_size=16, sampler=UnderSampler(1.0)),
        )
        result = grid_search(arm, {"neg_to_pos_ratio": (1.0, 5.0)}, config)
        assert len(result.cells) == 2
        assert all(c.n_valid == 1 for c in result.cells)

    def test_empty_grid_single_cell(self, tmp_path):
        config = _tiny_config(tmp_path / "out", n_seeds=1, best_k=1)
        result = grid_search(Arm("adaptive", Adaptive(1.0), TINY_TRAIN), {}, config)
        assert len(result.cells) == 1
        assert result.best_params == {}

    def test_unknown_parameter(self, tmp_path):
        config = _tiny_config(tmp_path / "out")
        with pytest.raises(ValueError, match="neither"):
            grid_search(Arm("static", Static(0.5), TINY_TRAIN), {"nope": (1,)}, config)


class TestConfigCodec:
    def _doc(self, out_dir="out"):
        return {
            "dataset": {
                "kind": "synthetic",
                "generator": {"n": 400, "d": 5, "k": 3, "positive_rate": 0.1, "seed": 0},
                "n_dev": 150,
                "n_test": 150,
            },
            "model": {"hidden_dim": None, "activation": "tanh"},
            "arms": [
                {"name": "vanilla", "strategy": {"kind": "vanilla"}},
                {
                    "name": "static",
                    "strategy": {"kind": "static", "negative_cost": 0.2},
                    "train": {"epochs": 5},
                },
            ],
            "train": {
                "optimizer": {"kind": "adam", "lr": 0.01},
                "epochs": 3,
                "batch_size": 32,
                "sampler": {"kind": "stratified", "min_positives_per_batch": 1},
            },
            "n_seeds": 2,
            "best_k": 2,
            "base_seed": 7,
            "output_dir": out_dir,
        }

    def test_round_trip(self):
        config = experiment_from_json(self._doc())
        assert config.base_seed == 7
        assert config.arms[0].train.epochs == 3
        assert config.arms[1].train.epochs == 5  # arm-level override
        assert config.arms[1].train.batch_size == 32  # inherited
        doc2 = experiment_to_json(config)
        config2 = experiment_from_json(doc2)
        assert config2 == config

    def test_schema_rejects_bad_strategy(self):
        doc = self._doc()
        doc["arms"][0]["strategy"] = {"kind": "mystery"}
        with pytest.raises(Exception):
            experiment_from_json(doc)

    def test_schema_rejects_unknown_keys(self):
        doc = self._doc()
        doc["surprise"] = 1
        with pytest.raises(Exception):
            experiment_from_json(doc)


class TestLoadDatasets:
    def test_synthetic_split_sizes_and_shared_layout(self):
        train, dev, test = load_datasets(TINY_SOURCE)
        assert (train.n, dev.n, test.n) == (400, 150, 150)
        assert train.k == dev.k == test.k == 3
        # same source twice gives identical splits
        t2, d2, _ = load_datasets(TINY_SOURCE)
        np.testing.assert_array_equal(train.features, t2.features)
        np.testing.assert_array_equal(dev.features, d2.features)

    def test_file_source(self, tmp_path):
        ds = Dataset(np.eye(3), np.array([0, 1, 2]), k=3)
        for split in ("train", "dev", "test"):
            save(ds, tmp_path / f"{split}.jsonl")
        source = FileSource(
            str(tmp_path / "train.jsonl"),
            str(tmp_path / "dev.jsonl"),
            str(tmp_path / "test.jsonl"),
        )
        train, dev, test = load_datasets(source)
        assert train.n == dev.n == test.n == 3
