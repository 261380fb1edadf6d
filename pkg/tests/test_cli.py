"""Experiment driver: subcommands, exit codes, reports, reproducibility."""
import csv
import json
from pathlib import Path

import pytest

from regfuzz.cli import (
    EXIT_BUILD,
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_OK,
    MODEL_ORDER,
    config_hash,
    main,
)
from regfuzz.data import load_projects, train_size
from regfuzz.fis import infer
from regfuzz.model_io import load_model

SYNTH = "n=468,seed=5"


def run(*args):
    return main([str(a) for a in args])


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


@pytest.fixture(scope="module")
def pipeline_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("pipe")
    assert run("pipeline", "--synth", SYNTH, "--out", out) == EXIT_OK
    return out


@pytest.fixture(scope="module")
def trained_dir(tmp_path_factory, pipeline_dir):
    out = tmp_path_factory.mktemp("train")
    rc = run(
        "train", "--train", pipeline_dir / "band1_train.csv",
        "--seed", 0, "--out", out,
    )
    assert rc == EXIT_OK
    return out


class TestPipeline:
    def test_band_files_written(self, pipeline_dir):
        for band in ("band1", "band2", "band3", "combined"):
            assert (pipeline_dir / f"{band}.csv").exists()
            assert (pipeline_dir / f"{band}_train.csv").exists()
            assert (pipeline_dir / f"{band}_test.csv").exists()
            assert (pipeline_dir / f"{band}.meta.json").exists()

    def test_split_counts_consistent(self, pipeline_dir):
        full = load_projects(pipeline_dir / "band1.csv")
        train = load_projects(pipeline_dir / "band1_train.csv")
        test = load_projects(pipeline_dir / "band1_test.csv")
        # the default policy trims outliers from the test side only
        assert len(train) == train_size(len(full))
        assert len(test) <= len(full) - len(train)
        train_ids = {r.id for r in train.records}
        test_ids = {r.id for r in test.records}
        assert train_ids.isdisjoint(test_ids)

    def test_headers_embed_config_and_seed(self, pipeline_dir):
        first = (pipeline_dir / "band1.csv").read_text().splitlines()[0]
        assert first.startswith("# config=")
        assert "seed=" in first

    def test_meta_reports_provenance(self, pipeline_dir):
        meta = json.loads((pipeline_dir / "band1.meta.json").read_text())
        assert "_header" in meta
        assert any("band1" in line for line in meta["provenance"])
        assert meta["train"]["summary"]["n"] > 0

    def test_requires_exactly_one_source(self, tmp_path):
        assert run("pipeline", "--out", tmp_path) == EXIT_CONFIG
        assert (
            run(
                "pipeline", "--synth", SYNTH, "--data", "x.csv", "--out", tmp_path
            )
            == EXIT_CONFIG
        )

    def test_missing_data_file(self, tmp_path):
        rc = run("pipeline", "--data", tmp_path / "nope.csv", "--out", tmp_path)
        assert rc == EXIT_DATA

    def test_data_file_roundtrip(self, pipeline_dir, tmp_path):
        # a pipeline-written CSV is valid pipeline input
        rc = run(
            "pipeline", "--data", pipeline_dir / "combined.csv", "--out", tmp_path
        )
        assert rc == EXIT_OK

    def test_outlier_policy_both(self, tmp_path):
        rc = run(
            "pipeline", "--synth", SYNTH, "--outliers", "both", "--out", tmp_path
        )
        assert rc == EXIT_OK
        meta = json.loads((tmp_path / "band1.meta.json").read_text())
        assert set(meta["outliers"]) == {"train", "test"}

    def test_default_policy_trims_test_only(self, pipeline_dir):
        meta = json.loads((pipeline_dir / "band1.meta.json").read_text())
        assert set(meta["outliers"]) == {"test"}

    def test_bad_outlier_policy(self, tmp_path):
        # argparse rejects unknown choices itself, with the config exit code
        with pytest.raises(SystemExit) as exc:
            run("pipeline", "--synth", SYNTH, "--outliers", "sometimes",
                "--out", tmp_path)
        assert exc.value.code == EXIT_CONFIG


class TestTrain:
    def test_all_models_written(self, trained_dir):
        for name in MODEL_ORDER:
            assert (trained_dir / f"{name}.json").exists()
        assert (trained_dir / "selection.txt").exists()

    def test_mlr_report_fields(self, trained_dir):
        doc = json.loads((trained_dir / "mlr.json").read_text())
        assert set(doc) >= {"_header", "columns", "coefficients", "intercept", "r2"}
        assert len(doc["coefficients"]) == len(doc["columns"])

    def test_fuzzy_models_load_and_predict(self, trained_dir):
        model = load_model(trained_dir / "sugeno1.json")
        point = [500.0] * len(model.inputs)
        assert infer(model, point) > 0

    def test_selection_report_mentions_pvalues(self, trained_dir):
        text = (trained_dir / "selection.txt").read_text()
        assert "p-value" in text
        assert "r2" in text

    def test_fixture_mode_skips_training(self, tmp_path):
        rc = run("train", "--fis", "band2_sugeno1", "--out", tmp_path)
        assert rc == EXIT_OK
        model = load_model(tmp_path / "sugeno1.json")
        assert infer(model, [100.0, 5.0]) == pytest.approx(1422.1)

    def test_fis_accepts_model_paths(self, trained_dir, tmp_path):
        rc = run("train", "--fis", trained_dir / "mamdani.json", "--out", tmp_path)
        assert rc == EXIT_OK
        assert (tmp_path / "mamdani.json").exists()

    def test_unknown_fixture_name(self, tmp_path):
        rc = run("train", "--fis", "band9_sugeno1", "--out", tmp_path)
        assert rc == EXIT_DATA

    def test_train_requires_input(self, tmp_path):
        assert run("train", "--out", tmp_path) == EXIT_CONFIG

    def test_invalid_model_list(self, pipeline_dir, tmp_path):
        rc = run(
            "train", "--train", pipeline_dir / "band1_train.csv",
            "--models", "mlr;nonsense", "--out", tmp_path,
        )
        assert rc == EXIT_CONFIG

    def test_tiny_training_set_rejected(self, tmp_path):
        csv_path = tmp_path / "tiny.csv"
        csv_path.write_text(
            "id,afp,team_size,resource_level,dev_type,quality,effort\n"
            "a,100,5,1,new,A,800\n"
            "b,200,6,1,new,A,1600\n"
        )
        rc = run("train", "--train", csv_path, "--out", tmp_path)
        assert rc == EXIT_DATA


@pytest.fixture(scope="module")
def eval_dir(tmp_path_factory, pipeline_dir, trained_dir):
    out = tmp_path_factory.mktemp("eval")
    rc = run(
        "evaluate", "--test", pipeline_dir / "band1_test.csv",
        "--models-dir", trained_dir, "--out", out,
    )
    assert rc == EXIT_OK
    return out


class TestEvaluate:
    def test_reports_written(self, eval_dir):
        for name in ("metrics.csv", "wilcoxon.csv", "intervals.csv", "summary.txt"):
            assert (eval_dir / name).exists()

    def test_metrics_rows_ordered(self, eval_dir):
        rows = read_rows(eval_dir / "metrics.csv")
        assert [r["model"] for r in rows] == list(MODEL_ORDER)
        for row in rows:
            assert float(row["MAE"]) >= 0.0

    def test_wilcoxon_matrix_shape(self, eval_dir):
        rows = read_rows(eval_dir / "wilcoxon.csv")
        assert [r["model"] for r in rows] == list(MODEL_ORDER)
        for row in rows:
            assert row[row["model"]] == "X"

    def test_intervals_have_bounds(self, eval_dir):
        rows = read_rows(eval_dir / "intervals.csv")
        for row in rows:
            assert float(row["ci_low"]) <= float(row["mean_abs_error"])
            assert float(row["mean_abs_error"]) <= float(row["ci_high"])

    def test_summary_mentions_baseline(self, eval_dir):
        text = (eval_dir / "summary.txt").read_text()
        assert "random-guess baseline" in text
        assert "scott-knott" in text

    def test_rerun_byte_identical(self, tmp_path_factory, pipeline_dir, trained_dir):
        a = tmp_path_factory.mktemp("eval_a")
        b = tmp_path_factory.mktemp("eval_b")
        for out in (a, b):
            rc = run(
                "evaluate", "--test", pipeline_dir / "band1_test.csv",
                "--models-dir", trained_dir, "--out", out,
            )
            assert rc == EXIT_OK
        for name in ("metrics.csv", "wilcoxon.csv", "intervals.csv", "summary.txt"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_missing_models_dir(self, pipeline_dir, tmp_path):
        rc = run(
            "evaluate", "--test", pipeline_dir / "band1_test.csv",
            "--models-dir", tmp_path / "nope", "--out", tmp_path,
        )
        assert rc == EXIT_DATA

    def test_requires_test_set(self, tmp_path):
        assert run("evaluate", "--out", tmp_path) == EXIT_CONFIG


class TestConfig:
    def test_hash_ignores_output_dir(self):
        base = {"seed": "0", "ratio": "0.7", "out": "/tmp/a"}
        moved = dict(base, out="/somewhere/else")
        assert config_hash(base) == config_hash(moved)

    def test_hash_sensitive_to_values(self):
        a = {"seed": "0", "ratio": "0.7"}
        b = {"seed": "1", "ratio": "0.7"}
        assert config_hash(a) != config_hash(b)

    def test_config_file_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("# experiment\nsynth = n=50,seed=2,fractions=0.5:0.3:0.2\n")
        rc = run("pipeline", "--config", cfg, "--out", tmp_path / "o1")
        assert rc == EXIT_OK
        assert (tmp_path / "o1" / "combined.csv").exists()

    def test_flag_overrides_config_file(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("synth = n=50,seed=2,fractions=0.5:0.3:0.2\nratio = 0.5\n")
        rc = run(
            "pipeline", "--config", cfg, "--ratio", "0.8", "--out", tmp_path / "o2"
        )
        assert rc == EXIT_OK
        full = load_projects(tmp_path / "o2" / "combined.csv")
        train = load_projects(tmp_path / "o2" / "combined_train.csv")
        assert len(train) == train_size(len(full), 0.8)

    def test_malformed_config_line(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("this line has no equals sign\n")
        rc = run("pipeline", "--config", cfg, "--out", tmp_path)
        assert rc == EXIT_CONFIG

    def test_bad_synth_spec(self, tmp_path):
        rc = run("pipeline", "--synth", "seed=1", "--out", tmp_path)
        assert rc == EXIT_CONFIG


def test_seed_changes_pipeline_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run("pipeline", "--synth", "n=60,seed=1,fractions=0.5:0.3:0.2", "--out", a)
    run("pipeline", "--synth", "n=60,seed=2,fractions=0.5:0.3:0.2", "--out", b)
    ea = [r.effort for r in load_projects(a / "combined.csv").records]
    eb = [r.effort for r in load_projects(b / "combined.csv").records]
    assert ea != eb
