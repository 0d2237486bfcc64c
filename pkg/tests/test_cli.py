import numpy as np
import pytest

import cli
from data.formats import read_dataset, read_mlp, read_rows
from experiments.config import RunConfig
from experiments.runner import evaluate, stochastic_predictions
from models.errors import DivergenceError, StructureError, ToleranceBreach
from models.mlp import Mlp

TINY_FLAGS = ["--epochs", "1", "--burn-in", "1", "--leapfrog", "2", "--n-samples", "10"]


@pytest.fixture
def generated(tmp_path):
    out = tmp_path / "gen"
    assert cli.main(["gen-data", "--seed", "3", "--n", "40", "--dims", "2-2-1", "--out", str(out)]) == cli.EXIT_OK
    return out


class TestParseDims:

    def test_valid(self):
        assert cli.parse_dims("4-4-1") == (4, 4, 1)

    @pytest.mark.parametrize("text", ["4-x-1", "4-0-1", ""])
    def test_invalid(self, text):
        with pytest.raises(StructureError):
            cli.parse_dims(text)


class TestGenData:

    def test_same_seed_same_bytes(self, tmp_path, capsys):
        for name in ("a", "b"):
            assert cli.main(["gen-data", "--seed", "7", "--n", "50", "--dims", "3-2-1",
                             "--out", str(tmp_path / name)]) == cli.EXIT_OK
        assert capsys.readouterr().out == "7\n7\n"
        for file in ("data.csv", "model.factornet", "model.mlp"):
            assert (tmp_path / "a" / file).read_bytes() == (tmp_path / "b" / file).read_bytes()

    def test_dataset_contents(self, generated):
        dataset = read_dataset(generated / "data.csv")
        assert len(dataset) == 40
        assert dataset.num_features == 2
        assert dataset.p_true is not None

    def test_bad_dims(self, tmp_path):
        assert cli.main(["gen-data", "--dims", "4-x-1", "--out", str(tmp_path)]) == cli.EXIT_USAGE


class TestTrain:

    def test_zero_epochs_saves_initialization(self, tmp_path, generated):
        out = tmp_path / "model"
        assert cli.main(["train", "--data", str(generated / "data.csv"), "--hidden", "4-4",
                         "--epochs", "0", "--out", str(out)]) == cli.EXIT_OK
        assert read_mlp(out / "model.mlp") == Mlp.initialize((2, 4, 4, 1), np.random.default_rng(0))
        assert [row["epoch"] for row in read_rows(out / "losses.csv")] == ["0"]

    def test_missing_data(self, tmp_path):
        assert cli.main(["train", "--data", str(tmp_path / "absent.csv"), "--out", str(tmp_path)]) == cli.EXIT_USAGE

    def test_bad_config_key(self, tmp_path, generated):
        config = tmp_path / "run.cfg"
        config.write_text("epochs=2\ncolour=blue\n")
        assert cli.main(["train", "--data", str(generated / "data.csv"), "--config", str(config),
                         "--out", str(tmp_path)]) == cli.EXIT_USAGE

    def test_divergence_exit_code(self, tmp_path, generated, monkeypatch):
        def diverge(*args, **kwargs):
            raise DivergenceError(0, float("nan"), "lr=10")

        monkeypatch.setattr(cli, "train_mlp", diverge)
        assert cli.main(["train", "--data", str(generated / "data.csv"),
                         "--out", str(tmp_path)]) == cli.EXIT_DIVERGED


    def test_plain_labelled_csv(self, tmp_path):
        path = tmp_path / "plain.csv"
        rows = ["height,weight,label"] + [f"{150 + i},{40 + 3 * (i % 7)},{'yes' if i % 3 else 'no'}" for i in range(30)]
        path.write_text("\n".join(rows) + "\n")
        out = tmp_path / "model"
        assert cli.main(["train", "--data", str(path), "--label-column", "label", "--positive", "yes",
                         "--hidden", "2", "--epochs", "1", "--out", str(out)]) == cli.EXIT_OK
        assert read_mlp(out / "model.mlp").layer_dims == (2, 2, 1)

        assert cli.main(["finetune", "--model", str(out / "model.mlp"), "--data", str(path),
                         "--label-column", "label", "--sampler", "gibbs", "--out", str(out)] + TINY_FLAGS) == cli.EXIT_OK
        report = read_rows(out / "report.csv")
        assert {row["metric"] for row in report} == {"ece"}
        assert {row["dataset"] for row in report} == {"plain"}

    def test_positive_needs_label_column(self, tmp_path, generated):
        assert cli.main(["train", "--data", str(generated / "data.csv"), "--positive", "1",
                         "--out", str(tmp_path)]) == cli.EXIT_USAGE


class TestFinetuneAndReport:

    def test_append_then_aggregate(self, tmp_path, generated):
        model = tmp_path / "model"
        assert cli.main(["train", "--data", str(generated / "data.csv"), "--hidden", "2",
                         "--epochs", "2", "--out", str(model)]) == cli.EXIT_OK
        report = tmp_path / "report.csv"
        for seed in ("0", "1"):
            status = cli.main(["finetune", "--model", str(model / "model.mlp"), "--data", str(generated / "data.csv"),
                               "--sampler", "gibbs", "--weight", "1.0", "--label", "BN (1)", "--with-baseline",
                               "--report", str(report), "--seed", seed, "--out", str(model)] + TINY_FLAGS)
            assert status == cli.EXIT_OK
        rows = read_rows(report)
        assert len(rows) == 8
        assert {row["method"] for row in rows} == {"dnn", "gibbs"}
        assert len(read_rows(tmp_path / "timings.csv")) == 2
        assert (model / "model-gibbs.mlp").exists()

        table_dir = tmp_path / "table"
        assert cli.main(["report", str(report), "--timings", str(tmp_path / "timings.csv"),
                         "--out", str(table_dir)]) == cli.EXIT_OK
        table = read_rows(table_dir / "table.csv")
        assert len(table) == 4
        assert all(row["n"] == "2" for row in table)
        assert (table_dir / "timings_table.csv").exists()

    def test_hmc_method_name(self, tmp_path, generated):
        model = tmp_path / "model"
        cli.main(["train", "--data", str(generated / "data.csv"), "--hidden", "2", "--epochs", "1", "--out", str(model)])
        assert cli.main(["finetune", "--model", str(model / "model.mlp"), "--data", str(generated / "data.csv"),
                         "--sampler", "hmc", "--L", "100", "--out", str(model)] + TINY_FLAGS) == cli.EXIT_OK
        assert {row["method"] for row in read_rows(model / "report.csv")} == {"hmc-L100"}

    def test_zero_learning_rate_keeps_the_input_network(self, tmp_path, generated):
        model = tmp_path / "model"
        cli.main(["train", "--data", str(generated / "data.csv"), "--hidden", "2", "--epochs", "2", "--out", str(model)])
        assert cli.main(["finetune", "--model", str(model / "model.mlp"), "--data", str(generated / "data.csv"),
                         "--sampler", "hmc", "--lr", "0", "--out", str(model)] + TINY_FLAGS) == cli.EXIT_OK
        mlp = read_mlp(model / "model.mlp")
        assert read_mlp(model / "model-hmc-L10.mlp") == mlp

        cfg = RunConfig(lr=0.0, epochs=1, burn_in=1, leapfrog=2, n_samples=10)
        _, test = read_dataset(generated / "data.csv").split(cfg.train_fraction, cfg.seed)
        expected = evaluate(stochastic_predictions(mlp, test.X, cfg), test, cfg.bins)
        reported = {row["metric"]: float(row["value"]) for row in read_rows(model / "report.csv")}
        assert reported == pytest.approx(expected, rel=1e-12)


class TestVerify:

    def test_oracle_passes(self, tmp_path):
        out = tmp_path / "verify.csv"
        assert cli.main(["verify-theorems", "--suite", "oracle", "--seeds", "1", "--out", str(out)]) == cli.EXIT_OK
        rows = read_rows(out)
        assert len(rows) == 12
        assert {row["check"] for row in rows} == {"oracle"}

    def test_breach_still_writes_rows(self, tmp_path, monkeypatch):
        row = {"seed": 0, "dims": "2-2-1", "L": 10, "max_prob_gap": 0.5, "max_grad_gap": "", "check": "theorem1"}

        def breach(*args, **kwargs):
            raise ToleranceBreach(["theorem1 seed=0 L=10: gap 0.5"], [row])

        monkeypatch.setattr(cli, "verify_all", breach)
        out = tmp_path / "verify.csv"
        assert cli.main(["verify-theorems", "--out", str(out)]) == cli.EXIT_BREACH
        assert read_rows(out)[0]["max_prob_gap"] == "0.5"

    def test_grid_flags_reach_the_suites(self, tmp_path, monkeypatch):
        seen = {}

        def capture(cfg, suites):
            seen["cfg"], seen["suites"] = cfg, suites
            return []

        monkeypatch.setattr(cli, "verify_all", capture)
        assert cli.main(["verify-theorems", "--suite", "theorem2", "--seeds", "2", "--seed", "5",
                         "--dims", "2-2-1", "--dims", "3-2-1", "--prob-exponents", "0", "1", "2",
                         "--grad-L", "10", "100", "--out", str(tmp_path / "v.csv")]) == cli.EXIT_OK
        cfg = seen["cfg"]
        assert seen["suites"] == ["theorem2"]
        assert cfg.seeds == (5, 6)
        assert cfg.dims == ((2, 2, 1), (3, 2, 1))
        assert cfg.prob_exponents == (0, 1, 2)
        assert cfg.grad_L == (10, 100)

    def test_bad_dims_flag(self, tmp_path):
        assert cli.main(["verify-theorems", "--suite", "theorem1", "--dims", "2-x-1",
                         "--out", str(tmp_path / "v.csv")]) == cli.EXIT_USAGE


class TestRun:

    def test_small_comparison(self, tmp_path):
        out = tmp_path / "runs"
        status = cli.main(["run", "--seeds", "2", "--n", "40", "--dims", "2-2-1", "--train-epochs", "2",
                           "--Ls", "10", "--out", str(out)] + TINY_FLAGS)
        assert status == cli.EXIT_OK
        assert len(read_rows(out / "report.csv")) == 16
        assert len(read_rows(out / "timings.csv")) == 8
        table = read_rows(out / "table.csv")
        assert {row["method"] for row in table} == {"dnn", "sgd", "gibbs", "hmc-L10"}
        assert (out / "timings_table.csv").exists()
