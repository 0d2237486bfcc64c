import numpy as np
import pytest
from scipy import stats

from data.formats import (
    load_labeled_csv,
    read_dataset,
    read_factor_net,
    read_mlp,
    read_rows,
    write_dataset,
    write_factor_net,
    write_mlp,
    write_rows,
)
from data.generator import DataGenerator
from inference.conversion import mlp_to_bayes_net
from models.dataset import Dataset, GenKind, GenSpec
from models.errors import DataFormatError, StructureError
from models.factor_net import NetKind
from models.mlp import Mlp, OutputKind
from network.propagation import predict


class TestRoundTrips:

    def test_mlp(self, tmp_path, random_net):
        path = tmp_path / "net.mlp"
        write_mlp(random_net, path)
        assert read_mlp(path) == random_net

    def test_categorical_mlp(self, tmp_path, rng):
        mlp = Mlp.initialize([2, 2, 3], rng, 1.0, OutputKind.CATEGORICAL)
        write_mlp(mlp, tmp_path / "cat.mlp")
        assert read_mlp(tmp_path / "cat.mlp") == mlp

    def test_factor_net(self, tmp_path):
        net = mlp_to_bayes_net(Mlp.uniform([2, 2, 1], np.random.default_rng(0), 3.0))
        write_factor_net(net, tmp_path / "bn.factornet")
        loaded = read_factor_net(tmp_path / "bn.factornet")
        assert loaded == net
        assert loaded.kind is NetKind.BAYES

    def test_dataset(self, tmp_path, small_dataset):
        write_dataset(small_dataset, tmp_path / "data.csv")
        loaded = read_dataset(tmp_path / "data.csv")
        np.testing.assert_array_equal(loaded.X, small_dataset.X)
        np.testing.assert_array_equal(loaded.y, small_dataset.y)
        np.testing.assert_array_equal(loaded.p_true, small_dataset.p_true)
        assert loaded.name == "data"

    def test_dataset_without_truth(self, tmp_path):
        write_dataset(Dataset([[0.25], [1.0]], [0, 1]), tmp_path / "plain.csv")
        assert read_dataset(tmp_path / "plain.csv").p_true is None

    def test_report_rows(self, tmp_path):
        write_rows(tmp_path / "rows.csv", ["a", "b"], [{"a": 0.1, "b": "x"}, {"a": 2}])
        assert (tmp_path / "rows.csv").read_text() == "a,b\n0.1,x\n2,\n"
        assert read_rows(tmp_path / "rows.csv") == [{"a": "0.1", "b": "x"}, {"a": "2", "b": ""}]


class TestMalformedFiles:

    @staticmethod
    def _line(tmp_path, name, text, reader):
        path = tmp_path / name
        path.write_text(text)
        with pytest.raises(DataFormatError) as excinfo:
            reader(path)
        return excinfo.value.line_number

    def test_mlp_bad_number(self, tmp_path):
        text = "mlp 2-1 bernoulli\nweights 0\n1.0 abc\nbiases 0\n0.5\n"
        assert self._line(tmp_path, "a.mlp", text, read_mlp) == 3

    def test_mlp_short_row(self, tmp_path):
        text = "mlp 2-1 bernoulli\nweights 0\n1.0\nbiases 0\n0.5\n"
        assert self._line(tmp_path, "b.mlp", text, read_mlp) == 3

    def test_mlp_bad_header(self, tmp_path):
        assert self._line(tmp_path, "c.mlp", "network 2-1\n", read_mlp) == 1

    def test_factor_wrong_table_size(self, tmp_path):
        text = "factornet markov 2\nfactor 0 1 : 1 2 3 4\nfactor 0 1 : 1 1 1\n"
        assert self._line(tmp_path, "d.factornet", text, read_factor_net) == 3

    def test_factor_missing_separator(self, tmp_path):
        text = "factornet markov 2\nfactor 0 1 1 2 3 4\n"
        assert self._line(tmp_path, "e.factornet", text, read_factor_net) == 2

    def test_dataset_field_count(self, tmp_path):
        assert self._line(tmp_path, "f.csv", "x0,x1,y\n1,0,1\n1,0\n", read_dataset) == 3

    def test_dataset_bad_label(self, tmp_path):
        assert self._line(tmp_path, "g.csv", "x0,y\n1,1\n0,1\n1,2\n", read_dataset) == 4

    def test_dataset_bad_header(self, tmp_path):
        assert self._line(tmp_path, "h.csv", "a,b,label\n1,0,1\n", read_dataset) == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(IOError):
            read_mlp(tmp_path / "absent.mlp")


class TestLabeledCsv:

    def test_scaling_and_labels(self, tmp_path):
        path = tmp_path / "survey.csv"
        path.write_text("a,b,label\n1,10,yes\n3,10,no\n2,10,yes\n")
        dataset = load_labeled_csv(path, "label")
        np.testing.assert_allclose(dataset.X, [[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]])
        np.testing.assert_array_equal(dataset.y, [1, 0, 1])
        assert dataset.name == "survey"

    def test_explicit_positive(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("label,a\n0,5\n1,7\n")
        np.testing.assert_array_equal(load_labeled_csv(path, "label", positive="0").y, [1, 0])

    def test_too_many_labels(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,label\n1,x\n2,y\n3,z\n")
        with pytest.raises(DataFormatError):
            load_labeled_csv(path, "label")

    def test_missing_column(self, tmp_path):
        path = tmp_path / "u.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DataFormatError):
            load_labeled_csv(path, "label")


class TestDataGenerator:

    def test_deterministic(self):
        spec = GenSpec(GenKind.BN, (3, 3, 1), 1.0, 200, 5)
        (gen_a, a), (gen_b, b) = DataGenerator.generate(spec), DataGenerator.generate(spec)
        assert gen_a.mlp == gen_b.mlp
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)
        np.testing.assert_array_equal(a.p_true, b.p_true)

    def test_seed_changes_data(self):
        a = DataGenerator.generate(GenSpec(GenKind.BN, (3, 3, 1), 1.0, 200, 5))[1]
        b = DataGenerator.generate(GenSpec(GenKind.BN, (3, 3, 1), 1.0, 200, 6))[1]
        assert not np.array_equal(a.X, b.X)

    @pytest.mark.parametrize("kind", [GenKind.BN, GenKind.MN])
    def test_zero_weights_are_coin_flips(self, kind):
        _, dataset = DataGenerator.generate(GenSpec(kind, (2, 2, 1), 0.0, 30, 0))
        np.testing.assert_allclose(dataset.p_true, 0.5, atol=1e-12)

    @pytest.mark.parametrize("w", DataGenerator.WEIGHT_SCALES)
    def test_weights_within_scale(self, w):
        gen = DataGenerator.gen_model(GenSpec(GenKind.BN, (4, 4, 4, 1), w, 1, 3))
        assert all(np.all(np.abs(block) < w) for block in gen.mlp.weights)
        assert all(np.all(b == 0) for b in gen.mlp.biases)

    def test_weights_are_uniform(self):
        w = 1.0
        weights = np.concatenate([
            block.ravel()
            for seed in range(50)
            for block in DataGenerator.gen_model(GenSpec(GenKind.BN, (4, 4, 4, 1), w, 1, seed)).mlp.weights
        ])
        assert weights.size == 1800
        assert stats.kstest(weights, "uniform", args=(-w, 2 * w)).pvalue > 0.01

    def test_no_hidden_layer_truth_is_logistic(self):
        gen, dataset = DataGenerator.generate(GenSpec(GenKind.BN, (3, 1), 3.0, 50, 2))
        np.testing.assert_allclose(dataset.p_true, predict(gen.mlp, dataset.X), rtol=1e-12)

    def test_labels_follow_truth(self):
        _, dataset = DataGenerator.generate(GenSpec(GenKind.BN, (4, 4, 4, 1), 3.0, 4000, 1))
        p = dataset.p_true.mean()
        assert abs(dataset.y.mean() - p) < 4 * np.sqrt(p * (1 - p) / len(dataset))

    def test_markov_kind(self):
        gen, dataset = DataGenerator.generate(GenSpec(GenKind.MN, (2, 2, 1), 1.0, 100, 4))
        assert gen.net.kind is NetKind.MARKOV
        assert dataset.is_binary
        assert dataset.name == "MN (1)"
        assert np.all((dataset.p_true > 0) & (dataset.p_true < 1))

    def test_markov_labels_within_binomial_interval(self):
        gen = DataGenerator.gen_model(GenSpec(GenKind.MN, (2, 2, 1), 1.0, 1, 8))
        dataset = DataGenerator.sample_dataset(gen, 20000, 3)
        for x in np.unique(dataset.X, axis=0):
            rows = np.all(dataset.X == x, axis=1)
            p_true = dataset.p_true[rows][0]
            low, high = stats.binom.interval(0.999, rows.sum(), p_true)
            assert low <= dataset.y[rows].sum() <= high

    def test_rejects_multiple_outputs(self):
        with pytest.raises(StructureError):
            GenSpec(GenKind.BN, (2, 2), 1.0, 10, 0)
