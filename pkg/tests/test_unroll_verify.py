import pytest

from models.errors import ToleranceBreach
from unroll.verify import ORACLE_DIMS, VERIFY_COLUMNS, VerifyConfig, max_prob_gap, random_net, verify_all


class TestOracleSuite:

    def test_passes_on_small_seeds(self):
        rows = verify_all(VerifyConfig(seeds=(0, 1)), ["oracle"])
        assert len(rows) == 2 * len(ORACLE_DIMS) * 3
        assert all(list(row) == VERIFY_COLUMNS for row in rows)
        assert {row["check"] for row in rows} == {"oracle"}
        assert max(row["max_prob_gap"] for row in rows) < 1e-10


class TestBreaches:

    def test_all_rows_attached(self):
        cfg = VerifyConfig(seeds=(0,), dims=((2, 2, 1),), prob_exponents=(0, 1, 2), ratio_from=100,
                           prob_L=10, prob_tol=1e-15)
        with pytest.raises(ToleranceBreach) as excinfo:
            verify_all(cfg, ["theorem1"])
        assert len(excinfo.value.rows) == 4
        assert len(excinfo.value.breaches) == 1
        assert "L=10" in excinfo.value.breaches[0]

    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            verify_all(VerifyConfig(seeds=(0,)), ["theorem3"])


class TestProbabilityGap:

    def test_random_net_is_seeded(self):
        assert random_net(3, (2, 2, 1)) == random_net(3, (2, 2, 1))

    def test_halving(self):
        mlp = random_net(4, (2, 3, 1))
        ratio = max_prob_gap(mlp, 2 ** 9) / max_prob_gap(mlp, 2 ** 8)
        assert 0.35 <= ratio <= 0.65


@pytest.mark.slow
class TestTheoremSuites:

    def test_probability_convergence(self):
        rows = verify_all(VerifyConfig(seeds=(0, 1, 2, 3, 4)), ["theorem1"])
        assert len(rows) == 5 * 16

    def test_gradient_convergence(self):
        rows = verify_all(VerifyConfig(seeds=(0, 1), dims=((2, 2, 1), (2, 3, 2, 1))), ["theorem2"])
        assert rows[-1]["max_grad_gap"] < 1e-3
