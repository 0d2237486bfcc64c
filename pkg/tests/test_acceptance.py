"""
Twenty-seed comparison on BN (0.3) data at the default settings.

Each seed trains a 4-4-4-1 network for 100 epochs and then fine-tunes it
for 20 epochs with plain gradients, Gibbs and HMC at L = 10 and L = 1000.
"""

from collections import defaultdict

import numpy as np
import pytest

from experiments.report import aggregate_timings
from experiments.runner import METHOD_DNN, METHOD_GIBBS, METHOD_SGD, SeedTask, hmc_method, run_experiment
from metrics.calibration import paired_ttest_less

SEEDS = range(20)

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def comparison():
    tasks = [SeedTask(seed=seed, Ls=(10.0, 1000.0)) for seed in SEEDS]
    rows, timings = run_experiment(tasks)
    mae = defaultdict(dict)
    for row in rows:
        if row["metric"] == "mae":
            mae[row["method"]][row["seed"]] = row["value"]
    per_epoch = {line["method"]: line["seconds_per_epoch"]
                 for line in aggregate_timings(timings) if line["phase"] == "finetune"}
    return mae, per_epoch


def _paired(mae, method, baseline):
    seeds = sorted(mae[baseline])
    return np.array([mae[method][s] for s in seeds]), np.array([mae[baseline][s] for s in seeds])


class TestTwentySeedComparison:

    def test_every_seed_reported(self, comparison):
        mae, _ = comparison
        for method in (METHOD_DNN, METHOD_SGD, METHOD_GIBBS, hmc_method(10.0), hmc_method(1000.0)):
            assert sorted(mae[method]) == list(SEEDS)

    def test_large_L_stays_close_to_the_network(self, comparison):
        mae, _ = comparison
        hmc, dnn = _paired(mae, hmc_method(1000.0), METHOD_DNN)
        assert abs(hmc.mean() - dnn.mean()) <= 0.2 * dnn.mean()

    def test_gradient_epoch_is_cheapest(self, comparison):
        _, per_epoch = comparison
        assert per_epoch[METHOD_SGD] < per_epoch[hmc_method(10.0)]
        assert per_epoch[METHOD_SGD] < per_epoch[METHOD_GIBBS]

    def test_hmc_epoch_cheaper_than_gibbs(self, comparison):
        _, per_epoch = comparison
        assert per_epoch[hmc_method(10.0)] < per_epoch[METHOD_GIBBS]

    @pytest.mark.xfail(strict=False, reason="at the defaults HMC L=10 trails continued SGD on BN (0.3): "
                                            "mean MAE 0.029085 against 0.028888 (network 0.030062)")
    def test_hmc_beats_continued_gradient_training(self, comparison):
        mae, _ = comparison
        hmc, sgd = _paired(mae, hmc_method(10.0), METHOD_SGD)
        assert hmc.mean() < sgd.mean()
        assert paired_ttest_less(hmc, sgd) < 0.05
