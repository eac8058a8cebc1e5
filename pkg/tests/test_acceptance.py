"""Replication studies against published simulation tables.

Each test runs hundreds of fits; all are marked slow and deselected by default
(run with ``pytest -m slow``).
"""

import numpy as np
import pytest

from stable_tmle.core.estimators import iterated_gmm_fit, tml_fit
from stable_tmle.core.experiments import ExperimentConfig, run
from stable_tmle.core.ou_model import tcml_fit
from stable_tmle.core.reports import read_csv
from stable_tmle.core.sampling import OUParams, RngStream, sample_ou_path, sample_stable, transition_scale

from .conftest import REFERENCE_THETA

pytestmark = pytest.mark.slow

# (alpha, beta) -> TMLE replication (mean, sd) of (alpha, beta, sigma, mu), n = 1000
IID_REFERENCE = {
    (0.5, 0.0): ((0.5001, -0.0023, 1.0000, -0.0009), (0.0191, 0.0455, 0.0773, 0.0266)),
    (0.5, 0.5): ((0.4995, 0.4997, 1.0038, 0.0009), (0.0181, 0.0387, 0.0752, 0.0366)),
    (0.7, 0.0): ((0.7000, -0.0016, 1.0032, 0.0002), (0.0240, 0.0436, 0.0575, 0.0337)),
    (0.7, 0.5): ((0.7023, 0.4997, 0.9987, 0.0012), (0.0243, 0.0399, 0.0549, 0.0409)),
    (1.0, 0.0): ((1.0018, -0.0004, 1.0038, 0.0006), (0.0353, 0.0568, 0.0453, 0.0492)),
    (1.0, 0.5): ((1.0003, 0.4995, 1.0002, 0.0002), (0.0345, 0.0478, 0.0434, 0.0477)),
    (1.3, 0.0): ((1.3011, -0.0027, 1.0000, 0.0001), (0.0449, 0.0744, 0.0372, 0.0523)),
    (1.3, 0.5): ((1.3014, 0.5002, 0.9996, 0.0003), (0.0439, 0.0652, 0.0366, 0.0527)),
    (1.6, 0.0): ((1.6004, 0.0004, 0.9990, -0.0016), (0.0491, 0.1137, 0.0318, 0.0560)),
    (1.6, 0.5): ((1.6006, 0.5033, 0.9986, -0.0009), (0.0485, 0.1008, 0.0315, 0.0553)),
    (1.9, 0.0): ((1.9025, 0.0160, 0.9998, -0.0018), (0.0390, 0.3478, 0.0267, 0.0531)),
    (1.9, 0.5): ((1.9012, 0.5317, 0.9994, -0.0009), (0.0376, 0.3027, 0.0266, 0.0532)),
}
ORDER = ("alpha", "beta", "sigma", "mu")


def _montecarlo(out, **values):
    overrides = {"out": str(out), **{k: str(v) for k, v in values.items()}}
    run(ExperimentConfig.from_sources(None, overrides))
    return read_csv(out / "rows.csv"), read_csv(out / "summary.csv")


@pytest.fixture(scope="module")
def iid_runs(tmp_path_factory):
    """200 replications at the two detailed configurations, TMLE and explicit GMM."""
    runs = {}
    for alpha, beta in ((1.3, 0.0), (1.6, 0.5)):
        out = tmp_path_factory.mktemp(f"iid_{alpha}_{beta}")
        runs[alpha, beta], _ = _montecarlo(
            out, mode="montecarlo", theta0=f"0,1,{alpha},{beta}", n=1000, reps=200, estimator="tmle,explicit-gmm"
        )
    return runs


@pytest.mark.parametrize("config", [(1.3, 0.0), (1.6, 0.5)])
def test_iid_replication_bands(iid_runs, config):
    rows = iid_runs[config]
    tmle = rows[rows.estimator == "tmle"]
    means, sds = IID_REFERENCE[config]
    assert abs(tmle["alpha"].mean() - means[0]) < 0.010
    assert abs(tmle["beta"].mean() - means[1]) < 0.02
    for name, published_sd in zip(ORDER, sds):
        assert 0.7 * published_sd <= tmle[name].std(ddof=1) <= 1.3 * published_sd, name


def test_standard_errors_match_replication_spread(iid_runs):
    tmle = iid_runs[1.3, 0.0].query("estimator == 'tmle'")
    ratio = tmle["se_alpha"].mean() / tmle["alpha"].std(ddof=1)
    assert 0.75 <= ratio <= 1.25


def test_explicit_gmm_matches_tmle_mse(iid_runs):
    rows = iid_runs[1.3, 0.0]
    truth = dict(zip(("mu", "sigma", "alpha", "beta"), REFERENCE_THETA.as_array()))
    for name, value in truth.items():
        mse = {est: np.mean((group[name] - value) ** 2) for est, group in rows.groupby("estimator")}
        assert mse["explicit-gmm"] == pytest.approx(mse["tmle"], rel=0.10), name


@pytest.mark.parametrize("config", sorted(IID_REFERENCE))
def test_iid_replication_sweep(tmp_path, config):
    alpha, beta = config
    rows, _ = _montecarlo(tmp_path, mode="montecarlo", theta0=f"0,1,{alpha},{beta}", n=1000, reps=100)
    truth = {"alpha": alpha, "beta": beta, "sigma": 1.0, "mu": 0.0}
    _, sds = IID_REFERENCE[config]
    for name, published_sd in zip(ORDER, sds):
        assert abs(rows[name].mean() - truth[name]) < 4 * published_sd / np.sqrt(100), name
    allowed = 0.15 if alpha == 1.9 else 0.05
    assert (~rows["converged"]).mean() < allowed


def test_iterated_gmm_reaches_tmle():
    for index in range(20):
        data = sample_stable(1000, REFERENCE_THETA, RngStream(2024, stream_id=index))
        tmle = tml_fit(data)
        gmm, _ = iterated_gmm_fit(data, rounds=3)
        assert np.max(np.abs(gmm.theta_hat.as_array() - tmle.theta_hat.as_array())) < 1e-4


def test_root_n_consistency(tmp_path):
    spreads = []
    for n in (1000, 4000):
        rows, _ = _montecarlo(tmp_path / str(n), mode="montecarlo", n=n, reps=100)
        spreads.append(rows["alpha"].std(ddof=1))
    assert 0.4 <= spreads[1] / spreads[0] <= 0.6


def test_ou_replication_bands(tmp_path):
    rows, summary = _montecarlo(tmp_path, mode="montecarlo-ou", ou="1.5,1,1", h=0.1, n=1000, reps=100, trim=1)
    tmle = rows[rows.estimator == "tmle"]
    assert abs(tmle["alpha"].mean() - 1.500) < 0.015
    assert abs(tmle["sigma"].mean() - 1.003) < 0.02
    assert abs(tmle["lambda"].mean() - 1.004) < 0.03
    for name, published_sd in zip(("alpha", "sigma", "lambda"), (0.050, 0.052, 0.061)):
        assert 0.6 * published_sd <= tmle[name].std(ddof=1) <= 1.4 * published_sd, name

    trimmed = summary[(summary.estimator == "tmle") & (summary.parameter == "lambda_star_trim1")].iloc[0]
    assert -0.5 <= trimmed["skew"] <= 0.5
    assert 2.3 <= trimmed["kurtosis"] <= 4.3


def test_fast_mean_reversion_decouples():
    p, h = OUParams(alpha=1.5, sigma=1.0, lam=200.0), 0.1
    path = sample_ou_path(p, h, 2000, RngStream(99))
    conditional = tcml_fit(path)
    marginal = tml_fit(path.values)

    assert abs(conditional.theta_hat.alpha - marginal.theta_hat.alpha) < 3 * marginal.std_errors[2]
    # sigma and lambda are not separately identified here; the transition scale is
    scale = transition_scale(conditional.theta_hat, h)
    assert abs(scale - marginal.theta_hat.sigma) < 3 * marginal.std_errors[1]
