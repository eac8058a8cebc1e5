import numpy as np
import pytest
from numpy.testing import assert_allclose

from stable_tmle.core.errors import InvalidParameter
from stable_tmle.core.numkit import finite_diff_jacobian
from stable_tmle.core.stable_model import BRIDGE_WIDTH, StableParams, chf, chf_gradient, log_chf, log_chf_gradient

U = np.array([-3.0, -0.7, 0.01, 0.3, 1.0, 2.5, 5.01])


def test_origin_is_exact():
    theta = StableParams(mu=0.4, sigma=2.0, alpha=0.7, beta=-0.3)
    assert log_chf(0.0, theta) == 0
    assert chf(0.0, theta) == 1
    _, grads = log_chf_gradient(np.array([0.0, 1.0]), theta)
    assert np.all(grads[:, 0] == 0)


def test_gaussian_endpoint():
    theta = StableParams(mu=0.5, sigma=1.5, alpha=2.0, beta=0.7)
    expected = np.exp(-((1.5 * U) ** 2) + 0.5j * U)
    assert_allclose(chf(U, theta), expected, atol=1e-12)


def test_cauchy_and_alpha_one_formula():
    theta = StableParams(mu=0.2, sigma=0.8, alpha=1.0, beta=0.0)
    assert_allclose(chf(U, theta), np.exp(-0.8 * np.abs(U) + 0.2j * U), rtol=1e-14)

    skewed = StableParams(mu=0.2, sigma=0.8, alpha=1.0, beta=0.6)
    a = 0.8 * U
    psi = -np.abs(a) - 1j * (2 * 0.6 / np.pi) * a * np.log(np.abs(a)) + 0.2j * U
    assert_allclose(log_chf(U, skewed), psi, rtol=1e-13, atol=1e-15)


@pytest.mark.parametrize("alpha", [0.6, 1.0, 1.002, 1.3, 1.9, 2.0])
def test_location_and_scale_act_on_the_argument(alpha):
    theta = StableParams(mu=0.3, sigma=1.4, alpha=alpha, beta=0.6)
    standard = StableParams(mu=0.0, sigma=1.0, alpha=alpha, beta=0.6)
    assert_allclose(chf(U, theta), np.exp(0.3j * U) * chf(1.4 * U, standard), rtol=1e-13, atol=1e-15)


def test_negative_argument_conjugates():
    theta = StableParams(mu=0.3, sigma=1.4, alpha=1.3, beta=0.6)
    u = np.linspace(0.1, 5.0, 50)
    assert_allclose(chf(-u, theta), np.conj(chf(u, theta)), rtol=1e-14, atol=1e-15)
    assert_allclose(chf_gradient(-u, theta).stacked(), np.conj(chf_gradient(u, theta).stacked()), rtol=1e-14, atol=1e-15)


def test_modulus_bounded():
    for alpha in (0.3, 0.9, 1.0, 1.4, 2.0):
        theta = StableParams(mu=-1.0, sigma=0.5, alpha=alpha, beta=0.9)
        assert np.all(np.abs(chf(np.linspace(-10, 10, 201), theta)) <= 1.0)


def test_scalar_and_vector_agree():
    theta = StableParams(mu=0.1, sigma=1.2, alpha=1.6, beta=0.5)
    vector = chf(U, theta)
    assert_allclose([chf(u, theta) for u in U], vector, rtol=1e-15)
    assert np.ndim(chf(1.0, theta)) == 0


@pytest.mark.parametrize("side", [-1.0, 1.0])
def test_bridge_is_continuous(side):
    inside = StableParams(mu=0.0, sigma=1.3, alpha=1.0 + side * (BRIDGE_WIDTH - 1e-12), beta=0.8)
    outside = StableParams(mu=0.0, sigma=1.3, alpha=1.0 + side * (BRIDGE_WIDTH + 1e-12), beta=0.8)
    assert_allclose(log_chf(U, inside), log_chf(U, outside), rtol=1e-9, atol=1e-10)
    _, g_in = log_chf_gradient(U, inside)
    _, g_out = log_chf_gradient(U, outside)
    assert_allclose(g_in, g_out, rtol=1e-7, atol=1e-8)


@pytest.mark.parametrize("alpha", [0.5, 0.7, 1.0 - 1e-7, 1.0, 1.0 + 1e-7, 1.003, 1.3, 1.6, 1.9])
@pytest.mark.parametrize("beta", [-0.5, 0.0, 0.5])
def test_gradient_matches_finite_differences(alpha, beta):
    theta = StableParams(mu=0.3, sigma=1.4, alpha=alpha, beta=beta)
    _, analytic = log_chf_gradient(U, theta)
    numeric = finite_diff_jacobian(lambda t: log_chf(U, StableParams.from_array(t)), theta.as_array(), step=1e-6)
    assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-7)


def test_chf_gradient_rows_scale_with_phi():
    theta = StableParams(mu=0.0, sigma=1.0, alpha=1.3, beta=0.0)
    g = chf_gradient(U, theta)
    assert_allclose(g.d_mu, 1j * U * g.value)
    # symmetric law: phi real, so d_beta and d_mu are purely imaginary
    assert_allclose(g.d_beta.real, 0.0, atol=1e-15)
    assert g.stacked().shape == (4, U.size)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"mu": 0.0, "sigma": 0.0, "alpha": 1.5, "beta": 0.0},
        {"mu": 0.0, "sigma": 1.0, "alpha": 2.1, "beta": 0.0},
        {"mu": 0.0, "sigma": 1.0, "alpha": 0.0, "beta": 0.0},
        {"mu": 0.0, "sigma": 1.0, "alpha": 1.5, "beta": 1.2},
        {"mu": np.nan, "sigma": 1.0, "alpha": 1.5, "beta": 0.0},
    ],
)
def test_invalid_parameters(kwargs):
    with pytest.raises(InvalidParameter):
        StableParams(**kwargs)
