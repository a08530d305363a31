import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from cnnloh.estimation import EmConfig, EstimationError, fit_em, weighted_power_shape
from cnnloh.model import MixtureModel, ModelError, sample


def test_probabilities_recovered(reference_model):
    y = sample(reference_model, 5000, np.random.default_rng(1))
    fit = fit_em(y).model
    assert fit.het_weight == pytest.approx(1 / 3, abs=0.05)
    assert fit.lower.theta0 == pytest.approx(0.1, abs=0.05)
    assert fit.upper.theta1 == pytest.approx(0.2, abs=0.05)


def test_shapes_within_four_standard_errors(reference_model):
    # SE of a Beta(k, 1) shape MLE from n points is k / sqrt(n)
    n = 5000
    y = sample(reference_model, n, np.random.default_rng(2))
    fit = fit_em(y).model
    n_up = n * (2 / 3) * 0.8
    n_lo = n * (1 / 3) * 0.9
    assert abs(fit.upper.shape_a - 8) <= 4 * 8 / math.sqrt(n_up)
    assert abs(fit.lower.shape_b - 8) <= 4 * 8 / math.sqrt(n_lo)


def test_large_sample_consistency(reference_model):
    y = sample(reference_model, 200_000, np.random.default_rng(3))
    fit = fit_em(y).model
    for k, v in reference_model.params().items():
        assert fit.params()[k] == pytest.approx(v, rel=0.03), k


def test_all_ones_is_degenerate():
    with pytest.raises(EstimationError, match="atom 1"):
        fit_em(np.ones(50))


def test_all_zeros_is_degenerate():
    with pytest.raises(EstimationError, match="atom 0"):
        fit_em(np.zeros(50))


def test_too_short():
    with pytest.raises(EstimationError):
        fit_em(np.linspace(0.1, 0.9, 9))


def test_non_finite():
    y = np.full(20, 0.5)
    y[3] = np.nan
    with pytest.raises(ModelError):
        fit_em(y)


def test_floors_applied():
    # no zeros in the data, so theta0 would otherwise be exactly 0
    y = sample(MixtureModel.from_params(0.3, 0.0, 10, 0.5, 10), 2000, np.random.default_rng(4))
    fit = fit_em(y).model
    assert fit.lower.theta0 == 1e-6


def test_max_iter_respected(reference_model):
    y = sample(reference_model, 1000, np.random.default_rng(5))
    rep = fit_em(y, EmConfig(max_iter=2))
    assert rep.iterations == 2
    assert not rep.converged
    assert len(rep.log_lik_trace) == 3


def test_custom_init(reference_model):
    y = sample(reference_model, 3000, np.random.default_rng(6))
    a = fit_em(y).model
    b = fit_em(y, EmConfig(init=MixtureModel.from_params(0.5, 0.05, 3.0, 0.05, 3.0))).model
    for k in a.params():
        assert a.params()[k] == pytest.approx(b.params()[k], rel=1e-3)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(0.05, 0.95),
    st.floats(0.0, 0.5),
    st.floats(0.5, 30),
    st.floats(0.0, 0.5),
    st.floats(0.5, 30),
    st.integers(0, 2**31),
)
def test_trace_non_decreasing(h, t0, b, t1, a, seed):
    y = sample(MixtureModel.from_params(h, t0, b, t1, a), 400, np.random.default_rng(seed))
    if np.all(y == y[0]):
        return
    trace = np.array(fit_em(y).log_lik_trace)
    assert np.all(np.diff(trace) >= -1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(5, 200))
def test_closed_form_shape_matches_numeric(seed, n):
    rng = np.random.default_rng(seed)
    x = rng.uniform(1e-6, 1 - 1e-6, n)
    w = rng.random(n)
    logs = np.log(x)

    def neg_ll(k):
        return -float((w * (np.log(k) + (k - 1) * logs)).sum())

    k_closed = weighted_power_shape(w, logs)
    k_num = minimize_scalar(neg_ll, bounds=(1e-6, 1e4), method="bounded", options={"xatol": 1e-10}).x
    assert k_closed == pytest.approx(k_num, abs=1e-4, rel=1e-6)


def test_shape_helper_no_information():
    assert weighted_power_shape(np.zeros(3), np.log(np.array([0.2, 0.3, 0.4]))) is None


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31))
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    y = sample(MixtureModel.from_params(0.35, 0.1, 8, 0.2, 8), 600, rng)
    a = fit_em(y)
    b = fit_em(rng.permutation(y))
    assert a.model == b.model
    assert a.log_lik_trace == b.log_lik_trace
