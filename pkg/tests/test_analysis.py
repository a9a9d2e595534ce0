import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freqtrack import analysis as an
from freqtrack.errors import DomainError, NotConvergedError, NotEnoughDecayError
from freqtrack.estimator import EstimatorParams, run
from freqtrack.io import CsvTrace
from freqtrack.signals import NoiseSpec, SignalSpec, generate

pos = st.floats(0.1, 500.0)


def synthetic(theta, t):
    return CsvTrace(t, theta)


# ------------------------------------------------------------ responses


def test_G_is_one_at_resonance():
    assert abs(an.transfer_G(7.3, 7.3) - 1) < 1e-15


def test_G_vanishes_at_dc():
    assert an.transfer_G(10.0, 0.0) == 0


def test_G_magnitude_hand_value():
    # 400 / sqrt(300^2 + 400^2)
    assert abs(an.transfer_G(10.0, 20.0)) == pytest.approx(0.8, abs=1e-15)


def test_E_values():
    assert an.transfer_E(10.0, 10.0) == 0
    assert cmath.phase(an.transfer_E(10.0, 5.0)) == pytest.approx(-math.pi / 2)
    e = an.transfer_E(10.0, 20.0)
    assert abs(e) == pytest.approx(0.75)
    assert cmath.phase(e) == pytest.approx(math.pi / 2)
    with pytest.raises(DomainError):
        an.transfer_E(10.0, 0.0)


@pytest.mark.parametrize("theta,omega,zeta", [(10.0, 3.0, 1.0), (10.0, 30.0, 0.4), (2.0, 2.5, 1.7)])
def test_E_closed_form_matches_definition(theta, omega, zeta):
    g = an.transfer_G(theta, omega, zeta)
    assert an.transfer_E(theta, omega, zeta) == pytest.approx((1 - g) / g, rel=1e-12)


def test_omega_gain_values():
    assert an.omega_gain(50.0, 50.0) == 0.0
    assert an.omega_gain(1e-9, 1.0) == pytest.approx(1.0)
    assert an.omega_gain(25.0, 50.0) == pytest.approx(0.6)


def test_omega_gain_linear_values():
    assert an.omega_gain_linear(0.0, 50.0) == 1.0
    assert an.omega_gain_linear(50.0, 50.0) == 0.0
    assert an.omega_gain_linear(25.0, 50.0) == 0.5
    with pytest.raises(DomainError):
        an.omega_gain_linear(51.0, 50.0)


@pytest.mark.parametrize("gamma,omega0,expected", [(100, 50, 1.0), (200, 50, 2.0), (100, 10, 5.0)])
def test_predicted_rate(gamma, omega0, expected):
    assert an.predicted_rate(gamma, 1.0, omega0) == expected


@pytest.mark.parametrize("tau_sq,omega0,expected", [(1e-3, 10, 0.04), (1e-3, 70, 0.28), (0.0, 33, 0.0)])
def test_noise_floor(tau_sq, omega0, expected):
    assert an.noise_floor(tau_sq, omega0, 1.0) == pytest.approx(expected)


def test_steady_state_harmonic():
    h = an.steady_state_harmonic(20.0, 20.0, 1.0)
    assert (h.b, h.c, h.a) == pytest.approx((1.0, 0.0, 0.0), abs=1e-15)
    h = an.steady_state_harmonic(10.0, 20.0, 1.0)
    assert h.b == pytest.approx(0.8)
    assert h.a == pytest.approx(0.6)
    assert h.a == pytest.approx(an.omega_gain(10.0, 20.0))
    h2 = an.steady_state_harmonic(10.0, 20.0, 2.0)
    assert (h2.b, h2.a, h2.c) == pytest.approx((2 * h.b, 2 * h.a, h.c))


@settings(max_examples=200, deadline=None)
@given(theta=pos, omega=pos, zeta=st.floats(0.05, 2.0))
def test_gain_product_and_phase(theta, omega, zeta):
    # the product equals omega_gain only for unit damping
    g1 = an.transfer_G(theta, omega)
    assert abs(abs(g1) * abs(an.transfer_E(theta, omega)) - an.omega_gain(theta, omega)) < 1e-12
    ph = cmath.phase(an.transfer_E(theta, omega, zeta))
    if theta != omega:
        assert abs(abs(ph) - math.pi / 2) < 1e-9
        assert (ph < 0) == (omega < theta)


@settings(max_examples=100, deadline=None)
@given(omega0=pos, frac=st.floats(0.0, 1.0))
def test_linear_gain_underestimates(omega0, frac):
    theta = frac * omega0
    assert an.omega_gain_linear(theta, omega0) <= an.omega_gain(theta, omega0) + 1e-15


# ------------------------------------------------------------ traces


def test_rate_fit_on_constructed_exponential():
    t = np.arange(0, 5.0, 1e-4)
    tr = synthetic(50.0 - 40.0 * np.exp(-t), t)
    assert an.fit_exponential_rate(tr, 50.0, 0.1) == pytest.approx(1.0, abs=1e-6)


def test_rate_fit_truncates_at_zero_crossing():
    t = np.arange(0, 6.0, 1e-3)
    eps = 40.0 * np.exp(-2 * t)
    eps[t > 2.5] = -1.0
    fit = an.fit_exponential_window(synthetic(50.0 - eps, t), 50.0, 0.0)
    assert fit.rate == pytest.approx(2.0, abs=1e-6)
    assert fit.t_end < 2.5


def test_rate_fit_requires_decay():
    t = np.arange(0, 5.0, 1e-3)
    with pytest.raises(NotEnoughDecayError):
        an.fit_exponential_rate(synthetic(np.full(t.size, 10.0), t), 50.0, 0.5)


def test_rate_fit_on_estimator_meets_prediction():
    sig = generate(SignalSpec.pure_sine(50.0), 1e-4, 10.0)
    tr = run(sig, 10.0, EstimatorParams(gamma=100.0))
    beta = an.fit_exponential_rate(tr, 50.0, an.default_transient_skip(50.0))
    assert beta >= 0.8 * an.predicted_rate(100.0, 1.0, 50.0)


def test_residual_variance_noise_free_is_tiny():
    tr = run(generate(SignalSpec.pure_sine(50.0), 1e-4, 10.0), 10.0, EstimatorParams(gamma=100.0))
    assert an.residual_variance(tr, 50.0) < 1e-6


def test_residual_variance_below_floor_with_noise():
    sig = generate(SignalSpec.noisy_sine(10.0, NoiseSpec(variance=1e-3, seed=1)), 1e-4, 10.0)
    tr = run(sig, 1.0, EstimatorParams(gamma=100.0))
    assert an.residual_variance(tr, 10.0) < an.noise_floor(1e-3, 10.0, 1.0)


def test_residual_variance_rejects_unsettled_trace():
    tr = run(generate(SignalSpec.pure_sine(50.0), 1e-4, 1.0), 10.0, EstimatorParams(gamma=20.0))
    with pytest.raises(NotConvergedError):
        an.residual_variance(tr, 50.0)


def test_time_to_band():
    t = np.linspace(0, 1, 11)
    tr = synthetic(100.0 * t, t)
    assert an.time_to_band(tr, 100.0, abs_tol=25.0) == pytest.approx(0.8)
    assert an.time_to_band(tr, 300.0, 0.02) == math.inf


def test_spectral_line_finds_a_tone():
    dt = 1e-2
    t = np.arange(0, 200.0, dt)
    rng = np.random.default_rng(0)
    x = 0.5 * np.sin(3.0 * t) + 0.01 * rng.standard_normal(t.size)
    assert an.spectral_line(x, dt, 3.0, 20.0).ratio > 100
    assert an.spectral_line(rng.standard_normal(t.size), dt, 3.0, 20.0).ratio < 10


def test_convergence_report_fields():
    sig = generate(SignalSpec.noisy_sine(50.0, NoiseSpec(variance=1e-3, seed=3)), 1e-4, 10.0)
    tr = run(sig, 10.0, EstimatorParams(gamma=100.0))
    rep = an.convergence_report(tr, 50.0, k=1.0, gamma=100.0, tau_sq=1e-3)
    assert rep.beta_pred == 1.0
    assert rep.noise_floor == pytest.approx(0.2)
    assert rep.beta_hat > 0.8
    assert rep.epsilon_ss_var < rep.noise_floor
    d = rep.as_dict()
    assert set(d) >= {"beta_hat", "beta_pred", "epsilon_ss_mean", "epsilon_ss_var", "noise_floor"}


def test_convergence_report_without_truth():
    tr = run(generate(SignalSpec.pure_sine(50.0), 1e-4, 0.1), 10.0, EstimatorParams(gamma=100.0))
    rep = an.convergence_report(tr)
    assert rep.beta_hat is None and rep.epsilon_ss_var is None
