import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from freqtrack import analysis
from freqtrack.errors import ConfigurationError, NumericOverflowError
from freqtrack.estimator import EstimatorParams, EstimatorState, derivatives, run, step
from freqtrack.signals import NoiseSpec, SignalSpec, TimeSeries, generate


def sine(omega0, duration, dt=1e-4, k=1.0):
    return generate(SignalSpec.pure_sine(omega0, amplitude=k), dt, duration)


def reference_run(sig, dt, theta0, gamma, zeta=1.0, theta_min=1e-3):
    """Straight-line Python RK4 of the estimator, kept free of the package kernels."""

    def f(s, sigma):
        x1, x2, th = s
        sg = float(np.sign(x1))
        return np.array([x2, -th * th * x1 - 2 * zeta * th * x2 + 2 * zeta * th * sigma, -gamma * sg * (sigma - x2)])

    s = np.array([0.0, 0.0, theta0])
    out = []
    for sigma in sig:
        out.append(s[2])
        k1 = f(s, sigma)
        k2 = f(s + dt / 2 * k1, sigma)
        k3 = f(s + dt / 2 * k2, sigma)
        k4 = f(s + dt * k3, sigma)
        s = s + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        s[2] = max(s[2], theta_min)
    return np.array(out)


# ------------------------------------------------------------ derivatives


def test_origin_is_an_equilibrium():
    assert derivatives(EstimatorState(0.0, 0.0, 37.0), 0.0, EstimatorParams(gamma=100)) == (0.0, 0.0, 0.0)


def test_hand_evaluated_derivatives():
    d = derivatives(EstimatorState(1.0, 0.0, 2.0), 0.5, EstimatorParams(gamma=1.0))
    assert d == pytest.approx((0.0, -2.0, -0.5), abs=1e-15)


def test_zero_error_and_zero_x1_stop_adaptation():
    dx1, dx2, dth = derivatives(EstimatorState(0.0, 0.3, 5.0), 0.3, EstimatorParams(gamma=100.0))
    assert dth == 0.0
    assert dx2 == pytest.approx(0.0, abs=1e-15)
    assert dx1 == 0.3


def test_sign_of_zero_is_zero():
    # e != 0 but x1 == 0: no adaptation
    assert derivatives(EstimatorState(0.0, 0.0, 5.0), 1.0, EstimatorParams(gamma=100.0))[2] == 0.0


def test_zeta_enters_damping_and_input_coupling():
    d = derivatives(EstimatorState(1.0, 0.5, 2.0), 0.25, EstimatorParams(gamma=1.0, zeta=0.5))
    # -4*1 - 2*0.5*2*0.5 + 2*0.5*2*0.25
    assert d[1] == pytest.approx(-4.0 - 1.0 + 0.5)


# ------------------------------------------------------------ step


def test_step_holds_fixed_point():
    s = EstimatorState(0.0, 0.0, 42.0)
    assert step(s, 0.0, EstimatorParams(gamma=100.0)) == s


def test_single_step_from_origin():
    params = EstimatorParams(gamma=100.0, dt=1e-4)
    s = step(EstimatorState(0.0, 0.0, 50.0), 1.0, params)
    assert s.x2 > 0
    assert abs(s.theta - 50.0) <= params.gamma * params.dt * 1.0


def test_step_matches_tight_ode_solution():
    """One RK4 step against an adaptive solver at tight tolerance (x1 keeps its sign)."""
    params = EstimatorParams(gamma=100.0, zeta=1.0, dt=1e-4)
    s0 = EstimatorState(0.5, 0.2, 30.0)
    sigma = 0.7

    def f(t, y):
        return derivatives(EstimatorState(*y), sigma, params)

    sol = solve_ivp(f, (0, params.dt), [s0.x1, s0.x2, s0.theta], method="DOP853", rtol=1e-13, atol=1e-15)
    s1 = step(s0, sigma, params)
    np.testing.assert_allclose([s1.x1, s1.x2, s1.theta], sol.y[:, -1], rtol=0, atol=1e-12)


def test_clamp_returns_theta_min_exactly():
    params = EstimatorParams(gamma=1e6, theta_min=1e-3)
    s = step(EstimatorState(1.0, 0.0, 2e-3), 1.0, params)
    assert s.theta == params.theta_min


def test_overflow_carries_step_index():
    params = EstimatorParams(gamma=1.0)
    with pytest.raises(NumericOverflowError) as exc:
        step(EstimatorState(1e308, 1e308, 1e308), 1e308, params, index=17)
    assert exc.value.step_index == 17


@pytest.mark.parametrize(
    "kwargs",
    [dict(gamma=0.0), dict(gamma=1.0, zeta=0.0), dict(gamma=1.0, zeta=2.5), dict(gamma=1.0, theta_min=0.0), dict(gamma=1.0, dt=-1.0)],
)
def test_param_validation(kwargs):
    with pytest.raises(ConfigurationError):
        EstimatorParams(**kwargs)


# ------------------------------------------------------------ run


def test_run_equals_repeated_steps():
    sig = generate(SignalSpec.noisy_sine(20.0, NoiseSpec(variance=1e-3, seed=2)), 1e-4, 0.05)
    params = EstimatorParams(gamma=100.0, zeta=0.7)
    tr = run(sig, 15.0, params)
    s = EstimatorState(0.0, 0.0, 15.0)
    for i, sigma in enumerate(sig.samples):
        assert (tr.x1[i], tr.x2[i], tr.theta[i]) == (s.x1, s.x2, s.theta)
        assert tr.e[i] == sigma - s.x2
        s = step(s, sigma, params, i)


def test_run_matches_reference_python_rk4():
    sig = sine(50.0, 0.5)
    tr = run(sig, 10.0, EstimatorParams(gamma=100.0))
    np.testing.assert_allclose(tr.theta, reference_run(sig.samples, 1e-4, 10.0, 100.0), rtol=0, atol=1e-9)


def test_trace_layout():
    sig = sine(50.0, 0.01)
    tr = run(sig, 10.0, EstimatorParams(gamma=100.0))
    assert len(tr) == len(sig)
    assert tr.theta[0] == 10.0 and tr.x1[0] == 0.0 and tr.x2[0] == 0.0
    np.testing.assert_array_equal(tr.t, sig.t)
    assert tr.input_digest == sig.digest()


def test_run_rejects_dt_mismatch_and_low_theta0():
    sig = sine(50.0, 0.01)
    with pytest.raises(ConfigurationError, match="dt"):
        run(sig, 10.0, EstimatorParams(gamma=100.0, dt=5e-5))
    with pytest.raises(ConfigurationError, match="theta_min"):
        run(sig, 1e-4, EstimatorParams(gamma=100.0))


def test_fig3_convergence_from_above():
    tr = run(sine(50.0, 10.0), 100.0, EstimatorParams(gamma=100.0))
    assert abs(tr.theta[-1] - 50.0) < 0.5


def test_initial_drift_from_below_then_monotone_rise():
    tr = run(sine(50.0, 10.0), 10.0, EstimatorParams(gamma=100.0))
    t = tr.t
    period = 2 * math.pi / 50.0
    early = tr.theta[t < 3 * period]
    assert early.min() < 10.0
    assert analysis.approaches_monotonically(tr, 50.0, 10.0)
    assert abs(tr.theta[-1] - 50.0) < 0.5


@pytest.mark.parametrize("theta0", [20.0, 80.0])
def test_fig5_amplitude_modulated_settles(theta0):
    spec = SignalSpec.amplitude_modulated(40.0, 5.0, 5.0, 0.9, -math.pi / 2)
    tr = run(generate(spec, 1e-4, 10.0), theta0, EstimatorParams(gamma=100.0))
    assert np.max(np.abs(40.0 - tr.theta[tr.t > 1.8])) < 1.0


@pytest.mark.parametrize("theta0", [10.0, 100.0])
@pytest.mark.parametrize("gamma", [50.0, 100.0, 200.0])
def test_global_convergence_grid(theta0, gamma):
    horizon = 10.0 / analysis.predicted_rate(gamma, 1.0, 50.0)
    tr = run(sine(50.0, horizon), theta0, EstimatorParams(gamma=gamma))
    assert abs(50.0 - tr.theta[-1]) < 0.01 * 50.0
    assert analysis.approaches_monotonically(tr, 50.0, theta0)


def test_clamp_holds_on_noise_only_input():
    noise = NoiseSpec(variance=1.0, seed=11).samples(50_000, 1e-4)
    tr = run(TimeSeries(0.0, 1e-4, noise), 0.5, EstimatorParams(gamma=1e4, theta_min=1e-3))
    assert np.all(tr.theta >= 1e-3)
    assert tr.theta.min() == 1e-3


def test_halving_dt_changes_final_theta_little():
    a = run(sine(50.0, 10.0, 1e-4), 10.0, EstimatorParams(gamma=100.0, dt=1e-4))
    b = run(sine(50.0, 10.0, 5e-5), 10.0, EstimatorParams(gamma=100.0, dt=5e-5))
    assert abs(a.theta[-1] - b.theta[-1]) < 1e-3


def test_default_and_explicit_unit_zeta_are_identical():
    sig = sine(20.0, 2.0)
    a = run(sig, 10.0, EstimatorParams(gamma=100.0))
    b = run(sig, 10.0, EstimatorParams(gamma=100.0, zeta=1.0))
    assert a.theta.tobytes() == b.theta.tobytes()


def test_low_damping_leaves_more_ripple():
    sig = sine(20.0, 10.0)
    tails = {}
    for zeta in (0.1, 1.0):
        tr = run(sig, 10.0, EstimatorParams(gamma=100.0, zeta=zeta))
        tails[zeta] = tr.theta[int(0.75 * len(tr)):].var()
    assert tails[0.1] > tails[1.0]


def test_steady_state_mean_is_amplitude_insensitive():
    omega0, tau_sq = 30.0, 1e-3
    means = {}
    for k in (0.5, 1.0, 5.0):
        spec = SignalSpec.noisy_sine(omega0, NoiseSpec(variance=tau_sq, seed=4), amplitude=k)
        tr = run(generate(spec, 1e-4, 25.0), 15.0, EstimatorParams(gamma=100.0))
        means[k] = analysis.residual_stats(tr, omega0).mean
    spread = max(means.values()) - min(means.values())
    assert spread < math.sqrt(analysis.noise_floor(tau_sq, omega0, 0.5))
