"""Scenario catalog, runner and pass/fail checks.

A :class:`Scenario` is one signal plus any number of estimator
configurations.  A :class:`Suite` groups scenarios that are judged together
(for instance the same estimator over several frequencies) and may carry
checks that compare results across scenarios.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional

import numpy as np

from . import analysis
from .anf import APPROXIMATION_NOTE, AnfParams, anf_run
from .errors import ConfigurationError, FreqTrackError
from .estimator import EstimatorParams, EstimatorTrace, run
from .io import load_csv
from .signals import NoiseSpec, SignalKind, SignalSpec, TimeSeries, amplitude_at, generate, omega_at

log = logging.getLogger(__name__)

ESTIMATOR_KINDS = ("proposed", "proposed_zeta", "anf")


@dataclass(frozen=True)
class EstimatorConfig:
    kind: str
    gamma: float
    theta0: float
    zeta: float = 1.0
    theta_min: float = 1e-3
    label: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ConfigurationError(f"unknown estimator kind {self.kind!r}; expected one of {ESTIMATOR_KINDS}")
        if self.kind == "proposed" and self.zeta != 1.0:
            raise ConfigurationError("kind 'proposed' is critically damped; use 'proposed_zeta' for zeta != 1")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        return f"{self.kind}_g{self.gamma:g}_z{self.zeta:g}_th{self.theta0:g}"

    def params(self, dt: float):
        if self.kind == "anf":
            return AnfParams(gamma=self.gamma, zeta=self.zeta, dt=dt, theta_min=self.theta_min)
        return EstimatorParams(gamma=self.gamma, zeta=self.zeta, theta_min=self.theta_min, dt=dt)


@dataclass(frozen=True)
class CheckSpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class Scenario:
    name: str
    signal: SignalSpec
    estimators: List[EstimatorConfig]
    duration: float
    dt: float = 1e-4
    checks: List[CheckSpec] = field(default_factory=list)
    detrend: bool = False

    def __post_init__(self):
        if not self.estimators:
            raise ConfigurationError(f"scenario {self.name!r} has no estimators")
        if not self.dt > 0 or not self.duration >= self.dt:
            raise ConfigurationError(f"scenario {self.name!r}: need dt > 0 and duration >= dt")
        names = [e.name for e in self.estimators]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"scenario {self.name!r}: duplicate estimator labels {names}")


@dataclass
class Suite:
    name: str
    scenarios: List[Scenario]
    checks: List[CheckSpec] = field(default_factory=list)

    def __post_init__(self):
        names = [s.name for s in self.scenarios]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"suite {self.name!r}: scenario names must be unique, got {names}")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class RunArtifact:
    scenario: Scenario
    signal: TimeSeries
    omega_track: Optional[np.ndarray]
    traces: Dict[str, EstimatorTrace] = field(default_factory=dict)
    reports: Dict[str, analysis.ConvergenceReport] = field(default_factory=dict)
    errors: Dict[str, str] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.scenario.name

    @property
    def passed(self) -> bool:
        return not self.errors and all(c.passed for c in self.checks)

    def config(self, label) -> EstimatorConfig:
        return next(e for e in self.scenario.estimators if e.name == label)

    def omega0(self):
        """Scalar true frequency when constant, the per-sample track otherwise, None if unknown."""
        if self.omega_track is None:
            return None
        if self.scenario.signal.kind is SignalKind.LINEAR_CHIRP:
            return self.omega_track
        return float(self.omega_track[0])


@dataclass
class SuiteResult:
    suite: Suite
    artifacts: Dict[str, RunArtifact]
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.artifacts.values()) and all(c.passed for c in self.checks)

    def all_checks(self):
        for art in self.artifacts.values():
            for c in art.checks:
                yield art.name, c
            for label, msg in art.errors.items():
                yield art.name, CheckResult(f"run:{label}", False, msg)
        for c in self.checks:
            yield self.suite.name, c


# ---------------------------------------------------------------- running


def load_signal(scenario: Scenario) -> TimeSeries:
    spec = scenario.signal
    if spec.kind is SignalKind.FROM_FILE:
        ts = load_csv(spec.file_path, detrend=scenario.detrend)
        if not math.isclose(ts.dt, scenario.dt, rel_tol=1e-6):
            log.info("scenario %s: using file dt=%g instead of %g", scenario.name, ts.dt, scenario.dt)
        return ts
    return generate(spec, scenario.dt, scenario.duration)


def nominal_amplitude(spec: SignalSpec) -> Optional[float]:
    if spec.kind in (SignalKind.PURE_SINE, SignalKind.NOISY_SINE, SignalKind.LINEAR_CHIRP):
        return float(spec.amplitude)
    if spec.kind is SignalKind.AM_SINE:
        return float(spec.am_offset)
    return None


def run_scenario(scenario: Scenario) -> RunArtifact:
    """Generate (or load) the signal once and run every estimator on it."""
    sig = load_signal(scenario)
    spec = scenario.signal
    track = None if spec.kind is SignalKind.FROM_FILE else np.asarray(omega_at(spec, sig.t), dtype=float)
    art = RunArtifact(scenario, sig, track)
    tau_sq = None
    if spec.kind is not SignalKind.FROM_FILE:
        tau_sq = spec.noise.variance_for(sig.dt) if spec.noise is not None else 0.0
    k = nominal_amplitude(spec)
    omega0 = art.omega0()
    for cfg in scenario.estimators:
        try:
            params = cfg.params(sig.dt)
            runner = anf_run if cfg.kind == "anf" else run
            trace = runner(sig, cfg.theta0, params)
        except FreqTrackError as exc:
            log.warning("scenario %s, estimator %s failed: %s", scenario.name, cfg.name, exc)
            art.errors[cfg.name] = f"{type(exc).__name__}: {exc}"
            continue
        art.traces[cfg.name] = trace
        report = analysis.convergence_report(trace, omega0, k=k, gamma=cfg.gamma, tau_sq=tau_sq)
        if cfg.kind == "anf":
            report.notes = report.notes + (APPROXIMATION_NOTE,)
        art.reports[cfg.name] = report
    art.checks.append(_shared_signal(art))
    for spec_ in scenario.checks:
        art.checks.append(evaluate_check(spec_, art))
    return art


def run_suite(suite: Suite) -> SuiteResult:
    arts = {}
    for sc in suite.scenarios:
        arts[sc.name] = run_scenario(sc)
    res = SuiteResult(suite, arts)
    for spec in suite.checks:
        fn = SUITE_CHECKS.get(spec.name)
        if fn is None:
            res.checks.append(CheckResult(spec.name, False, "unknown suite check"))
            continue
        try:
            res.checks.append(fn(res, **spec.params))
        except FreqTrackError as exc:
            res.checks.append(CheckResult(spec.name, False, f"{type(exc).__name__}: {exc}"))
    return res


# ---------------------------------------------------------------- checks


def _shared_signal(art: RunArtifact) -> CheckResult:
    digest = art.signal.digest()
    bad = [k for k, tr in art.traces.items() if tr.input_digest != digest]
    return CheckResult("shared_signal", not bad, f"mismatched inputs: {bad}" if bad else f"sha256 {digest[:12]}")


def evaluate_check(spec: CheckSpec, art: RunArtifact) -> CheckResult:
    fn = SCENARIO_CHECKS.get(spec.name)
    if fn is None:
        return CheckResult(spec.name, False, "unknown check")
    missing = [e.name for e in art.scenario.estimators if e.name not in art.traces]
    if missing:
        return CheckResult(spec.name, False, f"estimator runs failed: {missing}")
    try:
        return fn(art, **spec.params)
    except FreqTrackError as exc:
        return CheckResult(spec.name, False, f"{type(exc).__name__}: {exc}")


def _fmt(d):
    return ", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in d.items())


def check_reaches_band(art, tol, horizon_rates=None, horizon=None):
    """Each run gets within ``tol`` rad/s by ``horizon`` s (or ``horizon_rates / beta_pred``)."""
    omega0 = art.omega0()
    fails, info = [], {}
    for label, tr in art.traces.items():
        if horizon_rates is not None:
            T = horizon_rates / art.reports[label].beta_pred
        else:
            T = horizon
        hit = analysis.time_to_band(tr, omega0, abs_tol=tol)
        info[label] = hit
        if not hit <= T:
            fails.append(f"{label}: reached at {hit:.4g} s > {T:.4g} s")
    return CheckResult("reaches_band", not fails, "; ".join(fails) or _fmt(info))


def check_rate_bound(art, factor=0.8):
    """beta_hat >= factor * beta_pred, and beta_hat strictly increasing in gamma per initial value."""
    fails, groups = [], {}
    for label, rep in art.reports.items():
        cfg = art.config(label)
        if rep.beta_hat is None:
            fails.append(f"{label}: no rate fit ({'; '.join(rep.notes)})")
            continue
        if not rep.beta_hat >= factor * rep.beta_pred:
            fails.append(f"{label}: beta_hat={rep.beta_hat:.4g} < {factor}*{rep.beta_pred:.4g}")
        groups.setdefault(cfg.theta0, []).append((cfg.gamma, rep.beta_hat))
    for th0, pairs in groups.items():
        rates = [b for _, b in sorted(pairs)]
        if any(b2 <= b1 for b1, b2 in zip(rates, rates[1:])):
            fails.append(f"theta0={th0:g}: rates not strictly increasing in gamma: {sorted(pairs)}")
    detail = _fmt({k: r.beta_hat for k, r in art.reports.items() if r.beta_hat is not None})
    return CheckResult("rate_bound", not fails, "; ".join(fails) or detail)


def check_monotone_approach(art, band=0.02, periods=3.0):
    omega0 = art.omega0()
    fails = [
        label
        for label, tr in art.traces.items()
        if not analysis.approaches_monotonically(tr, omega0, art.config(label).theta0, band, periods)
    ]
    return CheckResult("monotone_approach", not fails, f"sign flips in {fails}" if fails else "")


def check_bounded_after(art, tol, after):
    """``|omega0(t) - theta(t)| < tol`` for every t > ``after``."""
    omega0 = art.omega0()
    fails, info = [], {}
    for label, tr in art.traces.items():
        m = tr.t > after
        worst = float(np.max(np.abs(tr.epsilon(omega0)[m])))
        info[label] = worst
        if not worst < tol:
            fails.append(f"{label}: max |eps|={worst:.4g} >= {tol}")
    return CheckResult("bounded_after", not fails, "; ".join(fails) or f"max |eps|: {_fmt(info)}")


def check_no_envelope_line(art, after, ratio=3.0, band_factor=4.0):
    """The residual has no spectral line at the amplitude-modulation rate above ``ratio`` x floor."""
    spec = art.scenario.signal
    if spec.kind is not SignalKind.AM_SINE:
        return CheckResult("no_envelope_line", False, "needs an amplitude-modulated signal")
    omega0 = art.omega0()
    fails, info = [], {}
    for label, tr in art.traces.items():
        eps = tr.epsilon(omega0)[tr.t > after]
        line = analysis.spectral_line(eps, tr.dt, spec.am_rate, band_factor * omega0)
        info[label] = line.ratio
        if not line.ratio <= ratio:
            fails.append(f"{label}: line/floor={line.ratio:.4g} > {ratio}")
    return CheckResult("no_envelope_line", not fails, "; ".join(fails) or f"line/floor: {_fmt(info)}")


def check_noise_floor(art, tail_fraction=0.25):
    """Steady-state Var{eps} below ``4*tau^2*omega0/k`` for every run."""
    spec = art.scenario.signal
    omega0 = art.omega0()
    tau_sq = spec.noise.variance_for(art.signal.dt) if spec.noise else 0.0
    bound = analysis.noise_floor(tau_sq, omega0, nominal_amplitude(spec))
    fails, info = [], {}
    for label, tr in art.traces.items():
        var = analysis.residual_variance(tr, omega0, tail_fraction)
        info[label] = var
        if not var < bound:
            fails.append(f"{label}: var={var:.4g} >= {bound:.4g}")
    return CheckResult("noise_floor", not fails, "; ".join(fails) or f"floor={bound:.4g}, var: {_fmt(info)}")


def check_zeta_variance_order(art, ratio=0.1, tail_fraction=0.25):
    """Tail variance of theta strictly decreasing in zeta; largest zeta below ``ratio`` x smallest."""
    rows = []
    for label, tr in art.traces.items():
        n = tr.theta.size
        tail = tr.theta[int(math.floor(n * (1 - tail_fraction))):]
        rows.append((art.config(label).zeta, float(tail.var(ddof=1))))
    rows.sort()
    variances = [v for _, v in rows]
    fails = []
    if any(v2 >= v1 for v1, v2 in zip(variances, variances[1:])):
        fails.append("variance not strictly decreasing in zeta")
    if not variances[-1] < ratio * variances[0]:
        fails.append(f"var(zeta={rows[-1][0]:g}) >= {ratio} * var(zeta={rows[0][0]:g})")
    detail = ", ".join(f"zeta={z:g}: {v:.4g}" for z, v in rows)
    return CheckResult("zeta_variance_order", not fails, "; ".join(fails + [detail]))


def check_converges_to(art, frac=0.01):
    """Final theta within ``frac * omega0`` for every configured estimator."""
    omega0 = art.omega0()
    fails, info = [], {}
    for label, tr in art.traces.items():
        err = abs(omega0 - tr.theta[-1])
        info[label] = float(tr.theta[-1])
        if not err < frac * omega0:
            fails.append(f"{label}: final theta={tr.theta[-1]:.6g}")
    return CheckResult("converges_to", not fails, "; ".join(fails) or f"final theta: {_fmt(info)}")


SCENARIO_CHECKS: Dict[str, Callable] = {
    "reaches_band": check_reaches_band,
    "rate_bound": check_rate_bound,
    "monotone_approach": check_monotone_approach,
    "bounded_after": check_bounded_after,
    "no_envelope_line": check_no_envelope_line,
    "noise_floor": check_noise_floor,
    "zeta_variance_order": check_zeta_variance_order,
    "converges_to": check_converges_to,
}


def check_settle_order(res: SuiteResult, frac=0.02):
    """Time to reach ``frac * omega0`` strictly increasing with omega0 across the suite."""
    rows = []
    for art in res.artifacts.values():
        omega0 = art.omega0()
        for label, tr in art.traces.items():
            rows.append((omega0, analysis.time_to_band(tr, omega0, frac)))
    rows.sort()
    times = [t for _, t in rows]
    ok = all(math.isfinite(t) for t in times) and all(b > a for a, b in zip(times, times[1:]))
    return CheckResult("settle_order", ok, ", ".join(f"w0={w:g}: {t:.4g} s" for w, t in rows))


def check_dt_refinement(res: SuiteResult, coarse, fine, tol=1e-3):
    """Final theta of matching estimators differs by less than ``tol`` between two step sizes."""
    a, b = res.artifacts[coarse], res.artifacts[fine]
    diffs = {}
    for label, tr in a.traces.items():
        if label in b.traces:
            diffs[label] = abs(float(tr.theta[-1]) - float(b.traces[label].theta[-1]))
    ok = len(diffs) == len(a.scenario.estimators) and all(d < tol for d in diffs.values())
    return CheckResult("dt_refinement", ok, f"|dtheta|: {_fmt(diffs)}")


SUITE_CHECKS: Dict[str, Callable] = {
    "settle_order": check_settle_order,
    "dt_refinement": check_dt_refinement,
}


# ---------------------------------------------------------------- presets

TAU_SQ = 1e-3
PSD = 1e-7


def _noise(seed, variance=TAU_SQ, psd=PSD):
    return NoiseSpec(variance=variance, psd=psd, seed=seed)


def fig3_scenario(dt=1e-4, name="fig3"):
    ests = [
        EstimatorConfig("proposed", gamma=g, theta0=th0)
        for th0 in (10.0, 100.0)
        for g in (200.0, 100.0, 50.0)
    ]
    return Scenario(
        name,
        SignalSpec.pure_sine(50.0),
        ests,
        duration=20.0,
        dt=dt,
        checks=[
            CheckSpec("reaches_band", {"tol": 0.5, "horizon_rates": 10.0}),
            CheckSpec("rate_bound", {"factor": 0.8}),
            CheckSpec("monotone_approach"),
        ],
    )


def preset_fig3(seed=None, dt=None, **_):
    return Suite("fig3", [fig3_scenario(dt or 1e-4)])


def preset_fig4(seed=None, dt=None, **_):
    seed = 1 if seed is None else seed
    scs = [
        Scenario(
            f"fig4_w{w:g}",
            SignalSpec.noisy_sine(float(w), _noise(seed)),
            [EstimatorConfig("proposed", gamma=100.0, theta0=1.0)],
            duration=10.0,
            dt=dt or 1e-4,
            checks=[CheckSpec("noise_floor")],
        )
        for w in (10, 30, 50, 70)
    ]
    return Suite("fig4", scs, [CheckSpec("settle_order", {"frac": 0.02})])


def preset_fig5(seed=None, dt=None, **_):
    noise = _noise(seed) if seed is not None else None
    sig = SignalSpec.amplitude_modulated(40.0, offset=5.0, depth=5.0, rate=0.9, phase=-math.pi / 2, noise=noise)
    sc = Scenario(
        "fig5",
        sig,
        [EstimatorConfig("proposed", gamma=100.0, theta0=th0) for th0 in (20.0, 80.0)],
        duration=20.0,
        dt=dt or 1e-4,
        checks=[
            CheckSpec("bounded_after", {"tol": 1.0, "after": 3.0}),
            CheckSpec("no_envelope_line", {"after": 3.0, "ratio": 3.0}),
        ],
    )
    return Suite("fig5", [sc])


def preset_fig6(seed=None, dt=None, **_):
    noise = _noise(seed) if seed is not None else None
    sig = SignalSpec.linear_chirp(20 * 2 * math.pi, 1 * 2 * math.pi, 30.0, noise=noise)
    sc = Scenario(
        "fig6",
        sig,
        [EstimatorConfig("proposed", gamma=200.0, theta0=10.0)],
        duration=30.0,
        dt=dt or 1e-4,
        checks=[CheckSpec("bounded_after", {"tol": 5.0, "after": 10.0})],
    )
    return Suite("fig6", [sc])


def preset_fig2x(seed=None, dt=None, **_):
    seed = 1 if seed is None else seed
    ests = [
        EstimatorConfig("proposed" if z == 1.0 else "proposed_zeta", gamma=100.0, theta0=10.0, zeta=z)
        for z in (0.1, 0.5, 1.0)
    ]
    sc = Scenario(
        "fig2x",
        SignalSpec.noisy_sine(20.0, _noise(seed)),
        ests,
        duration=10.0,
        dt=dt or 1e-4,
        checks=[CheckSpec("zeta_variance_order", {"ratio": 0.1})],
    )
    return Suite("fig2x", [sc])


def preset_parity(seed=None, dt=None, gamma=100.0, **_):
    ests = []
    for th0 in (10.0, 100.0):
        ests.append(EstimatorConfig("proposed", gamma=gamma, theta0=th0))
        ests.append(EstimatorConfig("anf", gamma=2 * gamma, theta0=th0))
    sc = Scenario(
        "parity",
        SignalSpec.pure_sine(50.0),
        ests,
        duration=10.0,
        dt=dt or 1e-4,
        checks=[CheckSpec("converges_to", {"frac": 0.01})],
    )
    return Suite("parity", [sc])


def preset_lemma1(seed=None, dt=None, **_):
    seed = 1 if seed is None else seed
    scs = []
    for tau_sq in (1e-4, 1e-3):
        for w in (10.0, 50.0):
            for k in (0.5, 1.0, 2.0):
                scs.append(
                    Scenario(
                        f"lemma1_tau{tau_sq:g}_w{w:g}_k{k:g}",
                        SignalSpec.noisy_sine(w, NoiseSpec(variance=tau_sq, seed=seed), amplitude=k),
                        [EstimatorConfig("proposed", gamma=100.0, theta0=0.5 * w)],
                        duration=25.0,
                        dt=dt or 1e-4,
                        checks=[CheckSpec("noise_floor")],
                    )
                )
    return Suite("lemma1", scs)


def preset_numerics(seed=None, dt=None, **_):
    dt = dt or 1e-4
    scs = [fig3_scenario(dt, "numerics_dt"), fig3_scenario(dt / 2, "numerics_half_dt")]
    for sc in scs:
        sc.checks = []
    return Suite(
        "numerics", scs, [CheckSpec("dt_refinement", {"coarse": "numerics_dt", "fine": "numerics_half_dt"})]
    )


def preset_table1(seed=None, dt=None, input_path=None, detrend=False, **_):
    if input_path is None:
        raise ConfigurationError("preset 'table1' needs a measured signal: pass --input CSV")
    ests = []
    for z in (0.7, 1.0, 1.3):
        ests.append(EstimatorConfig("proposed" if z == 1.0 else "proposed_zeta", gamma=2e4, theta0=20.0, zeta=z))
        ests.append(EstimatorConfig("anf", gamma=4e4, theta0=20.0, zeta=z))
    sc = Scenario(
        "table1",
        SignalSpec.from_file(input_path),
        ests,
        duration=1.0,
        dt=dt or 5e-4,
        detrend=detrend,
    )
    return Suite("table1", [sc])


PRESETS: Dict[str, Callable[..., Suite]] = {
    "fig2x": preset_fig2x,
    "fig3": preset_fig3,
    "fig4": preset_fig4,
    "fig5": preset_fig5,
    "fig6": preset_fig6,
    "parity": preset_parity,
    "lemma1": preset_lemma1,
    "numerics": preset_numerics,
    "table1": preset_table1,
}

PRESET_DESCRIPTIONS = {
    "fig2x": "damping-ratio variant, gamma=100, omega0=20, zeta in {0.1, 0.5, 1}",
    "fig3": "clean sine omega0=50, gamma in {200, 100, 50}, theta0 in {10, 100}",
    "fig4": "noisy sines omega0 in {10, 30, 50, 70}, tau^2=0.001, gamma=100",
    "fig5": "amplitude k(t)=5+5 sin(0.9t - pi/2), omega0=40, gamma=100, theta0 in {20, 80}",
    "fig6": "down-chirp 20*2pi -> 1*2pi rad/s over 30 s, gamma=200, theta0=10",
    "parity": "proposed (gamma) vs ANF (2*gamma) on a clean sine omega0=50",
    "lemma1": "noise-floor sweep tau^2 x omega0 x k, gamma=100",
    "numerics": "fig3 at dt and dt/2",
    "table1": "measured CSV, proposed gamma=2e4 / ANF gamma=4e4, zeta in {0.7, 1, 1.3} (needs --input)",
}

DEFAULT_ACCEPTANCE = ("fig3", "fig4", "fig5", "fig6", "fig2x", "parity", "lemma1", "numerics")


def get_preset(name: str, **kwargs) -> Suite:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigurationError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
    return factory(**kwargs)


def with_overrides(suite: Suite, seed=None, dt=None, detrend=None) -> Suite:
    """Copy of ``suite`` with the noise seed, step size or detrend flag replaced."""
    scs = []
    for sc in suite.scenarios:
        sig = sc.signal
        if seed is not None and sig.noise is not None:
            sig = replace(sig, noise=replace(sig.noise, seed=seed))
        scs.append(
            replace(
                sc,
                signal=sig,
                dt=dt if dt is not None else sc.dt,
                detrend=detrend if detrend is not None else sc.detrend,
            )
        )
    return replace(suite, scenarios=scs)
