"""Frozen-parameter frequency responses, rate/noise predictions and trace statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal as sps

from .errors import DomainError, NotConvergedError, NotEnoughDecayError

TWO_PI = 2.0 * math.pi


def transfer_G(theta: float, omega: float, zeta: float = 1.0) -> complex:
    """Filter input-to-output response ``2*zeta*theta*s / (s**2 + 2*zeta*theta*s + theta**2)`` at s = j*omega."""
    if not theta > 0 or not omega >= 0:
        raise DomainError(f"need theta > 0 and omega >= 0, got theta={theta}, omega={omega}")
    # (j w)^2 + theta^2 written out so the resonance cancels exactly
    den = complex(theta * theta - omega * omega, 2.0 * zeta * theta * omega)
    return complex(0.0, 2.0 * zeta * theta * omega) / den


def transfer_E(theta: float, omega: float, zeta: float = 1.0) -> complex:
    """Output-to-error response ``(1 - G) / G``.

    Simplifies to ``(theta**2 - omega**2) / (2j*zeta*theta*omega)``: purely
    imaginary, so its phase is -pi/2 below theta and +pi/2 above.
    """
    if not theta > 0:
        raise DomainError(f"need theta > 0, got {theta}")
    if omega == 0:
        raise DomainError("E has a pole at omega = 0 (G vanishes at DC)")
    if not omega > 0:
        raise DomainError(f"need omega > 0, got {omega}")
    return complex(0.0, -(theta * theta - omega * omega) / (2.0 * zeta * theta * omega))


def omega_gain(theta: float, omega0: float) -> float:
    """Adaptation-rate gain ``|theta**2 - omega0**2| / (theta**2 + omega0**2)``."""
    if not theta >= 0 or not omega0 > 0:
        raise DomainError(f"need theta >= 0 and omega0 > 0, got theta={theta}, omega0={omega0}")
    return abs(theta * theta - omega0 * omega0) / (theta * theta + omega0 * omega0)


def omega_gain_linear(theta: float, omega0: float) -> float:
    """Linear under-approximation ``1 - theta/omega0`` of omega_gain on [0, omega0]."""
    if not omega0 > 0 or not 0 <= theta <= omega0:
        raise DomainError(f"linear gain is defined for 0 <= theta <= omega0, got theta={theta}, omega0={omega0}")
    return 1.0 - theta / omega0


def predicted_rate(gamma: float, k: float, omega0: float) -> float:
    """Predicted exponential rate ``0.5*gamma*k/omega0`` (the unquantified offset is taken as 0)."""
    if not (gamma > 0 and k > 0 and omega0 > 0):
        raise DomainError("gamma, k and omega0 must all be > 0")
    return 0.5 * gamma * k / omega0


def noise_floor(tau_sq: float, omega0: float, k: float) -> float:
    """Upper bound ``4*tau_sq*omega0/k`` on the steady-state variance of the estimation error."""
    if not (tau_sq >= 0 and omega0 > 0 and k > 0):
        raise DomainError("need tau_sq >= 0, omega0 > 0, k > 0")
    return 4.0 * tau_sq * omega0 / k


@dataclass(frozen=True)
class SteadyStateHarmonic:
    b: float  # output amplitude
    c: float  # output phase shift, rad
    a: float  # error amplitude


def steady_state_harmonic(theta: float, omega0: float, k: float, zeta: float = 1.0) -> SteadyStateHarmonic:
    g = transfer_G(theta, omega0, zeta)
    b = k * abs(g)
    a = b * abs(transfer_E(theta, omega0, zeta))
    return SteadyStateHarmonic(b=b, c=math.atan2(g.imag, g.real), a=a)


# ---------------------------------------------------------------- traces


def default_transient_skip(omega0: float, periods: float = 3.0) -> float:
    """Skip window for rate fitting: a few periods of the signal."""
    return periods * TWO_PI / omega0


def initial_drift_skip(theta0: float, omega0: float, periods: float = 3.0) -> float:
    """Conservative window covering the initial opposite-direction drift."""
    return periods * TWO_PI / min(theta0, omega0)


@dataclass(frozen=True)
class RateFit:
    rate: float
    t_start: float
    t_end: float
    n_points: int


def fit_exponential_window(trace, omega0: float, transient_skip: float, cutoff: float = 0.02,
                           min_decay: float = 10.0) -> RateFit:
    t = trace.t
    eps = trace.epsilon(omega0)
    mag = np.abs(eps)
    start = int(np.searchsorted(t, t[0] + transient_skip - 1e-12))
    if start >= t.size:
        raise NotEnoughDecayError("transient skip covers the whole trace")
    below = np.flatnonzero(mag[start:] < cutoff * omega0)
    end = start + int(below[0]) if below.size else t.size
    seg = eps[start:end]
    if seg.size:
        flips = np.flatnonzero(np.sign(seg) != np.sign(seg[0]))
        if flips.size:
            end = start + int(flips[0])
    if end - start < 3:
        raise NotEnoughDecayError(
            f"only {end - start} samples between the skip ({transient_skip:.4g} s) and the cutoff"
        )
    m = mag[start:end]
    if not m[0] >= min_decay * m[-1]:
        raise NotEnoughDecayError(
            f"|eps| decays from {m[0]:.4g} to {m[-1]:.4g}; need a factor {min_decay:g}, lengthen the run"
        )
    slope = np.polyfit(t[start:end], np.log(m), 1)[0]
    return RateFit(rate=float(-slope), t_start=float(t[start]), t_end=float(t[end - 1]), n_points=end - start)


def fit_exponential_rate(trace, omega0: float, transient_skip: float, cutoff: float = 0.02) -> float:
    """Least-squares decay rate of ``ln|omega0 - theta|``.

    The window runs from ``transient_skip`` until ``|eps|`` first drops below
    ``cutoff * omega0`` (or changes sign, whichever comes first).
    """
    return fit_exponential_window(trace, omega0, transient_skip, cutoff).rate


@dataclass(frozen=True)
class ResidualStats:
    mean: float
    variance: float
    n: int
    t_start: float


def residual_stats(trace, omega0, tail_fraction: float = 0.25, settle_tol: float = 0.05) -> ResidualStats:
    if not 0 < tail_fraction <= 0.5:
        raise ValueError(f"tail_fraction must be in (0, 0.5], got {tail_fraction}")
    eps = trace.epsilon(omega0)
    start = int(math.floor(eps.size * (1.0 - tail_fraction)))
    tail = eps[start:]
    if tail.size < 2:
        raise NotConvergedError("tail window holds fewer than two samples")
    ref = np.abs(np.asarray(omega0, dtype=float))
    ref = ref[start:] if ref.ndim else ref
    if not np.mean(np.abs(tail)) < settle_tol * np.mean(ref):
        raise NotConvergedError(
            f"mean |eps| over the tail is {np.mean(np.abs(tail)):.4g}, "
            f"not below {settle_tol:g} of omega0; the trace has not settled"
        )
    return ResidualStats(float(tail.mean()), float(tail.var(ddof=1)), int(tail.size), float(trace.t[start]))


def residual_variance(trace, omega0, tail_fraction: float = 0.25) -> float:
    return residual_stats(trace, omega0, tail_fraction).variance


def time_to_band(trace, omega0, frac: float = 0.02, abs_tol: Optional[float] = None) -> float:
    """First time ``|eps|`` drops below the band; ``inf`` if it never does."""
    eps = np.abs(trace.epsilon(omega0))
    tol = abs_tol if abs_tol is not None else frac * np.abs(np.asarray(omega0, dtype=float))
    hit = np.flatnonzero(eps < tol)
    return float(trace.t[hit[0]]) if hit.size else math.inf


def approaches_monotonically(trace, omega0: float, theta0: float, band: float = 0.02,
                             periods: float = 3.0) -> bool:
    """True when sign(omega0 - theta) never flips between the drift window and the tolerance band."""
    t = trace.t
    eps = trace.epsilon(omega0)
    start = int(np.searchsorted(t, t[0] + initial_drift_skip(theta0, omega0, periods) - 1e-12))
    if start >= eps.size:
        return True
    inside = np.flatnonzero(np.abs(eps[start:]) < band * omega0)
    end = start + int(inside[0]) if inside.size else eps.size
    seg = np.sign(eps[start:end])
    return bool(np.all(seg == seg[0])) if seg.size else True


@dataclass(frozen=True)
class SpectralLine:
    line_psd: float
    floor_psd: float

    @property
    def ratio(self) -> float:
        return self.line_psd / self.floor_psd if self.floor_psd > 0 else math.inf


def spectral_line(x, dt: float, omega: float, band_max: float) -> SpectralLine:
    """Hann-window periodogram power at ``omega`` versus the median over ``(0, band_max]``.

    The line value is the largest bin within 1.5 bins of ``omega``; bins within
    4 bins of it are excluded from the median floor.
    """
    x = np.asarray(x, dtype=float)
    f, p = sps.periodogram(x - x.mean(), fs=TWO_PI / dt, window="hann", detrend=False)
    df = f[1] - f[0]
    near = np.abs(f - omega) <= 1.5 * df
    line = float(p[near].max())
    band = (f > 0) & (f <= band_max) & (np.abs(f - omega) > 4 * df)
    return SpectralLine(line, float(np.median(p[band])))


@dataclass
class ConvergenceReport:
    beta_hat: Optional[float]
    beta_pred: Optional[float]
    epsilon_ss_mean: Optional[float]
    epsilon_ss_var: Optional[float]
    noise_floor: Optional[float]
    transient_skip: Optional[float]
    notes: tuple = ()

    def as_dict(self) -> dict:
        return {
            "beta_hat": self.beta_hat,
            "beta_pred": self.beta_pred,
            "epsilon_ss_mean": self.epsilon_ss_mean,
            "epsilon_ss_var": self.epsilon_ss_var,
            "noise_floor": self.noise_floor,
            "transient_skip": self.transient_skip,
            "notes": list(self.notes),
        }


def convergence_report(trace, omega0=None, k=None, gamma=None, tau_sq=None, transient_skip=None,
                       tail_fraction: float = 0.25) -> ConvergenceReport:
    """Summarise a trace.  Quantities whose inputs are unknown are left as None.

    ``omega0`` may be a scalar or a per-sample track; rate fitting and the
    predictions need a scalar.
    """
    notes = []
    scalar = omega0 is not None and np.ndim(omega0) == 0
    beta_pred = beta_hat = floor = mean = var = None
    if scalar and k is not None and gamma is not None and trace.kind != "anf":
        beta_pred = predicted_rate(gamma, k, omega0)
    if scalar and k is not None and tau_sq is not None:
        floor = noise_floor(tau_sq, omega0, k)
    if scalar:
        if transient_skip is None:
            transient_skip = default_transient_skip(omega0)
        try:
            beta_hat = fit_exponential_rate(trace, omega0, transient_skip)
        except NotEnoughDecayError as exc:
            notes.append(f"rate fit: {exc}")
    if omega0 is not None:
        try:
            stats = residual_stats(trace, omega0, tail_fraction)
            mean, var = stats.mean, stats.variance
        except NotConvergedError as exc:
            notes.append(f"residual: {exc}")
    return ConvergenceReport(beta_hat, beta_pred, mean, var, floor, transient_skip, tuple(notes))
