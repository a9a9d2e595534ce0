"""One-parameter frequency estimator.

A critically damped second-order filter driven by the measured signal,

    x1' = x2
    x2' = -theta**2 * x1 - 2*zeta*theta*x2 + 2*zeta*theta*sigma
    y   = x2

with the sign-based adaptation law ``theta' = -gamma * sign(x1) * (sigma - y)``.
``zeta`` defaults to 1; other values give the damped variant, where the
damping enters both the feedback and the input coupling so the gain at the
matched frequency stays one.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np

from . import _kernels
from .errors import ConfigurationError, NumericOverflowError
from .signals import TimeSeries


@dataclass(frozen=True)
class EstimatorParams:
    gamma: float
    zeta: float = 1.0
    theta_min: float = 1e-3
    dt: float = 1e-4

    def __post_init__(self):
        if not self.gamma > 0:
            raise ConfigurationError(f"gamma must be > 0, got {self.gamma}")
        if not 0 < self.zeta <= 2:
            raise ConfigurationError(f"zeta must lie in (0, 2], got {self.zeta}")
        if not self.theta_min > 0:
            raise ConfigurationError(f"theta_min must be > 0, got {self.theta_min}")
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")


@dataclass(frozen=True)
class EstimatorState:
    x1: float
    x2: float
    theta: float

    @property
    def y(self) -> float:
        return self.x2

    def is_finite(self) -> bool:
        return math.isfinite(self.x1) and math.isfinite(self.x2) and math.isfinite(self.theta)


@dataclass
class EstimatorTrace:
    """Per-sample record of a run.

    Entry ``i`` holds the state at ``t0 + i*dt`` *before* sample ``i`` is
    consumed, and ``e[i] = sigma[i] - output``.  For ANF traces ``x1`` and
    ``x2`` hold ``x`` and ``dx/dt`` and the output is ``x``.
    """

    kind: str
    params: object
    t0: float
    dt: float
    theta: np.ndarray = field(repr=False)
    x1: np.ndarray = field(repr=False)
    x2: np.ndarray = field(repr=False)
    e: np.ndarray = field(repr=False)
    input_digest: str = ""

    def __len__(self):
        return self.theta.size

    @property
    def t(self) -> np.ndarray:
        return self.t0 + np.arange(self.theta.size) * self.dt

    def epsilon(self, omega0: Union[float, np.ndarray]) -> np.ndarray:
        """Estimation error ``omega0 - theta``; omega0 may be a per-sample track."""
        return np.asarray(omega0, dtype=float) - self.theta

    def params_dict(self) -> dict:
        return asdict(self.params)


def derivatives(state: EstimatorState, sigma: float, params: EstimatorParams):
    """Time derivatives ``(dx1/dt, dx2/dt, dtheta/dt)``; ``sign(0) = 0``."""
    return _kernels.proposed_rhs(
        float(state.x1), float(state.x2), float(state.theta), float(sigma), params.gamma, params.zeta
    )


def step(state: EstimatorState, sigma: float, params: EstimatorParams, index: int = 0) -> EstimatorState:
    """Advance one RK4 step of ``params.dt`` with sigma held, then clamp theta."""
    x1, x2, th = _kernels.proposed_step(
        float(state.x1),
        float(state.x2),
        float(state.theta),
        float(sigma),
        params.gamma,
        params.zeta,
        params.dt,
        params.theta_min,
    )
    new = EstimatorState(x1, x2, th)
    if not new.is_finite():
        raise NumericOverflowError(index)
    return new


def check_run_inputs(signal: TimeSeries, theta0: float, dt: float, theta_min: float):
    if not math.isclose(dt, signal.dt, rel_tol=1e-9, abs_tol=0.0):
        raise ConfigurationError(f"estimator dt={dt} does not match signal dt={signal.dt}; resample first")
    if not theta0 >= theta_min:
        raise ConfigurationError(f"theta0={theta0} is below theta_min={theta_min}")


def run(signal: TimeSeries, theta0: float, params: EstimatorParams) -> EstimatorTrace:
    """Run the estimator over every sample, starting from ``(0, 0, theta0)``."""
    check_run_inputs(signal, theta0, params.dt, params.theta_min)
    sig = np.ascontiguousarray(signal.samples, dtype=float)
    theta, x1, x2, e, bad = _kernels.proposed_loop(
        sig, 0.0, 0.0, float(theta0), params.gamma, params.zeta, params.dt, params.theta_min
    )
    if bad >= 0:
        raise NumericOverflowError(int(bad))
    kind = "proposed" if params.zeta == 1.0 else "proposed_zeta"
    return EstimatorTrace(kind, params, signal.t0, signal.dt, theta, x1, x2, e, signal.digest())
