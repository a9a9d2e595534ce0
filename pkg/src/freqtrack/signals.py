"""Seeded generation of the excitation signals.

Every sinusoidal signal has the form ``k(t) * sin(phi(t)) + eta(t)``, where
``k`` is a constant or slowly modulated amplitude, ``phi`` is the exact
integrated phase and ``eta`` is band-limited white noise realised as i.i.d.
Gaussian samples at the simulation rate.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError, SignalSpecError, UnsupportedKindError

DEFAULT_DT = 1e-4
FILE_DT = 5e-4


class SignalKind(str, enum.Enum):
    PURE_SINE = "pure_sine"
    NOISY_SINE = "noisy_sine"
    AM_SINE = "am_sine"
    LINEAR_CHIRP = "linear_chirp"
    FROM_FILE = "from_file"


SINUSOID_KINDS = (SignalKind.PURE_SINE, SignalKind.NOISY_SINE, SignalKind.AM_SINE)


@dataclass(frozen=True)
class NoiseSpec:
    """Band-limited white noise.

    Either ``variance`` (per-sample variance tau^2) or ``psd`` (power spectral
    density p) sets the level.  With both present the variance wins and the
    PSD is reported as ``variance * dt``.
    """

    variance: Optional[float] = None
    psd: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        if self.variance is None and self.psd is None:
            raise SignalSpecError("noise: one of variance or psd is required")
        if self.variance is not None and not self.variance >= 0:
            raise SignalSpecError(f"noise: variance must be >= 0, got {self.variance}")
        if self.psd is not None and not self.psd >= 0:
            raise SignalSpecError(f"noise: psd must be >= 0, got {self.psd}")
        if not 0 <= int(self.seed) < 2**64:
            raise SignalSpecError(f"noise: seed must be a 64-bit unsigned integer, got {self.seed}")

    def variance_for(self, dt: float) -> float:
        if self.variance is not None:
            return float(self.variance)
        return float(self.psd) / dt

    def psd_for(self, dt: float) -> float:
        if self.variance is not None:
            return float(self.variance) * dt
        return float(self.psd)

    def samples(self, n: int, dt: float) -> np.ndarray:
        rng = np.random.default_rng(int(self.seed))
        return rng.standard_normal(n) * math.sqrt(self.variance_for(dt))


@dataclass(frozen=True)
class SignalSpec:
    kind: SignalKind
    omega0: Optional[float] = None
    amplitude: float = 1.0
    am_offset: Optional[float] = None
    am_depth: Optional[float] = None
    am_rate: Optional[float] = None
    am_phase: float = 0.0
    omega_start: Optional[float] = None
    omega_end: Optional[float] = None
    duration_chirp: Optional[float] = None
    noise: Optional[NoiseSpec] = None
    file_path: Optional[str] = None
    # slow-modulation premise: am_rate < max_am_ratio * omega0
    max_am_ratio: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "kind", SignalKind(self.kind))
        self.validate()

    @classmethod
    def pure_sine(cls, omega0, amplitude=1.0):
        return cls(SignalKind.PURE_SINE, omega0=omega0, amplitude=amplitude)

    @classmethod
    def noisy_sine(cls, omega0, noise, amplitude=1.0):
        return cls(SignalKind.NOISY_SINE, omega0=omega0, amplitude=amplitude, noise=noise)

    @classmethod
    def amplitude_modulated(cls, omega0, offset, depth, rate, phase=0.0, noise=None, max_am_ratio=0.1):
        return cls(
            SignalKind.AM_SINE,
            omega0=omega0,
            am_offset=offset,
            am_depth=depth,
            am_rate=rate,
            am_phase=phase,
            noise=noise,
            max_am_ratio=max_am_ratio,
        )

    @classmethod
    def linear_chirp(cls, omega_start, omega_end, duration, amplitude=1.0, noise=None):
        return cls(
            SignalKind.LINEAR_CHIRP,
            omega_start=omega_start,
            omega_end=omega_end,
            duration_chirp=duration,
            amplitude=amplitude,
            noise=noise,
        )

    @classmethod
    def from_file(cls, path):
        return cls(SignalKind.FROM_FILE, file_path=str(path))

    @property
    def mu(self) -> float:
        """Chirp slope in rad/s^2; positive for a down-chirp."""
        if self.kind is not SignalKind.LINEAR_CHIRP:
            raise UnsupportedKindError(f"mu is defined for linear chirps only, not {self.kind.value}")
        return (self.omega_start - self.omega_end) / self.duration_chirp

    def validate(self):
        kind = self.kind
        if kind is SignalKind.FROM_FILE:
            if not self.file_path:
                raise SignalSpecError("from_file: file_path is required")
            return
        if kind in SINUSOID_KINDS:
            if self.omega0 is None or not self.omega0 > 0:
                raise SignalSpecError(f"omega0 must be > 0, got {self.omega0}")
        if kind in (SignalKind.PURE_SINE, SignalKind.NOISY_SINE, SignalKind.LINEAR_CHIRP):
            if not self.amplitude > 0:
                raise SignalSpecError(f"amplitude must be > 0, got {self.amplitude}")
        if kind is SignalKind.PURE_SINE and self.noise is not None:
            raise SignalSpecError("pure_sine carries no noise; use noisy_sine")
        if kind is SignalKind.NOISY_SINE and self.noise is None:
            raise SignalSpecError("noisy_sine requires a noise spec")
        if kind is SignalKind.AM_SINE:
            for name in ("am_offset", "am_depth", "am_rate"):
                if getattr(self, name) is None:
                    raise SignalSpecError(f"am_sine: {name} is required")
            if self.am_depth < 0 or self.am_rate < 0:
                raise SignalSpecError("am_sine: am_depth and am_rate must be >= 0")
            if self.am_offset - self.am_depth < 0:
                raise SignalSpecError(
                    f"am_sine: am_offset - am_depth must be >= 0 (amplitude never negative), "
                    f"got {self.am_offset} - {self.am_depth}"
                )
            if not self.am_offset + self.am_depth > 0:
                raise SignalSpecError("am_sine: amplitude is identically zero")
            if not self.am_rate < self.max_am_ratio * self.omega0:
                raise SignalSpecError(
                    f"am_sine: am_rate must be < {self.max_am_ratio} * omega0 (slow variation), "
                    f"got am_rate={self.am_rate}, omega0={self.omega0}"
                )
        if kind is SignalKind.LINEAR_CHIRP:
            if self.omega_start is None or self.omega_end is None or self.duration_chirp is None:
                raise SignalSpecError("linear_chirp: omega_start, omega_end and duration_chirp are required")
            if not (self.omega_start > 0 and self.omega_end > 0):
                raise SignalSpecError("linear_chirp: omega_start and omega_end must be > 0")
            if not self.duration_chirp > 0:
                raise SignalSpecError("linear_chirp: duration_chirp must be > 0")


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled scalar signal; sample i sits at ``t0 + i * dt``."""

    t0: float
    dt: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        arr = np.array(self.samples, dtype=float).ravel()
        if arr.size < 1:
            raise ValueError("a time series needs at least one sample")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    @property
    def t(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) * self.dt

    @property
    def duration(self) -> float:
        return (self.samples.size - 1) * self.dt

    def digest(self) -> str:
        return hashlib.sha256(self.samples.tobytes()).hexdigest()


def amplitude_at(spec: SignalSpec, t):
    """Amplitude k(t); accepts scalars or arrays."""
    if spec.kind in (SignalKind.PURE_SINE, SignalKind.NOISY_SINE):
        if np.ndim(t):
            return np.full(np.shape(t), float(spec.amplitude))
        return float(spec.amplitude)
    if spec.kind is SignalKind.AM_SINE:
        return spec.am_offset + spec.am_depth * np.sin(spec.am_rate * np.asarray(t, dtype=float) + spec.am_phase)
    raise UnsupportedKindError(f"amplitude_at is not defined for {spec.kind.value}")


def _check_time(spec, t):
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0):
        raise DomainError("t must be finite and >= 0")
    if spec.kind is SignalKind.LINEAR_CHIRP and np.any(t > spec.duration_chirp):
        raise DomainError(f"t outside the chirp range [0, {spec.duration_chirp}]")
    return t


def omega_at(spec: SignalSpec, t):
    """Instantaneous angular frequency in rad/s."""
    if spec.kind is SignalKind.FROM_FILE:
        raise UnsupportedKindError("a file-backed signal has no known frequency")
    t = _check_time(spec, t)
    if spec.kind is SignalKind.LINEAR_CHIRP:
        w = spec.omega_start - spec.mu * t
    else:
        w = np.full(t.shape, float(spec.omega0))
    return float(w) if w.ndim == 0 else w


def phase_at(spec: SignalSpec, t):
    """Integrated phase; for the chirp ``omega_start * t - mu * t**2 / 2``."""
    if spec.kind is SignalKind.FROM_FILE:
        raise UnsupportedKindError("a file-backed signal has no known phase")
    t = _check_time(spec, t)
    if spec.kind is SignalKind.LINEAR_CHIRP:
        return spec.omega_start * t - 0.5 * spec.mu * t * t
    return spec.omega0 * t


def sample_count(dt: float, duration: float) -> int:
    # guard against duration/dt landing a hair below an integer
    return int(math.floor(duration / dt + 1e-9)) + 1


def generate(spec: SignalSpec, dt: float = DEFAULT_DT, duration: float = 1.0) -> TimeSeries:
    if spec.kind is SignalKind.FROM_FILE:
        raise UnsupportedKindError("file-backed signals are read with freqtrack.io.load_csv")
    if not dt > 0:
        raise SignalSpecError(f"dt must be > 0, got {dt}")
    if not duration >= dt:
        raise SignalSpecError(f"duration must be >= dt, got duration={duration}, dt={dt}")
    n = sample_count(dt, duration)
    t = np.arange(n) * dt
    if spec.kind is SignalKind.LINEAR_CHIRP:
        if t[-1] > spec.duration_chirp * (1 + 1e-12):
            raise SignalSpecError(
                f"linear_chirp: requested duration {duration} exceeds duration_chirp {spec.duration_chirp}"
            )
        t = np.minimum(t, spec.duration_chirp)
        x = spec.amplitude * np.sin(phase_at(spec, t))
    else:
        x = amplitude_at(spec, t) * np.sin(spec.omega0 * t)
    if spec.noise is not None:
        x = x + spec.noise.samples(n, dt)
    return TimeSeries(0.0, dt, x)
