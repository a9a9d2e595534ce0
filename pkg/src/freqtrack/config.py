"""YAML configuration files for scenarios and suites.

A file holds either one scenario mapping or a suite::

    name: my_suite
    scenarios:
      - name: sine50
        duration: 10
        dt: 1.0e-4
        signal: {kind: noisy_sine, omega0: 50, noise: {variance: 1.0e-3, seed: 7}}
        estimators:
          - {kind: proposed, gamma: 100, theta0: 10}
        checks:
          - noise_floor
          - {name: bounded_after, tol: 1.0, after: 5.0}
    checks: []

Every preset round-trips through :func:`suite_to_dict` / :func:`suite_from_dict`.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import yaml

from .errors import ConfigurationError
from .scenarios import CheckSpec, EstimatorConfig, Scenario, Suite
from .signals import NoiseSpec, SignalKind, SignalSpec

_SIGNAL_FIELDS = {f.name for f in dataclasses.fields(SignalSpec)}
_EST_FIELDS = {f.name for f in dataclasses.fields(EstimatorConfig)}


def _signal_to_dict(spec: SignalSpec) -> dict:
    out = {"kind": spec.kind.value}
    defaults = SignalSpec.__dataclass_fields__
    for name in _SIGNAL_FIELDS - {"kind", "noise"}:
        v = getattr(spec, name)
        if v is not None and v != defaults[name].default:
            out[name] = v
    if spec.noise is not None:
        out["noise"] = {k: v for k, v in dataclasses.asdict(spec.noise).items() if v is not None}
    return out


def _signal_from_dict(d: dict) -> SignalSpec:
    d = dict(d)
    unknown = set(d) - _SIGNAL_FIELDS
    if unknown:
        raise ConfigurationError(f"signal: unknown keys {sorted(unknown)}")
    if "kind" not in d:
        raise ConfigurationError("signal: 'kind' is required")
    try:
        d["kind"] = SignalKind(d["kind"])
    except ValueError:
        raise ConfigurationError(f"signal: unknown kind {d['kind']!r}") from None
    if d.get("noise") is not None:
        d["noise"] = NoiseSpec(**d["noise"])
    return SignalSpec(**d)


def _check_to_obj(c: CheckSpec):
    return {"name": c.name, **c.params} if c.params else c.name


def _check_from_obj(o) -> CheckSpec:
    if isinstance(o, str):
        return CheckSpec(o)
    o = dict(o)
    try:
        name = o.pop("name")
    except KeyError:
        raise ConfigurationError(f"check entry without a name: {o}") from None
    return CheckSpec(name, o)


def scenario_to_dict(sc: Scenario) -> dict:
    ests = []
    for e in sc.estimators:
        ed = {k: v for k, v in dataclasses.asdict(e).items() if v is not None}
        ests.append(ed)
    d = {
        "name": sc.name,
        "duration": sc.duration,
        "dt": sc.dt,
        "signal": _signal_to_dict(sc.signal),
        "estimators": ests,
        "checks": [_check_to_obj(c) for c in sc.checks],
    }
    if sc.detrend:
        d["detrend"] = True
    return d


def scenario_from_dict(d: dict) -> Scenario:
    try:
        ests = []
        for e in d["estimators"]:
            unknown = set(e) - _EST_FIELDS
            if unknown:
                raise ConfigurationError(f"estimator: unknown keys {sorted(unknown)}")
            ests.append(EstimatorConfig(**e))
        return Scenario(
            name=str(d["name"]),
            signal=_signal_from_dict(d["signal"]),
            estimators=ests,
            duration=float(d["duration"]),
            dt=float(d.get("dt", 1e-4)),
            checks=[_check_from_obj(c) for c in d.get("checks") or []],
            detrend=bool(d.get("detrend", False)),
        )
    except KeyError as exc:
        raise ConfigurationError(f"scenario: missing key {exc.args[0]!r}") from None


def suite_to_dict(suite: Suite) -> dict:
    return {
        "name": suite.name,
        "scenarios": [scenario_to_dict(s) for s in suite.scenarios],
        "checks": [_check_to_obj(c) for c in suite.checks],
    }


def suite_from_dict(d: dict) -> Suite:
    if not isinstance(d, dict):
        raise ConfigurationError("config must be a mapping")
    if "scenarios" not in d:
        sc = scenario_from_dict(d)
        return Suite(sc.name, [sc])
    return Suite(
        name=str(d.get("name", "suite")),
        scenarios=[scenario_from_dict(s) for s in d["scenarios"]],
        checks=[_check_from_obj(c) for c in d.get("checks") or []],
    )


def load_config(path) -> Suite:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"{path}: {exc.strerror}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"{path}: invalid YAML: {exc}") from exc
    return suite_from_dict(data)


def dump_config(suite: Suite) -> str:
    return yaml.safe_dump(suite_to_dict(suite), sort_keys=False)
