"""CSV ingestion of measured signals and emission of run reports."""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path

import numpy as np

from .errors import IngestionError, ParseError
from .signals import TimeSeries

TRACE_HEADER = "t,theta,epsilon,e,x1,x2"
MAX_ROWS = 100_000
JITTER_TOL = 1e-6


def _is_header(row):
    try:
        [float(c) for c in row]
    except ValueError:
        return True
    return False


def load_csv(path, detrend: bool = False) -> TimeSeries:
    """Read a two-column ``t,sigma`` file with an optional header line.

    ``dt`` is the median time step; every step must match it to within
    1e-6 relative jitter.  With ``detrend`` the sample mean is subtracted.
    """
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestionError(f"{path}: {exc.strerror}") from exc
    ts, xs = [], []
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and _is_header(row):
                continue
            if len(row) != 2:
                raise IngestionError(f"{path}:{lineno}: expected 2 columns, got {len(row)}", row=lineno)
            vals = []
            for col, cell in enumerate(row, start=1):
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: column {col} is not numeric: {cell!r}", lineno, col) from None
                if not math.isfinite(v):
                    raise ParseError(f"{path}:{lineno}: column {col} is not finite: {cell!r}", lineno, col)
                vals.append(v)
            ts.append((lineno, vals[0]))
            xs.append(vals[1])
    if not xs:
        raise IngestionError(f"{path}: no samples")
    t = np.array([v for _, v in ts])
    if t.size == 1:
        raise IngestionError(f"{path}: a single sample does not define a sample period")
    steps = np.diff(t)
    dt = float(np.median(steps))
    if not dt > 0:
        raise IngestionError(f"{path}: time column must be strictly increasing")
    bad = np.flatnonzero((steps <= 0) | (np.abs(steps - dt) > JITTER_TOL * dt))
    if bad.size:
        row = ts[int(bad[0]) + 1][0]
        raise IngestionError(
            f"{path}:{row}: non-uniform sampling (step {steps[bad[0]]:.9g} vs median {dt:.9g})", row=row
        )
    x = np.array(xs)
    if detrend:
        x = x - x.mean()
    return TimeSeries(float(t[0]), dt, x)


def decimation_stride(n: int, max_rows: int = MAX_ROWS) -> int:
    return max(1, -(-n // max_rows))


def write_trace_csv(path, trace, omega0=None, max_rows: int = MAX_ROWS):
    """Write ``t,theta,epsilon,e,x1,x2`` with 9 significant digits.

    Rows are decimated to at most ``max_rows``; epsilon is ``nan`` when the
    true frequency is unknown.
    """
    n = len(trace)
    stride = decimation_stride(n, max_rows)
    idx = np.arange(0, n, stride)
    if omega0 is None:
        eps = np.full(n, np.nan)
    else:
        eps = trace.epsilon(omega0)
    cols = np.column_stack([trace.t[idx], trace.theta[idx], eps[idx], trace.e[idx], trace.x1[idx], trace.x2[idx]])
    try:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            np.savetxt(fh, cols, fmt="%.9g", delimiter=",", header=TRACE_HEADER, comments="")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write trace {path}: {exc.strerror}") from exc


class CsvTrace:
    """Minimal trace view over an emitted trace CSV, enough for the analysis functions."""

    kind = "csv"

    def __init__(self, t, theta):
        self._t = np.asarray(t, dtype=float)
        self.theta = np.asarray(theta, dtype=float)
        self.dt = float(np.median(np.diff(self._t))) if self._t.size > 1 else 0.0

    def __len__(self):
        return self.theta.size

    @property
    def t(self):
        return self._t

    def epsilon(self, omega0):
        return np.asarray(omega0, dtype=float) - self.theta


def read_trace_csv(path) -> CsvTrace:
    try:
        data = np.genfromtxt(path, delimiter=",", names=True)
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    if data.dtype.names is None or "t" not in data.dtype.names or "theta" not in data.dtype.names:
        raise IngestionError(f"{path}: expected a header with t and theta columns")
    return CsvTrace(np.atleast_1d(data["t"]), np.atleast_1d(data["theta"]))


def _round(v):
    if v is None:
        return None
    if isinstance(v, float):
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.9g}")
    return v


def summary_dict(artifact) -> dict:
    omega0 = artifact.omega0()
    est = {}
    for cfg in artifact.scenario.estimators:
        label = cfg.name
        entry = {"kind": cfg.kind, "gamma": cfg.gamma, "zeta": cfg.zeta, "theta0": cfg.theta0}
        if label in artifact.errors:
            entry["error"] = artifact.errors[label]
        else:
            rep = artifact.reports[label].as_dict()
            entry.update({k: _round(v) for k, v in rep.items()})
            entry["final_theta"] = _round(float(artifact.traces[label].theta[-1]))
        est[label] = entry
    return {
        "scenario": artifact.name,
        "signal": artifact.scenario.signal.kind.value,
        "omega0": _round(omega0) if isinstance(omega0, float) else None,
        "dt": artifact.signal.dt,
        "samples": len(artifact.signal),
        "signal_sha256": artifact.signal.digest(),
        "estimators": est,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in artifact.checks],
        "passed": artifact.passed,
    }


def emit_report(artifact, out_dir, max_rows: int = MAX_ROWS):
    """Write ``<scenario>__<estimator>.csv`` per trace plus ``<scenario>__summary.json``.

    Returns the written paths in a deterministic order.
    """
    out_dir = Path(out_dir)
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot create {out_dir}: {exc.strerror}") from exc
    omega0 = artifact.omega0()
    paths = []
    for label in sorted(artifact.traces):
        p = out_dir / f"{artifact.name}__{label}.csv"
        write_trace_csv(p, artifact.traces[label], omega0, max_rows)
        paths.append(p)
    p = out_dir / f"{artifact.name}__summary.json"
    with open(p, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(summary_dict(artifact), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(p)
    return paths


def emit_suite_report(result, out_dir, max_rows: int = MAX_ROWS):
    paths = []
    for art in result.artifacts.values():
        paths.extend(emit_report(art, out_dir, max_rows))
    if result.checks:
        p = Path(out_dir) / f"{result.suite.name}__suite.json"
        payload = {
            "suite": result.suite.name,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in result.checks],
            "passed": result.passed,
        }
        with open(p, "w", newline="\n", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        paths.append(p)
    return paths
