"""Batch command-line front end.

Subcommands: simulate, rate, foster, drift, converge, dominance, lemma-l2,
regime, probe-supercritical, selftest.  Configuration is a strict JSON
document (unknown keys are rejected, errors carry JSON paths); bulk event
data goes to CSV with the fixed header ``n,t,dt,kind,x,y,z,lambda_pre``,
everything else to JSON.  Exit codes: 0 success, 1 validation failure,
2 a run terminated by intensity saturation, 3 selftest assertion failure.

Replica i of a run with master seed s draws from the documented substream
(seed s, spawn key (i,)); aggregation happens in replica order, so
``--threads N`` changes wall time, never output bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import analysis, foster
from .chain import EventLog, StopRule, simulate
from .model import (
    DeterministicZ,
    ExponentialPhi,
    ExponentialZ,
    ModelParams,
    State,
    ThresholdLinearPhi,
    UniformZ,
)
from .streams import substream

__all__ = ["RunConfig", "ConfigError", "parse_config", "run_command", "main"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SATURATION = 2
EXIT_SELFTEST = 3

CSV_HEADER = ["n", "t", "dt", "kind", "x", "y", "z", "lambda_pre"]


class ConfigError(ValueError):
    """Invalid run configuration; `errors` lists one message per field."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    initial: State
    seed: int
    stop: StopRule
    replications: int = 1
    burn_in_fraction: float = 0.1
    output: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        phi = self.model.phi
        if isinstance(phi, ExponentialPhi):
            phi_obj: dict[str, Any] = {"kind": "exp", "scale": phi.scale}
        else:
            phi_obj = {"kind": "threshold_linear", "theta": phi.theta, "slope": phi.slope}
        z = self.model.z
        if isinstance(z, ExponentialZ):
            z_obj: dict[str, Any] = {"kind": "exponential", "mean": z.mean}
        elif isinstance(z, UniformZ):
            z_obj = {"kind": "uniform", "low": z.low, "high": z.high}
        else:
            z_obj = {"kind": "deterministic", "value": z.value}
        stop: dict[str, Any] = {}
        if self.stop.max_events is not None:
            stop["max_events"] = self.stop.max_events
        if self.stop.horizon is not None:
            stop["horizon"] = self.stop.horizon
        return {
            "model": {
                "c": self.model.c,
                "k": self.model.k,
                "alpha": self.model.alpha,
                "phi": phi_obj,
                "z": z_obj,
                "intensity_cap": self.model.intensity_cap,
            },
            "initial": {"x": self.initial.x, "y": self.initial.y},
            "seed": self.seed,
            "stop": stop,
            "replications": self.replications,
            "burn_in_fraction": self.burn_in_fraction,
            "output": dict(self.output),
        }


class _Check:
    def __init__(self) -> None:
        self.errors: list[str] = []

    def fail(self, path: str, msg: str) -> None:
        self.errors.append(f"{path}: {msg}")

    def obj(self, data: Any, path: str, required: dict, optional: dict) -> Optional[dict]:
        if not isinstance(data, dict):
            self.fail(path, f"expected object, got {type(data).__name__}")
            return None
        for key in data:
            if key not in required and key not in optional:
                self.fail(f"{path}.{key}", "unknown key")
        for key in required:
            if key not in data:
                self.fail(f"{path}.{key}", "missing key")
        return data

    def number(self, data: dict, path: str, key: str, lo: float = -math.inf, hi: float = math.inf,
               lo_strict: bool = False) -> Optional[float]:
        if key not in data:
            return None
        v = data[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"{path}.{key}", f"expected number, got {type(v).__name__}")
            return None
        v = float(v)
        if not math.isfinite(v):
            self.fail(f"{path}.{key}", "must be finite")
            return None
        if lo_strict and v <= lo:
            self.fail(f"{path}.{key}", f"must be > {lo:g}")
            return None
        if v < lo:
            self.fail(f"{path}.{key}", f"must be >= {lo:g}")
            return None
        if v > hi:
            self.fail(f"{path}.{key}", f"must be <= {hi:g}")
            return None
        return v

    def integer(self, data: dict, path: str, key: str, lo: int = 0, hi: int = 2**63 - 1) -> Optional[int]:
        if key not in data:
            return None
        v = data[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(f"{path}.{key}", f"expected integer, got {type(v).__name__}")
            return None
        if v < lo or v > hi:
            self.fail(f"{path}.{key}", f"must be in [{lo}, {hi}]")
            return None
        return v


def _parse_phi(data: Any, path: str, chk: _Check):
    kind = data.get("kind") if isinstance(data, dict) else None
    if kind == "exp":
        obj = chk.obj(data, path, {"kind": 1, "scale": 1}, {})
        if obj is None:
            return None
        s = chk.number(obj, path, "scale", lo=0.0, lo_strict=True)
        return ExponentialPhi(s) if s is not None else None
    if kind == "threshold_linear":
        obj = chk.obj(data, path, {"kind": 1, "theta": 1, "slope": 1}, {})
        if obj is None:
            return None
        theta = chk.number(obj, path, "theta")
        slope = chk.number(obj, path, "slope", lo=0.0, lo_strict=True)
        if theta is None or slope is None:
            return None
        return ThresholdLinearPhi(theta, slope)
    chk.fail(f"{path}.kind", f"unknown variant {kind!r} (expected 'exp' or 'threshold_linear')")
    return None


def _parse_z(data: Any, path: str, chk: _Check):
    kind = data.get("kind") if isinstance(data, dict) else None
    if kind == "exponential":
        obj = chk.obj(data, path, {"kind": 1, "mean": 1}, {})
        if obj is None:
            return None
        m = chk.number(obj, path, "mean", lo=0.0, lo_strict=True)
        return ExponentialZ(m) if m is not None else None
    if kind == "uniform":
        obj = chk.obj(data, path, {"kind": 1, "low": 1, "high": 1}, {})
        if obj is None:
            return None
        low = chk.number(obj, path, "low", lo=0.0)
        high = chk.number(obj, path, "high")
        if low is None or high is None:
            return None
        if not high > low:
            chk.fail(f"{path}.high", f"must be > low ({low})")
            return None
        return UniformZ(low, high)
    if kind == "deterministic":
        obj = chk.obj(data, path, {"kind": 1, "value": 1}, {})
        if obj is None:
            return None
        v = chk.number(obj, path, "value", lo=0.0, lo_strict=True)
        return DeterministicZ(v) if v is not None else None
    chk.fail(
        f"{path}.kind",
        f"unknown variant {kind!r} (expected 'exponential', 'uniform' or 'deterministic')",
    )
    return None


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Raises ConfigError whose `errors` list one problem per field, each
    prefixed with the JSON path ($.model.alpha style).
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([f"$: invalid JSON: {e}"]) from None
    chk = _Check()
    top = chk.obj(
        data,
        "$",
        {"model": 1, "initial": 1, "seed": 1, "stop": 1},
        {"replications": 1, "burn_in_fraction": 1, "output": 1},
    )
    if top is None:
        raise ConfigError(chk.errors)

    model = None
    mobj = chk.obj(
        top.get("model"),
        "$.model",
        {"c": 1, "k": 1, "alpha": 1, "phi": 1, "z": 1},
        {"intensity_cap": 1},
    )
    if mobj is not None:
        c = chk.number(mobj, "$.model", "c", lo=0.0, lo_strict=True)
        k = chk.number(mobj, "$.model", "k", lo=0.0)
        alpha = chk.number(mobj, "$.model", "alpha", lo=0.0, lo_strict=True)
        cap = chk.number(mobj, "$.model", "intensity_cap", lo=0.0, lo_strict=True)
        phi = _parse_phi(mobj.get("phi"), "$.model.phi", chk) if "phi" in mobj else None
        z = _parse_z(mobj.get("z"), "$.model.z", chk) if "z" in mobj else None
        if None not in (c, k, alpha, phi, z):
            model = ModelParams(c, k, alpha, phi, z, intensity_cap=cap if cap is not None else 1e12)

    initial = None
    iobj = chk.obj(top.get("initial"), "$.initial", {"x": 1, "y": 1}, {})
    if iobj is not None:
        x = chk.number(iobj, "$.initial", "x")
        y = chk.number(iobj, "$.initial", "y", lo=0.0)
        if x is not None and y is not None:
            initial = State(x, y)

    seed = None
    if "seed" in top:
        v = top["seed"]
        if isinstance(v, bool) or not isinstance(v, int):
            chk.fail("$.seed", f"expected integer, got {type(v).__name__}")
        elif not 0 <= v < 2**64:
            chk.fail("$.seed", "must be an unsigned 64-bit integer")
        else:
            seed = v

    stop = None
    sobj = chk.obj(top.get("stop"), "$.stop", {}, {"max_events": 1, "horizon": 1})
    if sobj is not None:
        max_events = chk.integer(sobj, "$.stop", "max_events", lo=0)
        horizon = chk.number(sobj, "$.stop", "horizon", lo=0.0, lo_strict=True)
        if "max_events" not in sobj and "horizon" not in sobj:
            chk.fail("$.stop", "set max_events, horizon, or both")
        elif ("max_events" in sobj) == (max_events is not None) and (
            "horizon" in sobj
        ) == (horizon is not None):
            stop = StopRule(max_events=max_events, horizon=horizon)

    replications = chk.integer(top, "$", "replications", lo=1) if "replications" in top else 1
    burn = (
        chk.number(top, "$", "burn_in_fraction", lo=0.0)
        if "burn_in_fraction" in top
        else 0.1
    )
    if burn is not None and not burn < 1.0:
        chk.fail("$.burn_in_fraction", "must be < 1")
        burn = None

    output: dict = {}
    if "output" in top:
        oobj = chk.obj(top.get("output"), "$.output", {}, {"events": 1, "summary": 1})
        if oobj is not None:
            for key in ("events", "summary"):
                if key in oobj and not isinstance(oobj[key], str):
                    chk.fail(f"$.output.{key}", "expected string path")
                elif key in oobj:
                    output[key] = oobj[key]

    if chk.errors:
        raise ConfigError(chk.errors)
    assert model is not None and initial is not None and seed is not None and stop is not None
    assert replications is not None and burn is not None
    return RunConfig(model, initial, seed, stop, replications, burn, output)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_event_csv(log: EventLog, stream: io.TextIOBase) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in log.records:
        kind = "event" if r.kind == "event" else "phantom"
        w.writerow([r.n, _fmt(r.t), _fmt(r.dt), kind, _fmt(r.x_post), _fmt(r.y_post), _fmt(r.z), _fmt(r.lambda_pre)])


def _dump_json(obj: Any, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _write_text(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _thread_count(args: argparse.Namespace) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("QUAKESIM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError([f"QUAKESIM_THREADS: expected integer, got {env!r}"]) from None
    return 1


def _load_config(args: argparse.Namespace) -> RunConfig:
    with open(args.config) as f:
        cfg = parse_config(f.read())
    if args.seed is not None:
        cfg = RunConfig(
            cfg.model, cfg.initial, args.seed, cfg.stop, cfg.replications, cfg.burn_in_fraction, cfg.output
        )
    return cfg


def _run_replicas(cfg: RunConfig, threads: int) -> list[EventLog]:
    """Simulate all replicas; replica i always uses substream(seed, i), so
    the result is independent of the thread count."""

    def one(i: int) -> EventLog:
        return simulate(cfg.model, cfg.initial, cfg.stop, substream(cfg.seed, i))

    indices = range(cfg.replications)
    if threads == 1:
        return [one(i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, indices))


def _replica_summary(log: EventLog) -> dict:
    return {
        "n_events": log.event_count,
        "n_records": len(log.records),
        "horizon": log.horizon,
        "terminated_reason": log.terminated_reason,
    }


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    threads = _thread_count(args)
    logs = _run_replicas(cfg, threads)
    out_events = args.out or cfg.output.get("events")
    buf = io.StringIO()
    _write_event_csv(logs[0], buf)
    if out_events:
        with open(out_events, "w") as f:
            f.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    summary = {
        "config": cfg.to_json_dict(),
        "replications": cfg.replications,
        "replicas": [_replica_summary(lg) for lg in logs],
    }
    out_summary = args.summary or cfg.output.get("summary")
    if out_summary:
        _dump_json(summary, out_summary)
    if any(lg.terminated_reason == "saturation" for lg in logs):
        print("warning: run terminated by intensity saturation", file=sys.stderr)
        return EXIT_SATURATION
    return EXIT_OK


def _pooled_rate_summary(cfg: RunConfig, logs: list[EventLog]) -> dict:
    stats = [analysis.estimate_rates(lg, cfg.burn_in_fraction) for lg in logs]
    body: dict[str, Any] = {
        "replications": cfg.replications,
        "per_replica": [s.as_dict() for s in stats],
    }
    rates = np.array([s.rate_hat for s in stats])
    if len(stats) > 1:
        body["pooled"] = {
            "rate_hat": float(np.mean(rates)),
            "rate_se": float(np.std(rates, ddof=1) / math.sqrt(len(stats))),
        }
    body["rate_theory"] = stats[0].rate_theory
    return body


def _cmd_rate(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    threads = _thread_count(args)
    logs = _run_replicas(cfg, threads)
    try:
        body = _pooled_rate_summary(cfg, logs)
    except analysis.InsufficientDataError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    _dump_json(body, args.out)
    if any(lg.terminated_reason == "saturation" for lg in logs):
        return EXIT_SATURATION
    return EXIT_OK


def _parse_weights(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(["--weights: expected r1,r2,r3"])
    try:
        r1, r2, r3 = (float(p) for p in parts)
    except ValueError:
        raise ConfigError([f"--weights: expected three numbers, got {text!r}"]) from None
    return r1, r2, r3


def _cmd_foster(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    r1, r2, r3 = _parse_weights(args.weights)
    try:
        config = foster.foster_params(cfg.model, r1, r2, r3, rng=substream(cfg.seed, 0))
    except (foster.WeightConstraintError, foster.FosterInfeasibleError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    report = foster.validate_foster(cfg.model, config, rng=substream(cfg.seed, 1))
    body = {
        "foster_config": {
            "r1": config.r1,
            "r2": config.r2,
            "r3": config.r3,
            "gamma": config.gamma,
            "x0": config.x0,
            "y0": config.y0,
            "v0": config.v0,
            "x1": config.x1,
            "delta": config.delta,
        },
        "report": report.as_dict(),
    }
    _dump_json(body, args.out)
    return EXIT_OK if report.passed else EXIT_VALIDATION


def default_drift_grid(config) -> list[State]:
    """Eight states outside V covering every drift case: deep stress, high
    residual at several stress levels, the far corner, and two states at or
    below the truncation threshold."""
    x0, y0, x1 = config.x0, config.y0, config.x1
    deep = min(2.0 * x1, x1 - 10.0)
    return [
        State(x0 + 5.0, 1.0),
        State(x0 + 20.0, 1.0),
        State(x0 + 5.0, y0 + 5.0),
        State(0.0, y0 + 5.0),
        State(x0 / 2.0, y0 + 5.0),
        State(-5.0, y0 + 5.0),
        State(deep, 1.0),
        State(deep, y0 + 5.0),
    ]


def _cmd_drift(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    r1, r2, r3 = _parse_weights(args.weights)
    try:
        config = foster.foster_params(cfg.model, r1, r2, r3, rng=substream(cfg.seed, 0))
    except (foster.WeightConstraintError, foster.FosterInfeasibleError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.states:
        states = []
        for part in args.states.split(";"):
            xs, ys = part.split(",")
            states.append(State(float(xs), float(ys)))
    else:
        states = default_drift_grid(config)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "n", "mean", "se", "ci99_lo", "ci99_hi", "inside_v"])
    for i, s in enumerate(states):
        est = foster.estimate_drift(cfg.model, config, s, args.n, substream(cfg.seed, 100 + i))
        w.writerow(
            [_fmt(s.x), _fmt(s.y), est.n, _fmt(est.mean), _fmt(est.se), _fmt(est.ci99_lo), _fmt(est.ci99_hi), est.inside_v]
        )
    _write_text(buf.getvalue(), args.out)
    return EXIT_OK


def _cmd_converge(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    xb, yb = (float(v) for v in args.init_b.split(","))
    grid = [float(v) for v in args.t_grid.split(",")]
    try:
        report = analysis.convergence_diagnostic(
            cfg.model,
            cfg.initial,
            State(xb, yb),
            grid,
            args.replications,
            substream(cfg.seed, 0),
        )
    except analysis.RegimeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.format == "json":
        body = {
            "replications": report.replications,
            "alpha": report.alpha,
            "cz_warning": report.cz_warning,
            "points": [
                {"t": p.t, "ks_x": p.ks_x, "ks_y": p.ks_y, "threshold": p.threshold, "below": p.below}
                for p in report.points
            ],
        }
        _dump_json(body, args.out)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "ks_x", "ks_y", "threshold", "below"])
        for p in report.points:
            w.writerow([_fmt(p.t), _fmt(p.ks_x), _fmt(p.ks_y), _fmt(p.threshold), p.below])
        _write_text(buf.getvalue(), args.out)
    return EXIT_OK


_DOMINANCE_CASES = [
    ("secondary", 1.0, 5.0),
    ("primary", 0.0, 2.0),
    ("shifted_primary", 0.0, 2.0),
]


def _cmd_dominance(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    rows = []
    for i, (family, lo, hi) in enumerate(_DOMINANCE_CASES):
        rep = analysis.dominance_test(cfg.model, family, lo, hi, args.n, substream(cfg.seed, i))
        rows.append(
            {
                "family": rep.family,
                "param_low": rep.param_low,
                "param_high": rep.param_high,
                "n": rep.n,
                "violation": rep.violation,
                "band": rep.band,
                "passed": rep.passed,
            }
        )
    _dump_json({"orderings": rows, "all_passed": all(r["passed"] for r in rows)}, args.out)
    return EXIT_OK if all(r["passed"] for r in rows) else EXIT_VALIDATION


def _cmd_lemma_l2(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    grid = [float(v) for v in args.y_grid.split(",")]
    rows = analysis.lemma_l2_check(cfg.model.alpha, grid, args.n, substream(cfg.seed, 0))
    if args.format == "json":
        _dump_json(
            {"rows": [{"y": r.y, "mc": r.mc_value, "se": r.mc_se, "exact": r.exact} for r in rows]},
            args.out,
        )
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["y", "mc", "se", "exact"])
        for r in rows:
            w.writerow([_fmt(r.y), _fmt(r.mc_value), _fmt(r.mc_se), _fmt(r.exact)])
        _write_text(buf.getvalue(), args.out)
    return EXIT_OK


def _cmd_regime(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    r = analysis.regime(cfg.model)
    body: dict[str, Any] = {
        "k_over_alpha": cfg.model.k / cfg.model.alpha,
        "regime": r.value,
    }
    if r is analysis.Regime.SUBCRITICAL:
        body["rate_theory"] = analysis.theoretical_rate(cfg.model)
    _dump_json(body, args.out)
    return EXIT_OK


def _cmd_probe(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    report = analysis.supercritical_probe(
        cfg.model, args.horizon, args.budget, substream(cfg.seed, 0), initial=cfg.initial
    )
    _dump_json(
        {
            "regime": report.regime.value,
            "quartile_rates": list(report.quartile_rates),
            "event_count": report.event_count,
            "time_covered": report.time_covered,
            "terminated_reason": report.terminated_reason,
            "explosive": report.explosive,
        },
        args.out,
    )
    return EXIT_OK


def _selftest_checks() -> list[tuple[str, bool, str]]:
    from .model import cumulative_hazard_numeric, cumulative_hazard_primary, phi_eval
    from .sampler import (
        primary_time_from_exponential,
        sample_secondary_times,
    )
    from .streams import master

    checks: list[tuple[str, bool, str]] = []

    def add(name: str, ok: bool, detail: str = "") -> None:
        checks.append((name, bool(ok), detail))

    phi = ExponentialPhi(1.0)
    add("phi exp(0) = 1", phi_eval(phi, 0.0) == 1.0)
    add("phi threshold below = 0", phi_eval(ThresholdLinearPhi(0.0, 1.0), -1.0) == 0.0)
    add("phi exp(ln 2) = 2", abs(phi_eval(phi, math.log(2.0)) - 2.0) < 1e-12)

    closed = cumulative_hazard_primary(phi, 0.0, 1.0, 1.0)
    numeric = cumulative_hazard_numeric(phi, 0.0, 1.0, 1.0)
    add("hazard closed vs quadrature", abs(closed - numeric) < 1e-9 * closed, f"{closed} vs {numeric}")
    add("hazard at t=0", cumulative_hazard_primary(phi, 0.3, 2.0, 0.0) == 0.0)

    t = primary_time_from_exponential(phi, 0.0, 1.0, math.e - 1.0)
    add("primary inversion at e-1", abs(t - 1.0) < 1e-12, f"t={t}")

    rng = master(20240)
    vals = sample_secondary_times(1.0, 1.0, rng, 200_000)
    frac = float(np.mean(np.isinf(vals)))
    se = math.sqrt(math.exp(-1.0) * (1 - math.exp(-1.0)) / 200_000)
    add("secondary atom fraction", abs(frac - math.exp(-1.0)) < 4 * se, f"{frac:.5f}")

    params = ModelParams(1.0, 0.5, 1.0, phi, ExponentialZ(2.0))
    cfg = foster.foster_params(params, 100.0, 10.0, 1.0, rng=master(77))
    add("gamma exact arithmetic", abs(cfg.gamma - 0.5 / 3.0) < 1e-15, f"gamma={cfg.gamma}")

    add("regime subcritical", analysis.regime(params) is analysis.Regime.SUBCRITICAL)
    add(
        "regime supercritical",
        analysis.regime(ModelParams(1.0, 2.0, 1.0, phi, ExponentialZ(2.0)))
        is analysis.Regime.SUPERCRITICAL,
    )

    log = simulate(params, State(0.0, 0.0), StopRule(horizon=20_000.0), master(5))
    st = analysis.estimate_rates(log)
    add(
        "rate near c/E[Z]",
        abs(st.rate_hat - 0.5) < 4 * st.rate_se,
        f"rate={st.rate_hat:.4f} se={st.rate_se:.4f}",
    )

    log_a = simulate(params, State(0.0, 0.0), StopRule(horizon=500.0), master(9))
    log_b = simulate(params, State(0.0, 0.0), StopRule(horizon=500.0), master(9))
    add("bit-identical replays", log_a.records == log_b.records)
    return checks


def _cmd_selftest(args: argparse.Namespace) -> int:
    checks = _selftest_checks()
    failed = 0
    for name, ok, detail in checks:
        line = f"{'PASS' if ok else 'FAIL'}  {name}"
        if detail and not ok:
            line += f"  ({detail})"
        print(line)
        failed += not ok
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_SELFTEST


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quakesim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, needs_config: bool = True) -> None:
        if needs_config:
            sp.add_argument("--config", required=True, help="path to JSON run configuration")
        sp.add_argument("--out", default=None, help="output path (stdout when omitted)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--threads", type=int, default=None, help="replication fan-out (default 1 or QUAKESIM_THREADS)")
        sp.add_argument("--format", choices=["csv", "json"], default="csv", help="tabular output format")

    sp = sub.add_parser("simulate", help="event log CSV plus summary JSON")
    common(sp)
    sp.add_argument("--summary", default=None, help="summary JSON path")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("rate", help="rate estimates with batch-means errors (JSON)")
    common(sp)
    sp.set_defaults(func=_cmd_rate)

    sp = sub.add_parser("foster", help="drift construction and constraint report (JSON)")
    common(sp)
    sp.add_argument("--weights", default="100,10,1", help="r1,r2,r3")
    sp.set_defaults(func=_cmd_foster)

    sp = sub.add_parser("drift", help="drift map over a state grid (CSV)")
    common(sp)
    sp.add_argument("--weights", default="100,10,1", help="r1,r2,r3")
    sp.add_argument("--n", type=int, default=100_000, help="draws per state")
    sp.add_argument("--states", default=None, help="semicolon-separated x,y pairs")
    sp.set_defaults(func=_cmd_drift)

    sp = sub.add_parser("converge", help="two-chain KS table over time (CSV)")
    common(sp)
    sp.add_argument("--init-b", default="5,10", help="second initial state x,y")
    sp.add_argument("--t-grid", default="10,50,100,200", help="comma-separated times")
    sp.add_argument("--replications", type=int, default=1000)
    sp.set_defaults(func=_cmd_converge)

    sp = sub.add_parser("dominance", help="clock stochastic-ordering checks (JSON)")
    common(sp)
    sp.add_argument("--n", type=int, default=100_000)
    sp.set_defaults(func=_cmd_dominance)

    sp = sub.add_parser("lemma-l2", help="scaled secondary-clock shrinkage table")
    common(sp)
    sp.add_argument("--y-grid", default="0.5,1,2,5,20")
    sp.add_argument("--n", type=int, default=200_000)
    sp.set_defaults(func=_cmd_lemma_l2)

    sp = sub.add_parser("regime", help="criticality classification (JSON)")
    common(sp)
    sp.set_defaults(func=_cmd_regime)

    sp = sub.add_parser("probe-supercritical", help="explosiveness probe (JSON)")
    common(sp)
    sp.add_argument("--horizon", type=float, default=50.0)
    sp.add_argument("--budget", type=int, default=200_000)
    sp.set_defaults(func=_cmd_probe)

    sp = sub.add_parser("selftest", help="run the built-in example checks")
    common(sp, needs_config=False)
    sp.set_defaults(func=_cmd_selftest)

    return p


def run_command(argv: Sequence[str]) -> int:
    """Execute a CLI invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as e:
        return EXIT_VALIDATION if e.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as e:
        for msg in e.errors:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, analysis.RegimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
