"""Numerical verification of the model's stationary-regime identities.

In the subcritical regime (k/alpha < 1) the process has a unique stationary
law with three testable identities for the event rate:

    rate            = c / E[Z]                 (stress balance)
    E[Y]            = rate * k / alpha         (aftershock share)
    rate            = rate_primary + E[Y]      (component balance)

`estimate_rates` measures all three from a single long trajectory with
batch-means errors.  The remaining operations probe the qualitative theory:
stochastic orderings of the clocks, the scaled shrinkage limit of the
secondary clock, two-chain convergence as a total-variation surrogate, and
the degeneracy of the critical and supercritical regimes.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .chain import EventLog, StopRule, simulate, state_at, window_integrals
from .foster import (  # noqa: F401  (drift analysis lives in its own module)
    ConstraintReport,
    estimate_drift,
    foster_params,
    return_times,
    validate_foster,
)
from .foster_config import FosterConfig  # noqa: F401
from .model import ModelParams, State, z_cz_metadata, z_mean
from .sampler import sample_primary_times, sample_secondary_times
from .stats import batch_se, ks_critical_value, ks_two_sample, one_sided_band

__all__ = [
    "Regime",
    "RegimeError",
    "InsufficientDataError",
    "regime",
    "theoretical_rate",
    "SummaryStats",
    "estimate_rates",
    "ConvergencePoint",
    "ConvergenceReport",
    "convergence_diagnostic",
    "DominanceReport",
    "dominance_test",
    "LemmaRow",
    "lemma_l2_check",
    "GrowthReport",
    "supercritical_probe",
]

_CRITICAL_EPS = 1e-12


class Regime(enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


class RegimeError(ValueError):
    """Raised when an operation requires a regime the parameters are not in."""


class InsufficientDataError(ValueError):
    """Raised when a log carries too little data for the requested estimate."""


def regime(params: ModelParams, eps: float = _CRITICAL_EPS) -> Regime:
    """Classify k/alpha against 1 with tolerance eps."""
    ratio = params.k / params.alpha
    if ratio < 1.0 - eps:
        return Regime.SUBCRITICAL
    if abs(ratio - 1.0) <= eps:
        return Regime.CRITICAL
    return Regime.SUPERCRITICAL


def theoretical_rate(params: ModelParams) -> float:
    """Stationary event rate c/E[Z]; defined only in the subcritical regime."""
    r = regime(params)
    if r is Regime.CRITICAL:
        raise RegimeError(
            "k/alpha = 1: the only point process with finite average intensity "
            "is the empty one, so no stationary rate exists"
        )
    if r is Regime.SUPERCRITICAL:
        raise RegimeError(
            f"k/alpha = {params.k / params.alpha:.6g} > 1: no finite-rate "
            "stationary regime exists"
        )
    return params.c / z_mean(params.z)


@dataclass(frozen=True)
class SummaryStats:
    """Rate estimates from one trajectory with batch-means errors.

    `mean_y_hat` and `lambda2_hat` are the same number (the time average of
    Y estimates both E[Y] and the aftershock component of the rate); both
    names are kept because both identities are of interest.
    """

    rate_hat: float
    rate_se: float
    rate_theory: Optional[float]
    mean_y_hat: float
    mean_y_se: float
    lambda1_hat: float
    lambda1_se: float
    lambda2_hat: float
    lambda2_se: float
    regime: Regime
    n_events: int
    horizon_effective: float
    burn_in_fraction: float
    batches: int
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {
            "rate_hat": self.rate_hat,
            "rate_se": self.rate_se,
            "rate_theory": self.rate_theory,
            "mean_y_hat": self.mean_y_hat,
            "mean_y_se": self.mean_y_se,
            "lambda1_hat": self.lambda1_hat,
            "lambda1_se": self.lambda1_se,
            "lambda2_hat": self.lambda2_hat,
            "lambda2_se": self.lambda2_se,
            "regime": self.regime.value,
            "n_events": self.n_events,
            "horizon_effective": self.horizon_effective,
            "burn_in_fraction": self.burn_in_fraction,
            "batches": self.batches,
            "diagnostics": dict(self.diagnostics),
        }
        return d


def estimate_rates(
    log: EventLog,
    burn_in_fraction: float = 0.1,
    batches: int = 20,
) -> SummaryStats:
    """Estimate the event rate and its two components from a trajectory.

    The first `burn_in_fraction` of the horizon is discarded (the theory is
    about the stationary regime; the transient biases finite runs), the
    rest is split into equal-length batches, and standard errors come from
    the batch scatter.  The balance residual rate - lambda1 - lambda2 and
    its standard error are reported in `diagnostics`.
    """
    if not 0.0 <= burn_in_fraction < 1.0:
        raise ValueError("burn_in_fraction must be in [0, 1)")
    if batches < 2:
        raise ValueError("need at least 2 batches")
    if log.horizon <= 0 or not log.records:
        raise InsufficientDataError("insufficient data: empty log")
    if burn_in_fraction == 0.0:
        warnings.warn(
            "burn-in disabled: estimates include the initial transient",
            stacklevel=2,
        )
    t_burn = burn_in_fraction * log.horizon
    span = log.horizon - t_burn
    edges = np.linspace(t_burn, log.horizon, batches + 1)
    counts = np.empty(batches)
    int_y = np.empty(batches)
    int_phi = np.empty(batches)
    for i in range(batches):
        n_i, y_i, p_i = window_integrals(log, float(edges[i]), float(edges[i + 1]))
        counts[i], int_y[i], int_phi[i] = n_i, y_i, p_i
    n_events = int(np.sum(counts))
    if n_events == 0:
        raise InsufficientDataError("insufficient data: no events after burn-in")
    width = span / batches
    rates = counts / width
    l2 = int_y / width
    l1 = int_phi / width

    reg = regime(log.params)
    theory = (
        log.params.c / z_mean(log.params.z) if reg is Regime.SUBCRITICAL else None
    )
    rate_hat = n_events / span
    l1_hat = float(np.sum(int_phi)) / span
    l2_hat = float(np.sum(int_y)) / span
    resid = rates - l1 - l2
    diagnostics = {
        "balance_residual": rate_hat - l1_hat - l2_hat,
        "balance_residual_se": batch_se(resid),
        "y_share": l2_hat / rate_hat,
        "terminated_reason": log.terminated_reason,
    }
    return SummaryStats(
        rate_hat=rate_hat,
        rate_se=batch_se(rates),
        rate_theory=theory,
        mean_y_hat=l2_hat,
        mean_y_se=batch_se(l2),
        lambda1_hat=l1_hat,
        lambda1_se=batch_se(l1),
        lambda2_hat=l2_hat,
        lambda2_se=batch_se(l2),
        regime=reg,
        n_events=n_events,
        horizon_effective=span,
        burn_in_fraction=burn_in_fraction,
        batches=batches,
        diagnostics=diagnostics,
    )


@dataclass(frozen=True)
class ConvergencePoint:
    t: float
    ks_x: float
    ks_y: float
    threshold: float

    @property
    def below(self) -> bool:
        return self.ks_x <= self.threshold and self.ks_y <= self.threshold


@dataclass(frozen=True)
class ConvergenceReport:
    points: tuple[ConvergencePoint, ...]
    replications: int
    alpha: float
    cz_warning: bool

    def at(self, t: float) -> ConvergencePoint:
        for p in self.points:
            if p.t == t:
                return p
        raise KeyError(t)


def convergence_diagnostic(
    params: ModelParams,
    init_a: State,
    init_b: State,
    t_grid: Sequence[float],
    replications: int,
    rng: np.random.Generator,
    alpha: float = 0.01,
) -> ConvergenceReport:
    """Two-chain convergence check: KS distance per coordinate over time.

    Runs `replications` independent natural trajectories from each initial
    state, reconstructs (X(t), Y(t)) at each grid time, and compares the
    two per-coordinate samples with the two-sample KS distance against the
    level-alpha critical value.  Small distances at late times are the
    observable footprint of convergence to a common stationary law.
    """
    if regime(params) is not Regime.SUBCRITICAL:
        raise RegimeError("convergence diagnostic requires the subcritical regime")
    cz_missing = z_cz_metadata(params.z) is None
    if cz_missing:
        warnings.warn(
            "stress-drop law has no absolutely continuous component; ergodic "
            "convergence is not guaranteed for this configuration",
            stacklevel=2,
        )
    grid = sorted(float(t) for t in t_grid)
    if not grid or grid[0] < 0:
        raise ValueError("t_grid must be non-empty with non-negative times")
    t_max = grid[-1]
    stop = StopRule(horizon=t_max if t_max > 0 else 1.0)
    children = rng.spawn(2 * replications)
    samples = {}
    for label, init, chunk in (
        ("a", init_a, children[:replications]),
        ("b", init_b, children[replications:]),
    ):
        xs = np.empty((replications, len(grid)))
        ys = np.empty((replications, len(grid)))
        for i, child in enumerate(chunk):
            log = simulate(params, init, stop, child)
            for j, t in enumerate(grid):
                s = state_at(log, min(t, log.horizon))
                xs[i, j] = s.x
                ys[i, j] = s.y
        samples[label] = (xs, ys)
    thr = ks_critical_value(replications, replications, alpha)
    points = []
    for j, t in enumerate(grid):
        ks_x = ks_two_sample(samples["a"][0][:, j], samples["b"][0][:, j])
        ks_y = ks_two_sample(samples["a"][1][:, j], samples["b"][1][:, j])
        points.append(ConvergencePoint(t, ks_x, ks_y, thr))
    return ConvergenceReport(tuple(points), replications, alpha, cz_missing)


@dataclass(frozen=True)
class DominanceReport:
    family: str
    param_low: float
    param_high: float
    n: int
    violation: float
    band: float

    @property
    def passed(self) -> bool:
        return self.violation <= self.band


_DOMINANCE_FAMILIES = ("secondary", "primary", "shifted_primary")


def dominance_test(
    params: ModelParams,
    family: str,
    param_low: float,
    param_high: float,
    n: int,
    rng: np.random.Generator,
    alpha: float = 0.01,
) -> DominanceReport:
    """One-sided empirical check of the clock orderings.

    family="secondary":       wait T2(y) shrinks stochastically as y grows
    family="primary":         wait T1(x) shrinks stochastically as x grows
    family="shifted_primary": the post-wait stress ramp x + c*T1(x) grows
                              stochastically with x

    The report carries the largest CDF-ordering violation and the
    level-alpha one-sided band it must stay under.
    """
    if family not in _DOMINANCE_FAMILIES:
        raise ValueError(f"family must be one of {_DOMINANCE_FAMILIES}, got {family!r}")
    if not param_low < param_high:
        raise ValueError("need param_low < param_high")
    from .stats import dominance_violation

    if family == "secondary":
        hi = sample_secondary_times(param_low, params.alpha, rng, n)
        lo = sample_secondary_times(param_high, params.alpha, rng, n)
        violation = dominance_violation(hi, lo)
    elif family == "primary":
        hi = sample_primary_times(params.phi, param_low, params.c, rng, n)
        lo = sample_primary_times(params.phi, param_high, params.c, rng, n)
        violation = dominance_violation(hi, lo)
    else:
        low_shift = param_low + params.c * sample_primary_times(params.phi, param_low, params.c, rng, n)
        high_shift = param_high + params.c * sample_primary_times(params.phi, param_high, params.c, rng, n)
        violation = dominance_violation(high_shift, low_shift)
    return DominanceReport(family, param_low, param_high, n, violation, one_sided_band(n, n, alpha))


@dataclass(frozen=True)
class LemmaRow:
    y: float
    mc_value: float
    mc_se: float
    exact: float


def lemma_l2_check(
    alpha: float,
    y_grid: Sequence[float],
    n: int,
    rng: np.random.Generator,
) -> list[LemmaRow]:
    """Monte Carlo table of the scaled secondary-clock shrinkage.

    For each y, estimates y*E[1 - exp(-alpha*T2(y))] from n draws and pairs
    it with the closed form alpha*(1 - exp(-y/alpha)); the never-fires atom
    contributes its full weight y.  The exact value approaches alpha as y
    grows, which is the limit the drift construction leans on.
    """
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    rows = []
    for y in y_grid:
        if y < 0:
            raise ValueError("y must be >= 0")
        if y == 0:
            rows.append(LemmaRow(0.0, 0.0, 0.0, 0.0))
            continue
        t = sample_secondary_times(float(y), alpha, rng, n)
        vals = y * -np.expm1(-alpha * t)
        mc = float(np.mean(vals))
        se = float(np.std(vals, ddof=1) / math.sqrt(n))
        exact = alpha * -math.expm1(-y / alpha)
        rows.append(LemmaRow(float(y), mc, se, exact))
    return rows


@dataclass(frozen=True)
class GrowthReport:
    """Per-quartile event rates of a single run, with an explosiveness flag:
    strictly increasing rates across the quartiles, or a saturated
    intensity, mark the run as explosive."""

    regime: Regime
    quartile_rates: tuple[float, float, float, float]
    event_count: int
    time_covered: float
    terminated_reason: str

    @property
    def explosive(self) -> bool:
        if self.terminated_reason == "saturation":
            return True
        r = self.quartile_rates
        return r[0] < r[1] < r[2] < r[3]


def supercritical_probe(
    params: ModelParams,
    horizon: float,
    budget: int,
    rng: np.random.Generator,
    initial: State = State(0.0, 0.0),
) -> GrowthReport:
    """Run up to the horizon or the event budget and report rate growth.

    Intended for critical and supercritical parameters, where the theory
    predicts either extinction or explosion; for subcritical input the
    report is purely informational.
    """
    log = simulate(params, initial, StopRule(max_events=budget, horizon=horizon), rng)
    t_end = log.horizon if log.horizon > 0 else (log.records[-1].t if log.records else 0.0)
    times = log.event_times
    if t_end <= 0:
        rates = (0.0, 0.0, 0.0, 0.0)
    else:
        edges = np.linspace(0.0, t_end, 5)
        counts = np.diff(np.searchsorted(times, edges, side="right"))
        rates = tuple(float(c) / (t_end / 4.0) for c in counts)
    return GrowthReport(
        regime=regime(params),
        quartile_rates=rates,  # type: ignore[arg-type]
        event_count=len(times),
        time_covered=t_end,
        terminated_reason=log.terminated_reason,
    )
