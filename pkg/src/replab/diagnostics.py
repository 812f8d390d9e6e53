"""Post-hoc verification of recorded time series.

All checks are pure functions of the series (plus configuration and the
torsion solution); rerunning them yields identical reports.  Monotonicity
is checked with a per-step slack: the continuous statements hold outside a
null set, and the explicit stepper adds O(dt^2) per step, so a discrete
check must budget that slack explicitly instead of hiding it.

The mass identity under test is the integral form

    y(t) - y(s) = int_s^t (y - 1) * E dtau

evaluated by the trapezoidal rule on the recorded times with s fixed at
the first record.  It holds for the limiting problem; at finite eps the
boundary leak and the time discretization contribute a defect of order
(dt + eps), which callers bound with a frozen constant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolution import (BLOWUP, CONVERGED, DECAYED, T_END_REACHED, SimConfig,
                        TimeSeriesRecord)
from .poisson import TorsionSolution


@dataclass(frozen=True)
class MonotoneCheck:
    passed: bool
    worst_violation: float  # worst excess over the allowed slack, >= 0


@dataclass(frozen=True)
class VerificationReport:
    """Aggregated verdicts for one recorded run.

    ``mass_monotone`` and ``energy_monotone`` are ``None`` when the check
    does not apply (initial mass above 1, where neither claim holds).
    ``energy_limit_gap`` and ``h1_limit_gap`` are populated for converged
    runs only.
    """

    energy_monotone: MonotoneCheck | None
    mass_monotone: MonotoneCheck | None
    mass_ode_residual: float
    energy_limit_gap: float | None
    h1_limit_gap: float | None
    regime: str
    notes: tuple[str, ...]


def _require_ordered(series: list[TimeSeriesRecord]) -> None:
    if not series:
        raise ValueError("series is empty")
    times = [r.t for r in series]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("record times are not strictly increasing")


def _monotone(series: list[TimeSeriesRecord], values, slack_per_step: float) -> MonotoneCheck:
    worst = 0.0
    for prev, cur, vp, vc in zip(series, series[1:], values, values[1:]):
        slack = slack_per_step * (cur.step - prev.step)
        worst = max(worst, vc - vp - slack)
    return MonotoneCheck(passed=worst <= 0.0, worst_violation=max(0.0, worst))


def check_energy_monotone(series: list[TimeSeriesRecord],
                          slack_per_step: float = 1e-8) -> MonotoneCheck:
    """Flag any recorded energy uptick beyond the per-step slack."""
    _require_ordered(series)
    return _monotone(series, [r.energy for r in series], slack_per_step)


def check_mass_monotone(series: list[TimeSeriesRecord],
                        slack_per_step: float = 1e-10) -> MonotoneCheck:
    """Flag any recorded mass uptick beyond the per-step slack."""
    _require_ordered(series)
    return _monotone(series, [r.mass for r in series], slack_per_step)


def mass_ode_residual(series: list[TimeSeriesRecord]) -> float:
    """Worst defect of the integral mass identity over the recorded series."""
    _require_ordered(series)
    if len(series) < 2:
        raise ValueError("need at least two records")
    t = np.array([r.t for r in series])
    y = np.array([r.mass for r in series])
    e = np.array([r.energy for r in series])
    integrand = (y - 1.0) * e
    cumulative = np.concatenate(
        [[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(t))])
    return float(np.max(np.abs((y - y[0]) - cumulative)))


def classify_regime(series: list[TimeSeriesRecord], cfg: SimConfig) -> str:
    """Classify a terminated run from its records alone.

    Mirrors the on-line detector: blow-up wins if the threshold was ever
    crossed, decay if the final interior excess sits under the threshold,
    convergence if the distance to the stationary state passed through a
    minimum while the energy slope was below ``settle_tol``; anything else
    is an inconclusive t_end_reached.
    """
    _require_ordered(series)
    if any(r.max_u > cfg.blowup_threshold for r in series):
        return BLOWUP
    if series[-1].max_u - cfg.eps < cfg.decay_threshold:
        return DECAYED
    prev_slope = None
    for prev, cur in zip(series, series[1:]):
        span = cur.t - prev.t
        slope_d = (cur.h1_dist - prev.h1_dist) / span
        slope_e = (cur.energy - prev.energy) / span
        if (prev_slope is not None and prev_slope < 0.0 <= slope_d
                and abs(slope_e) < cfg.settle_tol):
            return CONVERGED
        prev_slope = slope_d
    return T_END_REACHED


def energy_limit_gap(series: list[TimeSeriesRecord], ts: TorsionSolution,
                     cfg: SimConfig | None = None) -> float:
    """|final recorded energy - target energy|; converged runs only.

    When ``cfg`` is given the regime is verified and a non-converged run
    raises.
    """
    _require_ordered(series)
    if cfg is not None:
        regime = classify_regime(series, cfg)
        if regime != CONVERGED:
            raise ValueError(f"energy limit gap requires a converged run, "
                             f"got regime '{regime}'")
    return abs(series[-1].energy - ts.target_energy)


def verify_series(series: list[TimeSeriesRecord], cfg: SimConfig,
                  ts: TorsionSolution, energy_slack_per_step: float = 1e-8,
                  mass_slack_per_step: float = 1e-10) -> VerificationReport:
    """Run every applicable check on a recorded series."""
    _require_ordered(series)
    notes: list[str] = []
    regime = classify_regime(series, cfg)

    initial_mass = series[0].mass
    mass_at_most_one = initial_mass <= 1.0 + 1e-9
    energy_check = mass_check = None
    if mass_at_most_one:
        energy_check = check_energy_monotone(series, energy_slack_per_step)
        mass_check = check_mass_monotone(series, mass_slack_per_step)
    else:
        notes.append(f"initial mass {initial_mass:.6g} exceeds 1: "
                     "monotonicity checks not applicable")

    residual = mass_ode_residual(series) if len(series) >= 2 else 0.0
    capped = sum(1 for r in series if r.cap_active)
    if capped:
        notes.append(f"nonlocal rate cap active on {capped} of "
                     f"{len(series)} records")

    gap = h1_gap = None
    if regime == CONVERGED:
        gap = energy_limit_gap(series, ts)
        h1_gap = series[-1].h1_dist

    return VerificationReport(
        energy_monotone=energy_check,
        mass_monotone=mass_check,
        mass_ode_residual=residual,
        energy_limit_gap=gap,
        h1_limit_gap=h1_gap,
        regime=regime,
        notes=tuple(notes),
    )
