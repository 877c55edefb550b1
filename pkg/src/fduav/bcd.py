"""Alternating (block coordinate) optimization driver and binary rounding."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .rates import FULL_DUPLEX, RateBreakdown, RateModel, Schedule, objective_from_gains
from .scenario import Scenario
from .subproblems import (
    ScaSettings,
    solve_p1_downlink_schedule,
    solve_p2_uplink_schedule,
    solve_p3_trajectory,
    solve_p4_power,
)

logger = logging.getLogger(__name__)


@dataclass
class Solution:
    """Result of one alternating-optimization run."""

    schedule: Schedule
    relaxed_schedule: Schedule
    trajectory: np.ndarray
    power: np.ndarray
    objective_trace: list
    final_relaxed_objective: float
    final_binary_objective: float
    iterations_used: int
    rate_breakdown: RateBreakdown
    initial_objective: float = 0.0
    scheme: str = "proposed"
    extras: dict = field(default_factory=dict)


def straight_line(scenario: Scenario) -> np.ndarray:
    """Constant-speed waypoints from ``q_initial`` to ``q_final``."""
    s = np.linspace(0.0, 1.0, scenario.N + 1)[:, None]
    q = scenario.q_initial[None, :] * (1.0 - s) + scenario.q_final[None, :] * s
    q[0], q[-1] = scenario.q_initial, scenario.q_final
    return q


def initialize(scenario: Scenario):
    """Starting point: uniform relaxed schedules, straight flight, full power.

    Returns
    -------
    schedule : Schedule
    trajectory : ndarray, shape (N + 1, 2)
    power : ndarray, shape (K_U, N)
    """
    N = scenario.N
    schedule = Schedule(
        A_D=np.full((scenario.K_D, N), 1.0 / scenario.K_D),
        A_U=np.full((scenario.K_U, N), 1.0 / scenario.K_U),
    )
    power = np.full((scenario.K_U, N), scenario.max_uplink_power_Pmax)
    return schedule, straight_line(scenario), power


def round_schedule(relaxed: Schedule) -> Schedule:
    """Threshold a relaxed schedule at 0.5.

    If two entries of one slot are both exactly 0.5 only the lower index is
    kept, so at most one user per direction is active per slot.
    """
    def _round(x):
        x = np.asarray(x, dtype=float)
        out = (x >= 0.5).astype(float)
        for n in np.flatnonzero(out.sum(axis=0) > 1):
            first = np.flatnonzero(out[:, n])[0]
            out[:, n] = 0.0
            out[first, n] = 1.0
        return out

    return Schedule(A_D=_round(relaxed.A_D), A_U=_round(relaxed.A_U), binary=True)


def run(scenario: Scenario, settings: ScaSettings = ScaSettings(), *,
        model: RateModel = FULL_DUPLEX,
        trajectory=None,
        update_trajectory: bool = True,
        update_power: bool = True,
        tolerance: float | None = None,
        scheme: str = "proposed") -> Solution:
    """Alternate the four block updates until the relative gain drops below
    ``tolerance`` (default ``scenario.tolerance_eps``).

    Parameters
    ----------
    trajectory : array_like, optional
        Starting (or, with ``update_trajectory=False``, fixed) waypoints;
        defaults to straight flight.
    update_trajectory, update_power : bool
        Switch off the trajectory / power blocks for the comparison schemes.
    """
    eps = scenario.tolerance_eps if tolerance is None else tolerance
    schedule, q, power = initialize(scenario)
    if trajectory is not None:
        q = np.array(trajectory, dtype=float)
    gains = model.gains(scenario, q)
    previous = objective_from_gains(schedule, power, gains, scenario, model).weighted_objective
    initial = previous
    trace = []
    for it in range(settings.max_outer_iters):
        schedule = solve_p1_downlink_schedule(scenario, gains, schedule, power, model)
        schedule = solve_p2_uplink_schedule(scenario, gains, schedule, power, settings, model)
        if update_trajectory:
            q = solve_p3_trajectory(scenario, schedule, power, q, settings, model)
            gains = model.gains(scenario, q)
        if update_power:
            power = solve_p4_power(scenario, gains, schedule, power, settings, model)
        current = objective_from_gains(schedule, power, gains, scenario, model).weighted_objective
        trace.append(current)
        logger.debug("outer pass %d: objective %.9g", it + 1, current)
        if previous > 0 and (current - previous) / previous < eps:
            break
        previous = current

    relaxed = objective_from_gains(schedule, power, gains, scenario, model)
    binary = round_schedule(schedule)
    rounded = objective_from_gains(binary, power, gains, scenario, model)
    return Solution(
        schedule=binary,
        relaxed_schedule=schedule,
        trajectory=q,
        power=power,
        objective_trace=trace,
        final_relaxed_objective=relaxed.weighted_objective,
        final_binary_objective=rounded.weighted_objective,
        iterations_used=len(trace),
        rate_breakdown=rounded,
        initial_objective=initial,
        scheme=scheme,
    )
