"""Per-slot achievable rates and the sum-capacity objective.

Rates are in bits/s/Hz per slot. The objective is the schedule-weighted sum
over slots of downlink and uplink rates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import GainTables, build_gain_tables
from .scenario import Scenario

LN2 = np.log(2.0)
LOG2E = 1.0 / LN2


def log2_1p(x):
    """``log2(1 + x)`` accurate for tiny ``x``."""
    return np.log1p(x) / LN2


@dataclass(frozen=True)
class Schedule:
    """Downlink/uplink user assignment.

    ``A_D`` has shape ``(K_D, N)`` and ``A_U`` shape ``(K_U, N)``; entry
    ``[k, n]`` is the share of slot ``n + 1`` given to user ``k``.
    """

    A_D: np.ndarray
    A_U: np.ndarray
    binary: bool = False

    def copy(self, **changes) -> "Schedule":
        kw = dict(A_D=self.A_D.copy(), A_U=self.A_U.copy(), binary=self.binary)
        kw.update(changes)
        return Schedule(**kw)


@dataclass(frozen=True)
class RateModel:
    """Which impairments enter the rate expressions, plus a rate prefactor.

    The full-duplex system uses the defaults. Interference-free and
    half-duplex comparisons switch impairments off so that every scheme goes
    through the same evaluation code.
    """

    cross_interference: bool = True
    self_interference: bool = True
    rate_scale: float = 1.0

    def gains(self, scenario: Scenario, trajectory) -> GainTables:
        return build_gain_tables(scenario, trajectory, cross_interference=self.cross_interference)

    def uplink_noise(self, scenario: Scenario) -> float:
        """Self-interference plus noise seen by the UAV receiver."""
        fb = scenario.self_interference_fb if self.self_interference else 0.0
        return fb + scenario.noise_power_sigma2


FULL_DUPLEX = RateModel()


@dataclass(frozen=True)
class RateBreakdown:
    """Rates and weighted objective for one (schedule, trajectory, power) point."""

    Rd: np.ndarray
    Ru: np.ndarray
    weighted_objective: float

    def per_slot(self, schedule: Schedule):
        """Schedule-weighted downlink and uplink rate per slot."""
        return (schedule.A_D * self.Rd).sum(axis=0), (schedule.A_U * self.Ru).sum(axis=0)


def downlink_interference(A_U, power, gains: GainTables, scenario: Scenario) -> np.ndarray:
    """Interference-plus-noise ``(K_D, N)`` at each downlink user."""
    return (np.asarray(A_U) * np.asarray(power)).T.dot(gains.g_bar).T + scenario.noise_power_sigma2


def downlink_rates(A_U, power, gains: GainTables, scenario: Scenario) -> np.ndarray:
    """``(K_D, N)`` matrix of downlink rates."""
    interference = downlink_interference(A_U, power, gains, scenario)
    return log2_1p(scenario.uav_tx_power_pb * gains.h_bj / interference)


def uplink_rates(power, gains: GainTables, scenario: Scenario, model: RateModel = FULL_DUPLEX) -> np.ndarray:
    """``(K_U, N)`` matrix of uplink rates."""
    return log2_1p(np.asarray(power) * gains.h_ib / model.uplink_noise(scenario))


def downlink_rate(j, n, schedule: Schedule, power, gains: GainTables, scenario: Scenario) -> float:
    """Downlink rate of user ``j`` in slot index ``n`` (0-based)."""
    A_U = np.asarray(schedule.A_U)
    p = np.asarray(power)
    interference = float(np.sum(A_U[:, n] * gains.g_bar[:, j] * p[:, n])) + scenario.noise_power_sigma2
    return float(log2_1p(scenario.uav_tx_power_pb * gains.h_bj[j, n] / interference))


def uplink_rate(i, n, power, gains: GainTables, scenario: Scenario, model: RateModel = FULL_DUPLEX) -> float:
    """Uplink rate of user ``i`` in slot index ``n`` (0-based)."""
    p = np.asarray(power)
    return float(log2_1p(p[i, n] * gains.h_ib[i, n] / model.uplink_noise(scenario)))


def objective_from_gains(schedule: Schedule, power, gains: GainTables, scenario: Scenario,
                         model: RateModel = FULL_DUPLEX) -> RateBreakdown:
    Rd = model.rate_scale * downlink_rates(schedule.A_U, power, gains, scenario)
    Ru = model.rate_scale * uplink_rates(power, gains, scenario, model)
    per_slot = (schedule.A_D * Rd).sum(axis=0) + (schedule.A_U * Ru).sum(axis=0)
    total = 0.0
    for value in per_slot.tolist():  # fixed slot-major order
        total += value
    return RateBreakdown(Rd=Rd, Ru=Ru, weighted_objective=total)


def objective(schedule: Schedule, trajectory, power, scenario: Scenario,
              model: RateModel = FULL_DUPLEX) -> tuple[float, RateBreakdown]:
    """Sum-capacity objective and its rate breakdown.

    Parameters
    ----------
    schedule : Schedule
        Relaxed or binary assignment.
    trajectory : array_like, shape (N + 1, 2)
    power : array_like, shape (K_U, N)
    scenario : Scenario
    model : RateModel, optional
        Impairment switches; defaults to the full-duplex system.
    """
    gains = model.gains(scenario, trajectory)
    breakdown = objective_from_gains(schedule, power, gains, scenario, model)
    return breakdown.weighted_objective, breakdown
