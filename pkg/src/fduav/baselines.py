"""Comparison schemes run through the same alternating-optimization driver.

Each scheme differs from the proposed design only by which blocks are
optimized and which impairments the rate model keeps:

=====================  ==========================================================
scheme                 difference
=====================  ==========================================================
proposed               none
ideal                  uplink-to-downlink interference removed (optimized and scored)
no_power_control       uplink powers pinned at ``P_max``
straight               trajectory pinned to the constant-speed line
static                 UAV hovers at the users' centroid for the whole period
half_duplex            no cross interference, no self-interference, rates halved
=====================  ==========================================================
"""
from __future__ import annotations

import enum

import numpy as np

from . import bcd
from .rates import FULL_DUPLEX, RateModel
from .scenario import Scenario
from .subproblems import ScaSettings

IDEAL_MODEL = RateModel(cross_interference=False)
HALF_DUPLEX_MODEL = RateModel(cross_interference=False, self_interference=False, rate_scale=0.5)


class SchemeId(str, enum.Enum):
    PROPOSED = "proposed"
    IDEAL_NO_INTERFERENCE = "ideal"
    NO_POWER_CONTROL = "no_power_control"
    STRAIGHT_FLIGHT = "straight"
    STATIC = "static"
    HALF_DUPLEX = "half_duplex"

    @classmethod
    def parse(cls, text: str) -> "SchemeId":
        key = text.strip().lower().replace("-", "_")
        aliases = {"hd": "half_duplex", "ideal_no_interference": "ideal", "npc": "no_power_control",
                   "straight_flight": "straight", "no_pc": "no_power_control"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown scheme {text!r} (expected one of: {names})") from None


def static_position(scenario: Scenario) -> np.ndarray:
    """Horizontal point minimizing the summed squared distance to all users,
    i.e. their centroid."""
    users = np.vstack([scenario.downlink_users, scenario.uplink_users])
    return users.mean(axis=0)


def run_proposed(scenario: Scenario, settings: ScaSettings = ScaSettings()) -> bcd.Solution:
    return bcd.run(scenario, settings, scheme=SchemeId.PROPOSED.value)


def run_ideal_no_interference(scenario: Scenario, settings: ScaSettings = ScaSettings()) -> bcd.Solution:
    """Full optimization with the uplink-to-downlink interference switched off."""
    return bcd.run(scenario, settings, model=IDEAL_MODEL, scheme=SchemeId.IDEAL_NO_INTERFERENCE.value)


def run_no_power_control(scenario: Scenario, settings: ScaSettings = ScaSettings()) -> bcd.Solution:
    """Uplink users always transmit at ``P_max``."""
    return bcd.run(scenario, settings, update_power=False, scheme=SchemeId.NO_POWER_CONTROL.value)


def run_straight_flight(scenario: Scenario, settings: ScaSettings = ScaSettings()) -> bcd.Solution:
    """Constant-speed straight flight; schedules and powers still optimized."""
    return bcd.run(scenario, settings, trajectory=bcd.straight_line(scenario), update_trajectory=False,
                   scheme=SchemeId.STRAIGHT_FLIGHT.value)


def run_static(scenario: Scenario, settings: ScaSettings = ScaSettings()) -> bcd.Solution:
    """Hover at the centroid of all users (endpoint constraints do not apply)."""
    hover = np.tile(static_position(scenario), (scenario.N + 1, 1))
    return bcd.run(scenario, settings, trajectory=hover, update_trajectory=False,
                   scheme=SchemeId.STATIC.value)


def run_half_duplex(scenario: Scenario, settings: ScaSettings = ScaSettings()) -> bcd.Solution:
    """Each slot split into equal downlink and uplink halves.

    Without simultaneous transmission there is neither cross interference nor
    self-interference; the power block would return ``P_max`` everywhere so
    it is skipped.
    """
    return bcd.run(scenario, settings, model=HALF_DUPLEX_MODEL, update_power=False,
                   scheme=SchemeId.HALF_DUPLEX.value)


RUNNERS = {
    SchemeId.PROPOSED: run_proposed,
    SchemeId.IDEAL_NO_INTERFERENCE: run_ideal_no_interference,
    SchemeId.NO_POWER_CONTROL: run_no_power_control,
    SchemeId.STRAIGHT_FLIGHT: run_straight_flight,
    SchemeId.STATIC: run_static,
    SchemeId.HALF_DUPLEX: run_half_duplex,
}

MODELS = {
    SchemeId.IDEAL_NO_INTERFERENCE: IDEAL_MODEL,
    SchemeId.HALF_DUPLEX: HALF_DUPLEX_MODEL,
}


def model_for(scheme) -> RateModel:
    """Rate model a scheme is scored with."""
    return MODELS.get(SchemeId.parse(scheme) if isinstance(scheme, str) else scheme, FULL_DUPLEX)


def run_scheme(scheme, scenario: Scenario, settings: ScaSettings = ScaSettings()) -> bcd.Solution:
    scheme = SchemeId.parse(scheme) if isinstance(scheme, str) else scheme
    return RUNNERS[scheme](scenario, settings)
