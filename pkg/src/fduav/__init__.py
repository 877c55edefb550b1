"""Sum-capacity optimization for a full-duplex UAV base station.

Alternates downlink scheduling, uplink scheduling, trajectory and uplink
power updates, with comparison schemes and sweep tooling on top.
"""
from .baselines import SchemeId, run_scheme
from .bcd import Solution, initialize, round_schedule, run, straight_line
from .channel import GainTables, build_gain_tables, cross_gain, los_gain
from .estimator import FullDuplexUAVOptimizer
from .rates import RateBreakdown, RateModel, Schedule, downlink_rate, objective, uplink_rate
from .scenario import (
    Scenario,
    ScenarioError,
    db_to_linear,
    dbm_to_watts,
    linear_to_db,
    load_scenario,
    reference_scenario,
)
from .subproblems import InfeasibleTrajectoryError, ScaSettings

__version__ = "0.1.0"

__all__ = [
    "FullDuplexUAVOptimizer", "GainTables", "InfeasibleTrajectoryError", "RateBreakdown",
    "RateModel", "ScaSettings", "Scenario", "ScenarioError", "Schedule", "SchemeId", "Solution",
    "build_gain_tables", "cross_gain", "db_to_linear", "dbm_to_watts", "downlink_rate",
    "initialize", "linear_to_db", "load_scenario", "los_gain", "objective",
    "reference_scenario", "round_schedule", "run", "run_scheme", "straight_line", "uplink_rate",
]
