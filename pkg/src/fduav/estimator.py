"""scikit-learn style wrapper around the alternating optimizer.

``fit`` takes a :class:`~fduav.scenario.Scenario` (or a scenario file path
or a mapping of scenario keys) in place of a data matrix. Hyperparameters
are the solver settings, so ``get_params``/``set_params``/``clone`` work as
for any estimator.
"""
from __future__ import annotations

from dataclasses import fields

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .baselines import SchemeId, model_for, run_scheme
from .rates import objective
from .scenario import FEAS_TOL, Scenario, ScenarioError, load_scenario, scenario_from_mapping
from .subproblems import ScaSettings, check_trajectory


def check_scenario(X) -> Scenario:
    """Coerce ``X`` into a validated scenario."""
    if isinstance(X, Scenario):
        return X
    if isinstance(X, dict):
        return scenario_from_mapping(X)
    if isinstance(X, (str, bytes)) or hasattr(X, "__fspath__"):
        return load_scenario(X)
    raise TypeError(f"expected a Scenario, mapping or path, got {type(X).__name__}")


def check_schedule(A, n_users: int, n_slots: int, binary: bool = False, tol: float = FEAS_TOL) -> np.ndarray:
    """Validate a ``(n_users, n_slots)`` assignment matrix."""
    A = np.asarray(A, dtype=float)
    if A.shape != (n_users, n_slots):
        raise ValueError(f"schedule must have shape {(n_users, n_slots)}, got {A.shape}")
    if binary:
        if not np.all((A == 0) | (A == 1)):
            raise ValueError("binary schedule must contain only 0 and 1")
        if np.any(A.sum(axis=0) > 1):
            raise ValueError("at most one user may be scheduled per slot")
    else:
        if np.any(A < -tol) or np.any(A > 1 + tol):
            raise ValueError("relaxed schedule entries must lie in [0, 1]")
        if np.any(A.sum(axis=0) > 1 + tol):
            raise ValueError("per-slot schedule sums must not exceed 1")
    return A


def check_power(P, scenario: Scenario) -> np.ndarray:
    """Validate a ``(K_U, N)`` uplink power matrix."""
    P = np.asarray(P, dtype=float)
    if P.shape != (scenario.K_U, scenario.N):
        raise ValueError(f"power must have shape {(scenario.K_U, scenario.N)}, got {P.shape}")
    if np.any(P < 0) or np.any(P > scenario.max_uplink_power_Pmax):
        raise ValueError("uplink powers must lie in [0, P_max]")
    return P


class FullDuplexUAVOptimizer(BaseEstimator):
    """Joint scheduling, trajectory and power optimizer for a full-duplex UAV.

    Parameters
    ----------
    scheme : str, default="proposed"
        One of the :class:`~fduav.baselines.SchemeId` values.
    tolerance : float or None, default=None
        Relative outer-loop stopping threshold; ``None`` uses the
        scenario's ``tolerance_eps``.
    max_outer_iters, max_iters_uplink, max_iters_trajectory, max_iters_power : int
        Iteration caps of the outer loop and of the three SCA blocks.
    inner_tol : float, default=1e-4
        Relative improvement below which an SCA block stops.
    trajectory_solver : {"barrier", "projected_gradient"}, default="barrier"

    Attributes
    ----------
    solution_ : Solution
    trajectory_ : ndarray of shape (N + 1, 2)
    schedule_ : Schedule
        Binary downlink/uplink assignment.
    power_ : ndarray of shape (K_U, N)
    objective_ : float
        Final objective with the binary schedule (bits/s/Hz summed over slots).
    n_iter_ : int
    """

    def __init__(self, scheme="proposed", tolerance=None, max_outer_iters=100, max_iters_uplink=20,
                 max_iters_trajectory=20, max_iters_power=20, inner_tol=1e-4,
                 trajectory_solver="barrier"):
        self.scheme = scheme
        self.tolerance = tolerance
        self.max_outer_iters = max_outer_iters
        self.max_iters_uplink = max_iters_uplink
        self.max_iters_trajectory = max_iters_trajectory
        self.max_iters_power = max_iters_power
        self.inner_tol = inner_tol
        self.trajectory_solver = trajectory_solver

    def _settings(self) -> ScaSettings:
        names = {f.name for f in fields(ScaSettings)}
        return ScaSettings(**{k: v for k, v in self.get_params().items() if k in names})

    def fit(self, X, y=None):
        """Optimize the scenario ``X``; ``y`` is ignored."""
        scenario = check_scenario(X)
        scheme = SchemeId.parse(self.scheme)
        if self.tolerance is not None:
            if not self.tolerance > 0:
                raise ValueError("tolerance must be positive")
            scenario = scenario.replace(tolerance_eps=self.tolerance)
        solution = run_scheme(scheme, scenario, self._settings())
        self.scenario_ = scenario
        self.solution_ = solution
        self.trajectory_ = solution.trajectory
        self.schedule_ = solution.schedule
        self.power_ = solution.power
        self.objective_ = solution.final_binary_objective
        self.n_iter_ = solution.iterations_used
        return self

    def predict(self, X=None):
        """Per-slot rate breakdown of the fitted plan on scenario ``X``
        (defaults to the fitted scenario)."""
        check_is_fitted(self, "solution_")
        scenario = self.scenario_ if X is None else check_scenario(X)
        self._check_compatible(scenario)
        _, breakdown = objective(self.schedule_, self.trajectory_, self.power_, scenario,
                                 model_for(self.scheme))
        return breakdown

    def score(self, X=None, y=None) -> float:
        """Objective of the fitted plan evaluated on scenario ``X``."""
        return self.predict(X).weighted_objective

    def _check_compatible(self, scenario: Scenario):
        if (scenario.N, scenario.K_D, scenario.K_U) != (self.scenario_.N, self.scenario_.K_D, self.scenario_.K_U):
            raise ScenarioError("scenario dimensions differ from the fitted one")
        if SchemeId.parse(self.scheme) is not SchemeId.STATIC:
            check_trajectory(self.trajectory_, scenario)
