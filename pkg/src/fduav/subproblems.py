"""The four block updates of the alternating optimization.

Each ``solve_*`` function updates one variable block while the others stay
fixed:

* downlink scheduling: a per-slot linear program solved by argmax,
* uplink scheduling: successive linearization of the (convex) downlink
  rates in the uplink schedule, each linearization again a per-slot LP,
* trajectory: successive concave quadratic minorants in the waypoints,
  maximized by projected gradient ascent onto the speed-limit chain,
* uplink power: successive linearization of the downlink rates in the
  uplink powers; each surrogate decouples into scalar problems with a
  closed-form maximizer.

Every SCA update is accepted only if the true objective does not drop.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .chain import barrier_solve, max_violation, projected_gradient
from .channel import GainTables
from .rates import (
    FULL_DUPLEX,
    LN2,
    LOG2E,
    RateModel,
    Schedule,
    downlink_interference,
    downlink_rates,
    log2_1p,
    objective_from_gains,
    uplink_rates,
)
from .scenario import FEAS_TOL, Scenario


class InfeasibleTrajectoryError(ValueError):
    """A trajectory violates its endpoint or speed constraints."""


@dataclass(frozen=True)
class ScaSettings:
    """Iteration limits and tolerances for the block updates.

    ``trajectory_solver`` picks the inner solver of the trajectory block:
    ``"barrier"`` (log-barrier Newton) or ``"projected_gradient"``
    (projected gradient with Dykstra projections, configured by the ``pg_*``
    and ``dykstra_sweeps`` fields). ``pg_initial_step`` caps the trial move of
    any waypoint (meters); ``None`` means ``vmax * delta``.
    """

    max_iters_uplink: int = 20
    max_iters_trajectory: int = 20
    max_iters_power: int = 20
    inner_tol: float = 1e-4
    pg_max_steps: int = 500
    pg_initial_step: float | None = None
    pg_backtrack: float = 0.5
    pg_armijo: float = 1e-4
    dykstra_sweeps: int = 200
    pg_tol: float = 1e-6
    max_outer_iters: int = 100
    exact_vertex_check: bool = True
    trajectory_solver: str = "barrier"
    barrier_gap: float = 1e-12

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in ("pg_initial_step", "exact_vertex_check", "trajectory_solver") or v is None:
                continue
            if not v > 0:
                raise ValueError(f"{f.name} must be positive, got {v}")
        for name in ("inner_tol", "pg_backtrack", "pg_armijo", "pg_tol"):
            if not getattr(self, name) < 1:
                raise ValueError(f"{name} must be < 1")
        if self.trajectory_solver not in ("barrier", "projected_gradient"):
            raise ValueError(f"unknown trajectory_solver {self.trajectory_solver!r}")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ScaSettings":
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise ValueError(f"unknown settings: {sorted(unknown)}")
        return cls(**mapping)


def _true_objective(schedule, power, gains, scenario, model) -> float:
    return objective_from_gains(schedule, power, gains, scenario, model).weighted_objective


def _safe_floor(value, sigma2):
    # interference-plus-noise is analytically >= sigma2
    return np.where(value < sigma2 / 10.0, sigma2, value)


# ---------------------------------------------------------------------------
# stage 1: downlink scheduling

def solve_p1_downlink_schedule(scenario: Scenario, gains: GainTables, schedule_in: Schedule, power,
                               model: RateModel = FULL_DUPLEX) -> Schedule:
    """Assign every slot to its best downlink user.

    The objective is linear in the downlink schedule and every per-slot
    feasible set is a simplex with slack, so a vertex is optimal; rates are
    nonnegative, hence a user is always scheduled.
    """
    Rd = downlink_rates(schedule_in.A_U, power, gains, scenario)
    best = np.argmax(Rd, axis=0)  # first index wins ties
    A_D = np.zeros_like(Rd)
    A_D[best, np.arange(Rd.shape[1])] = 1.0
    return Schedule(A_D=A_D, A_U=np.array(schedule_in.A_U, dtype=float), binary=False)


# ---------------------------------------------------------------------------
# stage 2: uplink scheduling

def p2_downlink_lb(j, n, candidate_xu, expansion_xu_r, power, gains: GainTables, scenario: Scenario) -> float:
    """Linear minorant of the downlink rate of user ``j`` in slot ``n`` as a
    function of the uplink schedule column, expanded at ``expansion_xu_r``."""
    x = np.asarray(candidate_xu, dtype=float)
    xr = np.asarray(expansion_xu_r, dtype=float)
    p = np.asarray(power, dtype=float)[:, n]
    s2 = scenario.noise_power_sigma2
    signal = scenario.uav_tx_power_pb * gains.h_bj[j, n]
    coupling = gains.g_bar[:, j] * p
    I_r = float(_safe_floor(np.dot(xr, coupling) + s2, s2))
    slope = coupling * signal * LOG2E / (I_r * (I_r + signal))
    return float(log2_1p(signal / I_r) - np.dot(slope, x - xr))


def _uplink_schedule_coefficients(A_D, A_U_r, power, gains, scenario, model):
    """Per-(i, n) coefficients of the linearized stage-2 objective."""
    s2 = scenario.noise_power_sigma2
    signal = scenario.uav_tx_power_pb * gains.h_bj                       # (K_D, N)
    I_r = _safe_floor(downlink_interference(A_U_r, power, gains, scenario), s2)
    factor = A_D * signal * LOG2E / (I_r * (I_r + signal))              # (K_D, N)
    # slope[i, n] = sum_j A_D[j, n] * g[i, j] * p[i, n] * factor_without_AD
    penalty = gains.g_bar.dot(factor) * power                           # (K_U, N)
    Ru = uplink_rates(power, gains, scenario, model)
    return Ru - penalty


def _per_slot_vertex(coeffs):
    """Argmax vertex of the simplex-with-slack LP, column by column."""
    best = np.argmax(coeffs, axis=0)
    cols = np.arange(coeffs.shape[1])
    x = np.zeros_like(coeffs)
    take = coeffs[best, cols] > 0
    x[best[take], cols[take]] = 1.0
    return x


def _best_uplink_vertices(A_D, A_U, power, gains, scenario, model):
    """Exact per-slot maximizer over the K_U + 1 vertices (incl. the empty one).

    With everything except the uplink schedule fixed, the objective splits
    over slots and is convex in each column, so a vertex is optimal.
    """
    K_U, N = A_U.shape
    candidates = [np.zeros((K_U, N))]
    for i in range(K_U):
        x = np.zeros((K_U, N))
        x[i] = 1.0
        candidates.append(x)
    values = []
    for x in candidates:
        Rd = model.rate_scale * downlink_rates(x, power, gains, scenario)
        Ru = model.rate_scale * uplink_rates(power, gains, scenario, model)
        values.append((A_D * Rd).sum(axis=0) + (x * Ru).sum(axis=0))
    values = np.array(values)                                            # (K_U + 1, N)
    current = (A_D * model.rate_scale * downlink_rates(A_U, power, gains, scenario)).sum(axis=0) \
        + (A_U * model.rate_scale * uplink_rates(power, gains, scenario, model)).sum(axis=0)
    pick = np.argmax(values, axis=0)
    out = A_U.copy()
    cols = np.arange(N)
    better = values[pick, cols] > current
    for n in cols[better]:
        out[:, n] = candidates[pick[n]][:, n]
    return out


def solve_p2_uplink_schedule(scenario: Scenario, gains: GainTables, schedule_in: Schedule, power,
                             settings: ScaSettings = ScaSettings(),
                             model: RateModel = FULL_DUPLEX) -> Schedule:
    """Successive linearization of the uplink scheduling problem."""
    A_D = np.asarray(schedule_in.A_D, dtype=float)
    A_U = np.array(schedule_in.A_U, dtype=float)
    power = np.asarray(power, dtype=float)
    current = Schedule(A_D=A_D, A_U=A_U)
    value = _true_objective(current, power, gains, scenario, model)
    for _ in range(settings.max_iters_uplink):
        coeffs = _uplink_schedule_coefficients(A_D, current.A_U, power, gains, scenario, model)
        x_new = _per_slot_vertex(coeffs)
        gain = model.rate_scale * float(np.sum(coeffs * (x_new - current.A_U)))
        trial = Schedule(A_D=A_D, A_U=x_new)
        trial_value = _true_objective(trial, power, gains, scenario, model)
        if trial_value < value:
            break
        moved = not np.array_equal(x_new, current.A_U)
        current, value_old, value = trial, value, trial_value
        if not moved or gain <= settings.inner_tol * max(abs(value_old), 1e-300):
            break
    A_U = current.A_U
    if settings.exact_vertex_check:
        A_U = _best_uplink_vertices(A_D, A_U, power, gains, scenario, model)
    return Schedule(A_D=A_D.copy(), A_U=A_U, binary=False)


# ---------------------------------------------------------------------------
# stage 3: trajectory

def psi_lb(j, n, candidate_q, expansion_q_r, schedule: Schedule, power, gains: GainTables,
           scenario: Scenario) -> float:
    """Concave minorant of downlink rate of user ``j`` in slot ``n`` as a
    function of the UAV position, expanded at ``expansion_q_r``."""
    w = scenario.downlink_users[j]
    H2 = scenario.altitude_H ** 2
    interference = float(np.sum(np.asarray(schedule.A_U)[:, n] * gains.g_bar[:, j]
                                * np.asarray(power)[:, n])) + scenario.noise_power_sigma2
    C = scenario.uav_tx_power_pb * scenario.beta0 / interference
    d2_r = float(np.sum((np.asarray(expansion_q_r, dtype=float) - w) ** 2))
    d2 = float(np.sum((np.asarray(candidate_q, dtype=float) - w) ** 2))
    z_r = d2_r + H2
    slope = C * LOG2E / ((C + z_r) * z_r)
    return float(log2_1p(C / z_r) - slope * (d2 - d2_r))


def phi_lb_uplink(i, n, candidate_q, expansion_q_r, power, scenario: Scenario,
                  model: RateModel = FULL_DUPLEX) -> float:
    """Concave minorant of the uplink rate of user ``i`` in slot ``n`` in the
    UAV position."""
    w = scenario.uplink_users[i]
    H2 = scenario.altitude_H ** 2
    E = float(np.asarray(power)[i, n]) * scenario.beta0 / model.uplink_noise(scenario)
    d2_r = float(np.sum((np.asarray(expansion_q_r, dtype=float) - w) ** 2))
    d2 = float(np.sum((np.asarray(candidate_q, dtype=float) - w) ** 2))
    z_r = d2_r + H2
    slope = E * LOG2E / ((E + z_r) * z_r)
    return float(log2_1p(E / z_r) - slope * (d2 - d2_r))


@dataclass(frozen=True)
class TrajectorySurrogate:
    """Separable concave quadratic minorant of the objective in the waypoints.

    ``value(Q) = const - sum_n weight[n] * ||q[n] - center[n]||^2`` over
    slots ``n = 1..N`` (rows of ``weight``/``center`` are slots).
    """

    weight: np.ndarray   # (N,)
    center: np.ndarray   # (N, 2)
    const: float

    def value(self, trajectory) -> float:
        q = np.asarray(trajectory, dtype=float)[1:]
        return float(self.const - np.sum(self.weight * np.sum((q - self.center) ** 2, axis=1)))

    def gradient(self, trajectory) -> np.ndarray:
        """Gradient w.r.t. all waypoints (row 0 is always zero)."""
        q = np.asarray(trajectory, dtype=float)
        g = np.zeros_like(q)
        g[1:] = -2.0 * self.weight[:, None] * (q[1:] - self.center)
        return g


def trajectory_surrogate(scenario: Scenario, schedule: Schedule, power, expansion_traj,
                         model: RateModel = FULL_DUPLEX) -> TrajectorySurrogate:
    """Assemble the weighted sum of all position minorants at ``expansion_traj``."""
    q_r = np.asarray(expansion_traj, dtype=float)[1:]
    H2 = scenario.altitude_H ** 2
    s2 = scenario.noise_power_sigma2
    scale = model.rate_scale
    A_D, A_U = np.asarray(schedule.A_D), np.asarray(schedule.A_U)
    power = np.asarray(power, dtype=float)
    gains = model.gains(scenario, expansion_traj)

    # downlink: C[j, n] = p_b beta0 / (interference + noise)
    interference = _safe_floor(downlink_interference(A_U, power, gains, scenario), s2)
    C = scenario.uav_tx_power_pb * scenario.beta0 / interference
    E = power * scenario.beta0 / model.uplink_noise(scenario)

    const = 0.0
    weight = np.zeros(q_r.shape[0])
    moment = np.zeros_like(q_r)
    for users, x, snr in ((scenario.downlink_users, A_D, C), (scenario.uplink_users, A_U, E)):
        d2_r = np.sum((q_r[None, :, :] - users[:, None, :]) ** 2, axis=2)    # (K, N)
        z_r = d2_r + H2
        slope = snr * LOG2E / ((snr + z_r) * z_r)
        a = scale * x * slope                                                  # (K, N)
        # sum_k a (||q - w_k||^2 - d2_r) = A ||q - m||^2 - sum_k a d2_r + sum_k a ||w_k||^2 - A ||m||^2
        const += float(np.sum(scale * x * log2_1p(snr / z_r)) + np.sum(a * d2_r))
        weight += a.sum(axis=0)
        moment += a.T.dot(users)
        const -= float(np.sum(a * np.sum(users ** 2, axis=1)[:, None]))
    safe = np.where(weight > 0, weight, 1.0)
    center = np.where(weight[:, None] > 0, moment / safe[:, None], q_r)
    const += float(np.sum(weight * np.sum(center ** 2, axis=1)))
    return TrajectorySurrogate(weight=weight, center=center, const=const)


def speed_violation(trajectory, scenario: Scenario) -> float:
    """Largest excess of a per-slot displacement over ``vmax * delta``."""
    return max_violation(trajectory, scenario.max_step)


def check_trajectory(trajectory, scenario: Scenario, endpoints: bool = True) -> np.ndarray:
    """Validate shape, endpoints and speed limits; return the array."""
    q = np.asarray(trajectory, dtype=float)
    if q.shape != (scenario.N + 1, 2):
        raise InfeasibleTrajectoryError(f"trajectory must have shape {(scenario.N + 1, 2)}, got {q.shape}")
    if endpoints:
        if np.linalg.norm(q[0] - scenario.q_initial) > FEAS_TOL:
            raise InfeasibleTrajectoryError("trajectory does not start at q_initial")
        if np.linalg.norm(q[-1] - scenario.q_final) > FEAS_TOL:
            raise InfeasibleTrajectoryError("trajectory does not end at q_final")
    excess = speed_violation(q, scenario)
    if excess > FEAS_TOL:
        raise InfeasibleTrajectoryError(f"speed limit exceeded by {excess:g} m in one slot")
    return q


def maximize_trajectory_surrogate(surrogate: TrajectorySurrogate, start, scenario: Scenario,
                                  settings: ScaSettings = ScaSettings()) -> np.ndarray:
    """Maximize a trajectory surrogate over the speed/endpoint constraints.

    ``start`` must be feasible. The returned waypoints are feasible.
    """
    if settings.trajectory_solver == "barrier":
        gap = settings.barrier_gap * max(1.0, abs(surrogate.const))
        return barrier_solve(surrogate.weight, surrogate.center, start, scenario.max_step, gap_tol=gap)
    return projected_gradient(
        surrogate.weight, surrogate.center, start, scenario.max_step,
        max_steps=settings.pg_max_steps, initial_step=settings.pg_initial_step,
        backtrack=settings.pg_backtrack, armijo=settings.pg_armijo,
        sweeps=settings.dykstra_sweeps, tol=settings.pg_tol,
    )


def solve_p3_trajectory(scenario: Scenario, schedule: Schedule, power, trajectory_in,
                        settings: ScaSettings = ScaSettings(),
                        model: RateModel = FULL_DUPLEX) -> np.ndarray:
    """Successive convex approximation over the UAV waypoints.

    Raises
    ------
    InfeasibleTrajectoryError
        If ``trajectory_in`` violates the endpoint or speed constraints.
    """
    q = check_trajectory(trajectory_in, scenario).copy()
    if scenario.N < 2:
        return q
    power = np.asarray(power, dtype=float)
    value = _true_objective(schedule, power, model.gains(scenario, q), scenario, model)
    for _ in range(settings.max_iters_trajectory):
        surrogate = trajectory_surrogate(scenario, schedule, power, q, model)
        candidate = maximize_trajectory_surrogate(surrogate, q, scenario, settings)
        accepted = None
        for _halving in range(30):
            cand_value = _true_objective(schedule, power, model.gains(scenario, candidate), scenario, model)
            if cand_value >= value:
                accepted = candidate
                break
            candidate = 0.5 * (q + candidate)
        if accepted is None:
            break
        improvement = cand_value - value
        q, value = accepted, cand_value
        if improvement <= settings.inner_tol * max(abs(value), 1e-300):
            break
    return q


# ---------------------------------------------------------------------------
# stage 4: uplink power

def phi_lb_power(j, n, candidate_p, expansion_p_r, schedule: Schedule, gains: GainTables,
                 scenario: Scenario) -> float:
    """Linear minorant of the downlink rate of user ``j`` in slot ``n`` in the
    uplink powers of that slot, expanded at ``expansion_p_r``."""
    p = np.asarray(candidate_p, dtype=float)
    pr = np.asarray(expansion_p_r, dtype=float)
    x = np.asarray(schedule.A_U)[:, n]
    s2 = scenario.noise_power_sigma2
    signal = scenario.uav_tx_power_pb * gains.h_bj[j, n]
    coupling = x * gains.g_bar[:, j]
    G_r = float(_safe_floor(np.dot(coupling, pr) + s2, s2))
    slope = coupling * signal * LOG2E / (G_r * (G_r + signal))
    return float(log2_1p(signal / G_r) - np.dot(slope, p - pr))


def _power_slopes(schedule, power_r, gains, scenario):
    """``a[i, n] = sum_j x_d[j, n] * d(-downlink lb)/dp_i`` at ``power_r``."""
    s2 = scenario.noise_power_sigma2
    signal = scenario.uav_tx_power_pb * gains.h_bj
    G_r = _safe_floor(downlink_interference(schedule.A_U, power_r, gains, scenario), s2)
    factor = np.asarray(schedule.A_D) * signal * LOG2E / (G_r * (G_r + signal))
    return np.asarray(schedule.A_U) * gains.g_bar.dot(factor)


def power_closed_form(x_u, a, b, p_current, p_max):
    """Maximizer of ``x_u * log2(1 + b p) - a p`` over ``0 <= p <= p_max``.

    Entries with ``a == 0`` go to ``p_max`` if the user is scheduled (and
    ``b > 0``); entries where the objective is flat keep ``p_current``.
    """
    x_u, a, b, p_current = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (x_u, a, b, p_current)))
    out = np.array(p_current, dtype=float)
    active = (x_u > 0) & (b > 0)
    interior = active & (a > 0)
    with np.errstate(divide="ignore"):
        stationary = x_u[interior] / (a[interior] * LN2) - 1.0 / b[interior]
    out[interior] = np.clip(stationary, 0.0, p_max)
    out[active & (a <= 0)] = p_max
    return out


def solve_p4_power(scenario: Scenario, gains: GainTables, schedule: Schedule, power_in,
                   settings: ScaSettings = ScaSettings(),
                   model: RateModel = FULL_DUPLEX) -> np.ndarray:
    """Successive linearization of the power control problem."""
    p = np.array(power_in, dtype=float)
    value = _true_objective(schedule, p, gains, scenario, model)
    b = gains.h_ib / model.uplink_noise(scenario)
    x_u = np.asarray(schedule.A_U, dtype=float)
    for _ in range(settings.max_iters_power):
        a = _power_slopes(schedule, p, gains, scenario)
        p_new = power_closed_form(x_u, a, b, p, scenario.max_uplink_power_Pmax)
        new_value = _true_objective(schedule, p_new, gains, scenario, model)
        if new_value < value:
            break
        improvement = new_value - value
        moved = not np.array_equal(p_new, p)
        p, value = p_new, new_value
        if not moved or improvement <= settings.inner_tol * max(abs(value), 1e-300):
            break
    return p

