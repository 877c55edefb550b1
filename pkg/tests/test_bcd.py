import numpy as np
import pytest

from fduav.bcd import initialize, round_schedule, run, straight_line
from fduav.rates import Schedule, objective
from fduav.scenario import reference_scenario
from fduav.subproblems import ScaSettings, check_trajectory


def test_initialize_reference_example():
    sc = reference_scenario()
    sched, q, P = initialize(sc)
    assert sc.N == 60
    n = np.arange(61)
    np.testing.assert_allclose(q, np.column_stack([1000.0 * n / 60, np.full(61, 500.0)]), rtol=1e-15, atol=1e-12)
    np.testing.assert_array_equal(P, 0.1)
    np.testing.assert_array_equal(sched.A_D, 0.5)
    np.testing.assert_array_equal(sched.A_U, 0.5)


def test_initialize_uniform_uplink(scenario_factory):
    sched, _, _ = initialize(scenario_factory(K_D=3, K_U=4, N=2))
    np.testing.assert_array_equal(sched.A_U, 0.25)
    np.testing.assert_allclose(sched.A_D, 1 / 3)


@pytest.mark.parametrize("column, expected", [
    ([0.5, 0.5], [1, 0]),
    ([0.49, 0.51], [0, 1]),
    ([0.49, 0.49], [0, 0]),
    ([0.0, 0.5], [0, 1]),
    ([0.3, 0.3], [0, 0]),
])
def test_round_schedule(column, expected):
    col = np.array(column)[:, None]
    out = round_schedule(Schedule(col, col))
    np.testing.assert_array_equal(out.A_D[:, 0], expected)
    np.testing.assert_array_equal(out.A_U[:, 0], expected)
    assert out.binary


def test_round_single_threshold():
    out = round_schedule(Schedule(np.array([[0.5, 0.49, 1.0]]), np.zeros((1, 3))))
    np.testing.assert_array_equal(out.A_D, [[1, 0, 1]])


def test_loose_tolerance_single_pass(scenario_factory):
    sc = scenario_factory(K_D=1, K_U=1, N=4)
    sol = run(sc, tolerance=1.0)
    assert len(sol.objective_trace) == 1 and sol.iterations_used == 1


def test_iteration_cap(scenario_factory):
    sc = scenario_factory(K_D=2, K_U=2, N=6)
    sol = run(sc, ScaSettings(max_outer_iters=2), tolerance=1e-15)
    assert sol.iterations_used <= 2


def test_reference_default_converges():
    sc = reference_scenario()
    sol = run(sc)
    trace = [sol.initial_objective] + sol.objective_trace
    assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))
    assert sol.iterations_used <= 50
    assert sol.final_binary_objective <= sol.final_relaxed_objective + 1e-9
    assert np.all(sol.schedule.A_D.sum(axis=0) <= 1) and np.all(sol.schedule.A_U.sum(axis=0) <= 1)
    check_trajectory(sol.trajectory, sc)
    value, _ = objective(sol.schedule, sol.trajectory, sol.power, sc)
    assert value == sol.final_binary_objective


def test_moves_toward_downlink_user_under_interference(scenario_factory):
    # uplink user right next to the downlink user: strong cross interference
    sc = scenario_factory(K_D=1, K_U=1, N=4, downlink_users=[[500, 650]], uplink_users=[[520, 660]],
                          q_initial=[480, 500], q_final=[520, 500])
    sol = run(sc)
    line = straight_line(sc)
    d_line = np.min(np.linalg.norm(line - sc.downlink_users[0], axis=1))
    d_opt = np.min(np.linalg.norm(sol.trajectory - sc.downlink_users[0], axis=1))
    assert d_opt < d_line


def test_deterministic(scenario_factory):
    sc = scenario_factory(K_D=2, K_U=2, N=8, seed=3)
    a, b = run(sc), run(sc)
    np.testing.assert_array_equal(a.trajectory, b.trajectory)
    np.testing.assert_array_equal(a.power, b.power)
    np.testing.assert_array_equal(a.relaxed_schedule.A_U, b.relaxed_schedule.A_U)
    assert a.objective_trace == b.objective_trace
    assert a.final_binary_objective == b.final_binary_objective


def test_fixed_trajectory_untouched(scenario_factory):
    sc = scenario_factory(K_D=2, K_U=2, N=6, seed=1)
    q = straight_line(sc)
    sol = run(sc, trajectory=q, update_trajectory=False)
    np.testing.assert_array_equal(sol.trajectory, q)
