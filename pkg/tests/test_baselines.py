import numpy as np
import pytest

from fduav.baselines import (
    HALF_DUPLEX_MODEL,
    IDEAL_MODEL,
    SchemeId,
    model_for,
    run_half_duplex,
    run_ideal_no_interference,
    run_no_power_control,
    run_proposed,
    run_scheme,
    run_static,
    run_straight_flight,
    static_position,
)
from fduav.bcd import initialize, straight_line
from fduav.rates import FULL_DUPLEX, objective
from fduav.scenario import reference_scenario


@pytest.fixture(scope="module")
def default_runs():
    sc = reference_scenario()
    return sc, {s: run_scheme(s, sc) for s in SchemeId}


def test_scheme_parsing():
    assert SchemeId.parse("HD") is SchemeId.HALF_DUPLEX
    assert SchemeId.parse("straight-flight") is SchemeId.STRAIGHT_FLIGHT
    assert SchemeId.parse("ideal_no_interference") is SchemeId.IDEAL_NO_INTERFERENCE
    assert SchemeId.parse(" proposed ") is SchemeId.PROPOSED
    with pytest.raises(ValueError, match="unknown scheme"):
        SchemeId.parse("greedy")
    assert len(SchemeId) == 6


def test_models():
    assert model_for("ideal") is IDEAL_MODEL
    assert model_for(SchemeId.HALF_DUPLEX) is HALF_DUPLEX_MODEL
    assert model_for("proposed") is FULL_DUPLEX
    assert model_for("static") is FULL_DUPLEX


def test_static_position_centroid(scenario_factory):
    sc = scenario_factory(K_D=2, K_U=2, N=2, downlink_users=[[0, 0], [2, 0]], uplink_users=[[0, 2], [2, 2]],
                          q_initial=[0, 1], q_final=[2, 1])
    np.testing.assert_allclose(static_position(sc), [1, 1])


def test_static_position_grid_oracle(scenario_factory):
    sc = scenario_factory(K_D=2, K_U=3, N=2, seed=8, span=20.0)
    users = np.vstack([sc.downlink_users, sc.uplink_users])
    xs, ys = np.meshgrid(np.arange(0, 20.05, 0.1), np.arange(0, 20.05, 0.1))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    cost = np.sum((pts[:, None, :] - users[None]) ** 2, axis=(1, 2))
    assert np.linalg.norm(static_position(sc) - pts[np.argmin(cost)]) <= 0.2


def test_static_single_user_hovers_above(scenario_factory):
    sc = scenario_factory(K_D=1, K_U=1, N=3, downlink_users=[[400, 300]], uplink_users=[[400, 300]])
    sol = run_static(sc)
    np.testing.assert_allclose(sol.trajectory, np.tile([400, 300], (4, 1)))


def test_ideal_uses_full_power(default_runs):
    _, runs = default_runs
    np.testing.assert_array_equal(runs[SchemeId.IDEAL_NO_INTERFERENCE].power, 0.1)


def test_no_power_control_constant(default_runs):
    _, runs = default_runs
    sol = runs[SchemeId.NO_POWER_CONTROL]
    np.testing.assert_array_equal(sol.power, 0.1)
    assert all(b >= a - 1e-9 for a, b in zip(sol.objective_trace, sol.objective_trace[1:]))


def test_straight_keeps_initial_line(default_runs):
    sc, runs = default_runs
    np.testing.assert_array_equal(runs[SchemeId.STRAIGHT_FLIGHT].trajectory, initialize(sc)[1])


def test_ordering_on_default(default_runs):
    _, runs = default_runs
    v = {s: runs[s].final_binary_objective for s in SchemeId}
    assert v[SchemeId.IDEAL_NO_INTERFERENCE] >= v[SchemeId.PROPOSED] - 1e-9
    assert v[SchemeId.PROPOSED] >= v[SchemeId.NO_POWER_CONTROL] - 1e-9
    assert v[SchemeId.NO_POWER_CONTROL] >= max(v[SchemeId.STRAIGHT_FLIGHT], v[SchemeId.STATIC]) - 1e-9
    assert v[SchemeId.PROPOSED] > v[SchemeId.HALF_DUPLEX]


def test_single_slot_straight_equals_proposed(scenario_factory):
    sc = scenario_factory(K_D=2, K_U=2, N=1, seed=2)
    a, b = run_proposed(sc), run_straight_flight(sc)
    assert a.final_binary_objective == b.final_binary_objective


def test_ideal_equals_proposed_without_uplink_power(scenario_factory):
    # uplink users far from everyone and at zero-effect distance: cross gains vanish
    sc = scenario_factory(K_D=2, K_U=1, N=4, seed=6, uplink_users=[[1e7, 1e7]])
    a, b = run_proposed(sc), run_ideal_no_interference(sc)
    assert b.final_binary_objective == pytest.approx(a.final_binary_objective, rel=1e-9)


def test_half_duplex_halves_rates(scenario_factory):
    sc = scenario_factory(K_D=2, K_U=2, N=6, seed=4)
    sol = run_half_duplex(sc)
    full, _ = objective(sol.schedule, sol.trajectory, sol.power, sc.replace(self_interference_fb=0.0), IDEAL_MODEL)
    assert sol.final_binary_objective == pytest.approx(0.5 * full, rel=1e-14)


def test_half_duplex_near_half_of_ideal(scenario_factory):
    # negligible self-interference and users far apart
    sc = scenario_factory(K_D=2, K_U=2, N=40, self_interference_fb=0.0,
                          downlink_users=[[300, 900], [700, 900]], uplink_users=[[300, 100], [700, 100]],
                          q_initial=[100, 500], q_final=[900, 500])
    hd, ideal = run_half_duplex(sc), run_ideal_no_interference(sc)
    assert hd.final_binary_objective == pytest.approx(0.5 * ideal.final_binary_objective, rel=0.05)


@pytest.mark.parametrize("seed", range(3))
def test_shared_ascent_bounds(scenario_factory, seed):
    sc = scenario_factory(K_D=2, K_U=2, N=10, seed=seed)
    prop = run_proposed(sc)
    straight = run_straight_flight(sc)
    for sol in (prop, straight, run_no_power_control(sc)):
        trace = [sol.initial_objective] + sol.objective_trace
        assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))
    assert np.all(np.linalg.norm(np.diff(prop.trajectory, axis=0), axis=1) <= sc.max_step + 1e-9)
    np.testing.assert_array_equal(straight.trajectory, straight_line(sc))
