import math

import numpy as np
import pytest

from fduav.bcd import straight_line
from fduav.channel import GainTables, build_gain_tables
from fduav.rates import RateModel, Schedule, downlink_rate, objective, uplink_rate


def one_slot_tables(h_d=1e-10, h_u=1e-10, g=0.0):
    return GainTables(h_bj=np.array([[h_d]]), h_ib=np.array([[h_u]]), g_bar=np.array([[g]]))


def test_downlink_rate_without_uplink(scenario_factory):
    sc = scenario_factory(K_D=1, K_U=1, N=1)
    sched = Schedule(A_D=np.ones((1, 1)), A_U=np.zeros((1, 1)))
    p = np.full((1, 1), 0.1)
    # 0.1 * 1e-10 / 1e-14 = 1e3
    rate = downlink_rate(0, 0, sched, p, one_slot_tables(h_d=1e-10, g=1e-9), sc)
    assert rate == pytest.approx(9.96722625883599352404, rel=1e-13)
    # SNR 1e5 needs a hundredfold stronger link
    rate = downlink_rate(0, 0, sched, p, one_slot_tables(h_d=1e-8, g=1e-9), sc)
    assert rate == pytest.approx(16.6096549013150863578, rel=1e-13)


def test_downlink_interference_divides_sinr(scenario_factory):
    sc = scenario_factory(K_D=1, K_U=1, N=1)
    p = np.full((1, 1), 0.1)
    g = 9 * sc.noise_power_sigma2 / 0.1
    tables = one_slot_tables(g=g)
    on = downlink_rate(0, 0, Schedule(np.ones((1, 1)), np.ones((1, 1))), p, tables, sc)
    off = downlink_rate(0, 0, Schedule(np.ones((1, 1)), np.zeros((1, 1))), p, tables, sc)
    assert 2 ** on - 1 == pytest.approx((2 ** off - 1) / 10, rel=1e-12)


def test_downlink_rate_vanishes_with_interference(scenario_factory):
    sc = scenario_factory(K_D=1, K_U=1, N=1)
    sched = Schedule(np.ones((1, 1)), np.ones((1, 1)))
    rates = [downlink_rate(0, 0, sched, np.full((1, 1), 0.1), one_slot_tables(g=g), sc)
             for g in (1e-12, 1e-9, 1e-6, 1e-3, 1.0)]
    assert all(a > b for a, b in zip(rates, rates[1:]))
    assert rates[-1] < 1e-8


def test_uplink_rate(scenario_factory):
    sc = scenario_factory(K_D=1, K_U=1, N=1)
    tables = one_slot_tables()
    assert uplink_rate(0, 0, np.zeros((1, 1)), tables, sc) == 0.0
    assert uplink_rate(0, 0, np.full((1, 1), 0.1), tables, sc) == pytest.approx(6.52213566326571739, rel=1e-13)


def test_small_self_interference(scenario_factory):
    p = np.full((1, 1), 0.1)
    clean = scenario_factory(K_D=1, K_U=1, N=1, self_interference_fb=0.0)
    weak = scenario_factory(K_D=1, K_U=1, N=1, self_interference_fb=1e-15)
    # 1e-15 W is a tenth of the noise floor: the rate gap tends to log2(1.1)
    # bits, under 1% of the rate once the SNR reaches about 1e5
    tables = one_slot_tables(h_u=1e-8)
    r0, r1 = uplink_rate(0, 0, p, tables, clean), uplink_rate(0, 0, p, tables, weak)
    assert r1 < r0 and (r0 - r1) / r0 < 0.01
    tables = one_slot_tables(h_u=1e-10)
    r0, r1 = uplink_rate(0, 0, p, tables, clean), uplink_rate(0, 0, p, tables, weak)
    assert r0 - r1 == pytest.approx(math.log2(1001) - math.log2(1 + 1e3 / 1.1), rel=1e-12)


def random_point(sc, rng):
    A_D = rng.uniform(0, 1, (sc.K_D, sc.N))
    A_D /= A_D.sum(axis=0) * rng.uniform(1.0, 1.5)
    A_U = rng.uniform(0, 1, (sc.K_U, sc.N))
    A_U /= A_U.sum(axis=0) * rng.uniform(1.0, 1.5)
    P = rng.uniform(0, sc.max_uplink_power_Pmax, (sc.K_U, sc.N))
    return Schedule(A_D, A_U), P


def brute_force_objective(sched, q, P, sc):
    total = 0.0
    for n in range(sc.N):
        x, y = q[n + 1]
        for j, (wx, wy) in enumerate(sc.downlink_users):
            h = sc.beta0 / ((x - wx) ** 2 + (y - wy) ** 2 + sc.altitude_H ** 2)
            interference = sc.noise_power_sigma2
            for i, (ux, uy) in enumerate(sc.uplink_users):
                d = max(math.hypot(ux - wx, uy - wy), 1.0)
                interference += sched.A_U[i, n] * sc.beta0 * d ** -sc.pathloss_alpha * P[i, n]
            total += sched.A_D[j, n] * math.log2(1 + sc.uav_tx_power_pb * h / interference)
        for i, (ux, uy) in enumerate(sc.uplink_users):
            h = sc.beta0 / ((x - ux) ** 2 + (y - uy) ** 2 + sc.altitude_H ** 2)
            total += sched.A_U[i, n] * math.log2(1 + P[i, n] * h / (sc.self_interference_fb + sc.noise_power_sigma2))
    return total


@pytest.mark.parametrize("seed", range(5))
def test_objective_matches_term_by_term(scenario_factory, seed):
    rng = np.random.default_rng(seed)
    sc = scenario_factory(K_D=2, K_U=2, N=4, seed=seed, span=300.0)
    sched, P = random_point(sc, rng)
    q = straight_line(sc)
    value, breakdown = objective(sched, q, P, sc)
    assert value == pytest.approx(brute_force_objective(sched, q, P, sc), rel=1e-12)
    assert np.all(breakdown.Rd >= 0) and np.all(breakdown.Ru >= 0)


def test_objective_trivial_cases(scenario_factory):
    sc = scenario_factory(K_D=2, K_U=2, N=1)
    q = straight_line(sc)
    P = np.full((2, 1), 0.1)
    zero = Schedule(np.zeros((2, 1)), np.zeros((2, 1)))
    assert objective(zero, q, P, sc)[0] == 0.0
    single = Schedule(np.array([[0.0], [1.0]]), np.zeros((2, 1)))
    tables = build_gain_tables(sc, q)
    assert objective(single, q, P, sc)[0] == pytest.approx(downlink_rate(1, 0, single, P, tables, sc), rel=1e-15)


def test_objective_linear_in_downlink_schedule(scenario_factory, rng):
    sc = scenario_factory(K_D=3, K_U=2, N=5, seed=1)
    q = straight_line(sc)
    (s1, P), (s2, _) = random_point(sc, rng), random_point(sc, rng)
    for lam in (0.0, 0.3, 0.9):
        mix = Schedule(lam * s1.A_D + (1 - lam) * s2.A_D, s1.A_U)
        a = objective(Schedule(s1.A_D, s1.A_U), q, P, sc)[0]
        b = objective(Schedule(s2.A_D, s1.A_U), q, P, sc)[0]
        assert objective(mix, q, P, sc)[0] == pytest.approx(lam * a + (1 - lam) * b, rel=1e-12)


def test_objective_monotone_in_parameters(scenario_factory, rng):
    sc = scenario_factory(K_D=2, K_U=2, N=4, seed=2)
    q = straight_line(sc)
    sched, P = random_point(sc, rng)
    base = objective(sched, q, P, sc)[0]
    assert objective(sched, q, P, sc.replace(uav_tx_power_pb=0.2))[0] >= base
    assert objective(sched, q, P, sc.replace(self_interference_fb=1e-11))[0] <= base
    assert objective(sched, q, P, sc.replace(altitude_H=150.0))[0] <= base


def test_rate_model_switches(scenario_factory, rng):
    sc = scenario_factory(K_D=2, K_U=2, N=4, seed=4, span=200.0)
    q = straight_line(sc)
    sched, P = random_point(sc, rng)
    full = objective(sched, q, P, sc)[0]
    ideal = objective(sched, q, P, sc, RateModel(cross_interference=False))[0]
    hd = objective(sched, q, P, sc, RateModel(False, False, 0.5))[0]
    no_si = objective(sched, q, P, sc.replace(self_interference_fb=0.0), RateModel(cross_interference=False))[0]
    assert ideal >= full
    assert hd == pytest.approx(0.5 * no_si, rel=1e-14)


def test_slot_sum_order_is_fixed(scenario_factory, rng):
    sc = scenario_factory(K_D=2, K_U=2, N=6, seed=5)
    q = straight_line(sc)
    sched, P = random_point(sc, rng)
    _, breakdown = objective(sched, q, P, sc)
    rd, ru = breakdown.per_slot(sched)
    expected = 0.0
    for v in (rd + ru).tolist():
        expected += v
    assert breakdown.weighted_objective == expected
