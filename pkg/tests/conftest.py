import numpy as np
import pytest

from fduav.scenario import Scenario, db_to_linear, dbm_to_watts


def make_scenario(K_D=2, K_U=2, N=4, seed=0, span=1000.0, **overrides):
    """Random instance with the reference radio parameters.

    Users are spread over a ``span`` x ``span`` square; the UAV flies from
    the left edge to the right edge at mid height, with enough time.
    """
    rng = np.random.default_rng(seed)
    delta = overrides.pop("slot_duration_delta", 0.5)
    vmax = overrides.pop("vmax", 50.0)
    # straight line needs at most 80% of the available reach
    length = min(span, 0.8 * N * vmax * delta)
    kwargs = dict(
        downlink_users=rng.uniform(0, span, (K_D, 2)),
        uplink_users=rng.uniform(0, span, (K_U, 2)),
        q_initial=[0.5 * (span - length), span / 2],
        q_final=[0.5 * (span + length), span / 2],
        altitude_H=100.0,
        period_T=N * delta,
        slot_duration_delta=delta,
        beta0=db_to_linear(-60.0),
        noise_power_sigma2=dbm_to_watts(-110.0),
        pathloss_alpha=3.0,
        uav_tx_power_pb=0.1,
        max_uplink_power_Pmax=0.1,
        vmax=vmax,
        self_interference_fb=db_to_linear(-130.0),
        bandwidth_B=1e6,
        tolerance_eps=1e-3,
    )
    kwargs.update(overrides)
    return Scenario(**kwargs)


@pytest.fixture
def scenario_factory():
    return make_scenario


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", None) != "call":
                continue
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" in props:
                lines.append((props["criterion"], "PASS" if rep.passed else "FAIL", props.get("detail", "")))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in sorted(lines, key=lambda t: int(t[0].split()[0][1:])):
        terminalreporter.write_line(f"{status} {name}" + (f" ({detail})" if detail else ""))
