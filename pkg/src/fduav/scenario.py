"""Problem instance definition, unit conversion and scenario file ingestion.

A scenario file is a UTF-8 text document of ``key = value`` lines::

    downlink_users = 200,650; 800,650
    uplink_users = 250,300; 750,300
    q_initial = 0,500
    q_final = 1000,500
    period_T = 30
    slot_duration_delta = 0.5
    beta0_db = -60
    sigma2_dbm = -110
    fb_db = -130

Blank lines and lines starting with ``#`` are ignored. Positions are ``x,y``
pairs in meters; user lists are ``;``-separated pairs.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

#: Ground-to-ground distances are clamped to this value (meters).
D_MIN = 1.0
#: Slack for geometric constraint checks (meters).
FEAS_TOL = 1e-9


class ScenarioError(ValueError):
    """Raised when a scenario cannot be parsed or violates an invariant."""


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def db_to_linear(value_db):
    """Convert decibels to a linear power ratio."""
    return _scalar_or_array(np.power(10.0, np.asarray(value_db, dtype=float) / 10.0))


def linear_to_db(value):
    """Convert a linear power ratio to decibels."""
    return _scalar_or_array(10.0 * np.log10(np.asarray(value, dtype=float)))


def dbm_to_watts(value_dbm):
    """Convert dBm to Watts."""
    return db_to_linear(np.asarray(value_dbm, dtype=float) - 30.0)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Immutable description of one full-duplex UAV problem instance.

    All power quantities are linear (Watts or dimensionless gains). Use
    :func:`load_scenario` or :func:`scenario_from_mapping` to build one from
    dB-valued inputs.
    """

    downlink_users: np.ndarray
    uplink_users: np.ndarray
    q_initial: np.ndarray
    q_final: np.ndarray
    altitude_H: float = 100.0
    period_T: float = 30.0
    slot_duration_delta: float = 0.5
    beta0: float = 1e-6
    noise_power_sigma2: float = 1e-14
    pathloss_alpha: float = 3.0
    uav_tx_power_pb: float = 0.1
    max_uplink_power_Pmax: float = 0.1
    vmax: float = 50.0
    self_interference_fb: float = 1e-13
    bandwidth_B: float = 1e6
    tolerance_eps: float = 1e-3
    num_slots_N: int = field(init=False)

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        for name in ("downlink_users", "uplink_users"):
            arr = np.array(getattr(self, name), dtype=float).reshape(-1, 2)
            arr.setflags(write=False)
            set_(name, arr)
        for name in ("q_initial", "q_final"):
            arr = np.array(getattr(self, name), dtype=float).reshape(2)
            arr.setflags(write=False)
            set_(name, arr)
        for f in dataclasses.fields(self):
            if f.type == "float":
                set_(f.name, float(getattr(self, f.name)))
        delta = self.slot_duration_delta
        if not delta > 0:
            raise ScenarioError(f"slot_duration_delta must be > 0, got {delta}")
        n = int(round(self.period_T / delta))
        set_("num_slots_N", n)
        self.validate()

    @property
    def K_D(self) -> int:
        return self.downlink_users.shape[0]

    @property
    def K_U(self) -> int:
        return self.uplink_users.shape[0]

    @property
    def N(self) -> int:
        return self.num_slots_N

    @property
    def max_step(self) -> float:
        """Largest horizontal displacement allowed within one slot."""
        return self.vmax * self.slot_duration_delta

    def validate(self) -> None:
        if self.K_D < 1:
            raise ScenarioError("at least one downlink user is required (K_D >= 1)")
        if self.K_U < 1:
            raise ScenarioError("at least one uplink user is required (K_U >= 1)")
        if self.num_slots_N < 1:
            raise ScenarioError("period_T / slot_duration_delta must give N >= 1")
        if abs(self.num_slots_N * self.slot_duration_delta - self.period_T) > 1e-9 * max(1.0, self.period_T):
            raise ScenarioError(
                f"period_T={self.period_T} is not an integer multiple of slot_duration_delta={self.slot_duration_delta}"
            )
        for name in ("altitude_H", "beta0", "noise_power_sigma2", "uav_tx_power_pb",
                     "max_uplink_power_Pmax", "vmax", "bandwidth_B"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ScenarioError(f"{name} must be finite and > 0, got {v}")
        # fb = 0 is the half-duplex / interference-free limit
        if not (math.isfinite(self.self_interference_fb) and self.self_interference_fb >= 0):
            raise ScenarioError(f"self_interference_fb must be finite and >= 0, got {self.self_interference_fb}")
        if not self.pathloss_alpha >= 2:
            raise ScenarioError(f"pathloss_alpha must be >= 2, got {self.pathloss_alpha}")
        if not self.tolerance_eps > 0:
            raise ScenarioError(f"tolerance_eps must be > 0, got {self.tolerance_eps}")
        for name in ("downlink_users", "uplink_users", "q_initial", "q_final"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ScenarioError(f"{name} contains non-finite coordinates")
        gap = float(np.linalg.norm(self.q_final - self.q_initial))
        reach = self.num_slots_N * self.max_step
        if gap > reach + FEAS_TOL:
            raise ScenarioError(
                f"endpoints unreachable: ||q_final - q_initial|| = {gap:g} m exceeds "
                f"N*delta*vmax = {reach:g} m"
            )

    def replace(self, **changes) -> "Scenario":
        """Return a copy with some fields changed (re-validated)."""
        kwargs = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.init}
        kwargs.update(changes)
        return Scenario(**kwargs)

    def to_mapping(self) -> dict:
        """Plain-python view of the linear-unit fields."""
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


# ---------------------------------------------------------------------------
# file format

_POSITION_KEYS = ("q_initial", "q_final")
_USER_KEYS = ("downlink_users", "uplink_users")
_FLOAT_KEYS = (
    "altitude_H", "period_T", "slot_duration_delta", "beta0", "noise_power_sigma2",
    "pathloss_alpha", "uav_tx_power_pb", "max_uplink_power_Pmax", "vmax",
    "self_interference_fb", "bandwidth_B", "tolerance_eps",
)
# dB-suffixed aliases: key -> (linear field, converter)
_DB_KEYS = {
    "beta0_db": ("beta0", db_to_linear),
    "sigma2_dbm": ("noise_power_sigma2", dbm_to_watts),
    "fb_db": ("self_interference_fb", db_to_linear),
}


def _parse_pair(text: str, key: str) -> list[float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ScenarioError(f"{key}: expected an 'x,y' pair, got {text!r}")
    try:
        return [float(parts[0]), float(parts[1])]
    except ValueError:
        raise ScenarioError(f"{key}: non-numeric coordinate in {text!r}") from None


def parse_scenario_text(text: str) -> dict:
    """Parse scenario file content into a raw ``{key: value}`` mapping."""
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in raw:
            raise ScenarioError(f"line {lineno}: duplicate key {key!r}")
        if key in _USER_KEYS:
            pairs = [p for p in value.split(";") if p.strip()]
            raw[key] = [_parse_pair(p, key) for p in pairs]
        elif key in _POSITION_KEYS:
            raw[key] = _parse_pair(value, key)
        elif key in _FLOAT_KEYS or key in _DB_KEYS:
            try:
                raw[key] = float(value)
            except ValueError:
                raise ScenarioError(f"line {lineno}: {key} is not a number: {value!r}") from None
        elif key == "num_slots_N":
            try:
                raw[key] = int(value)
            except ValueError:
                raise ScenarioError(f"line {lineno}: num_slots_N is not an integer: {value!r}") from None
        else:
            raise ScenarioError(f"line {lineno}: unknown key {key!r}")
    return raw


def scenario_from_mapping(raw: dict) -> Scenario:
    """Build a :class:`Scenario` from parsed keys, converting dB aliases."""
    kwargs = dict(raw)
    for db_key, (lin_key, conv) in _DB_KEYS.items():
        if db_key in kwargs:
            if lin_key in kwargs:
                raise ScenarioError(f"both {db_key} and {lin_key} given")
            kwargs[lin_key] = conv(kwargs.pop(db_key))
    n_declared = kwargs.pop("num_slots_N", None)
    for key in _USER_KEYS + _POSITION_KEYS:
        if key not in kwargs:
            raise ScenarioError(f"missing required key {key!r}")
    unknown = set(kwargs) - set(_USER_KEYS + _POSITION_KEYS + _FLOAT_KEYS)
    if unknown:
        raise ScenarioError(f"unknown keys: {sorted(unknown)}")
    scenario = Scenario(**kwargs)
    if n_declared is not None and n_declared != scenario.num_slots_N:
        raise ScenarioError(
            f"num_slots_N={n_declared} disagrees with period_T/slot_duration_delta={scenario.num_slots_N}"
        )
    return scenario


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file.

    Raises
    ------
    OSError
        If the file cannot be read.
    ScenarioError
        On parse errors or violated invariants.
    """
    text = Path(path).read_text(encoding="utf-8")
    return scenario_from_mapping(parse_scenario_text(text))


def dump_scenario(scenario: Scenario) -> str:
    """Serialize a scenario in the key/value format (linear units)."""
    lines = []
    for key in _USER_KEYS:
        users = getattr(scenario, key)
        lines.append(f"{key} = " + "; ".join(f"{x!r},{y!r}" for x, y in users.tolist()))
    for key in _POSITION_KEYS:
        x, y = getattr(scenario, key).tolist()
        lines.append(f"{key} = {x!r},{y!r}")
    for key in _FLOAT_KEYS:
        lines.append(f"{key} = {getattr(scenario, key)!r}")
    return "\n".join(lines) + "\n"


def reference_scenario(downlink_users=None, uplink_users=None, **overrides) -> Scenario:
    """Radio parameters of the reference setup with a desk-scale user layout.

    Two downlink and two uplink users placed around the straight path from
    (0, 500) to (1000, 500), uplink user 1 about 112 m from downlink user 1;
    T = 30 s.
    """
    if downlink_users is None:
        downlink_users = [[250.0, 650.0], [750.0, 350.0]]
    if uplink_users is None:
        uplink_users = [[300.0, 550.0], [700.0, 700.0]]
    kwargs = dict(
        downlink_users=downlink_users,
        uplink_users=uplink_users,
        q_initial=[0.0, 500.0],
        q_final=[1000.0, 500.0],
        altitude_H=100.0,
        period_T=30.0,
        slot_duration_delta=0.5,
        beta0=db_to_linear(-60.0),
        noise_power_sigma2=dbm_to_watts(-110.0),
        pathloss_alpha=3.0,
        uav_tx_power_pb=0.1,
        max_uplink_power_Pmax=0.1,
        vmax=50.0,
        self_interference_fb=db_to_linear(-130.0),
        bandwidth_B=1e6,
        tolerance_eps=1e-3,
    )
    kwargs.update(overrides)
    return Scenario(**kwargs)
