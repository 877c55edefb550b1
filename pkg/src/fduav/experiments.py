"""Result export, solution validation and parameter sweeps."""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import SchemeId, model_for, run_scheme, static_position
from .bcd import Solution
from .chain import max_violation
from .rates import RateBreakdown, Schedule, objective
from .scenario import FEAS_TOL, Scenario, db_to_linear, load_scenario
from .subproblems import ScaSettings

logger = logging.getLogger(__name__)

# sweep axis name -> (scenario field, value converter)
SWEEP_PARAMS = {
    "T": ("period_T", float),
    "fb_db": ("self_interference_fb", db_to_linear),
    "H": ("altitude_H", float),
}
_PARAM_ALIASES = {"period_T": "T", "self_interference_fb_db": "fb_db", "altitude_H": "H"}

SUMMARY_FIELDS = ["scheme", "param", "value", "binary_objective", "relaxed_objective",
                  "iterations", "status", "message"]


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# solution serialization

def solution_to_dict(solution: Solution) -> dict:
    def sched(s: Schedule):
        return {"A_D": np.asarray(s.A_D).tolist(), "A_U": np.asarray(s.A_U).tolist(), "binary": bool(s.binary)}

    return {
        "scheme": solution.scheme,
        "schedule": sched(solution.schedule),
        "relaxed_schedule": sched(solution.relaxed_schedule),
        "trajectory": np.asarray(solution.trajectory).tolist(),
        "power": np.asarray(solution.power).tolist(),
        "objective_trace": [float(v) for v in solution.objective_trace],
        "initial_objective": float(solution.initial_objective),
        "final_relaxed_objective": float(solution.final_relaxed_objective),
        "final_binary_objective": float(solution.final_binary_objective),
        "iterations_used": int(solution.iterations_used),
        "rate_breakdown": {
            "Rd": solution.rate_breakdown.Rd.tolist(),
            "Ru": solution.rate_breakdown.Ru.tolist(),
            "weighted_objective": float(solution.rate_breakdown.weighted_objective),
        },
    }


def solution_from_dict(doc: dict) -> Solution:
    def sched(d):
        return Schedule(A_D=np.array(d["A_D"], dtype=float), A_U=np.array(d["A_U"], dtype=float),
                        binary=bool(d["binary"]))

    rb = doc["rate_breakdown"]
    return Solution(
        schedule=sched(doc["schedule"]),
        relaxed_schedule=sched(doc["relaxed_schedule"]),
        trajectory=np.array(doc["trajectory"], dtype=float),
        power=np.array(doc["power"], dtype=float),
        objective_trace=[float(v) for v in doc["objective_trace"]],
        final_relaxed_objective=float(doc["final_relaxed_objective"]),
        final_binary_objective=float(doc["final_binary_objective"]),
        iterations_used=int(doc["iterations_used"]),
        rate_breakdown=RateBreakdown(Rd=np.array(rb["Rd"], dtype=float), Ru=np.array(rb["Ru"], dtype=float),
                                     weighted_objective=float(rb["weighted_objective"])),
        initial_objective=float(doc.get("initial_objective", 0.0)),
        scheme=doc.get("scheme", "proposed"),
    )


def load_solution(path) -> tuple[Solution, dict | None]:
    """Read ``solution.json``; returns the solution and the embedded scenario mapping."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return solution_from_dict(doc), doc.get("scenario")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def export_solution(solution: Solution, scenario: Scenario, out_dir) -> dict:
    """Write the CSV tables and ``solution.json`` into ``out_dir``.

    Slots and users are numbered from 1 in the tables; ``-1`` marks a slot
    with no active user. Returns the written paths by name.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    N, delta = scenario.N, scenario.slot_duration_delta
    paths = {name: out / name for name in
             ("trajectory.csv", "schedule.csv", "power.csv", "rates.csv", "solution.json")}

    q = np.asarray(solution.trajectory)
    _write_csv(paths["trajectory.csv"], ["n", "t_seconds", "x_m", "y_m"],
               [[n, _fmt(n * delta), _fmt(q[n, 0]), _fmt(q[n, 1])] for n in range(N + 1)])

    A_D, A_U = solution.schedule.A_D, solution.schedule.A_U
    R_D, R_U = solution.relaxed_schedule.A_D, solution.relaxed_schedule.A_U
    header = (["n", "downlink_user", "uplink_user"]
              + [f"xd_relaxed_{j + 1}" for j in range(A_D.shape[0])]
              + [f"xu_relaxed_{i + 1}" for i in range(A_U.shape[0])])
    rows = []
    for n in range(N):
        d = np.flatnonzero(A_D[:, n] > 0.5)
        u = np.flatnonzero(A_U[:, n] > 0.5)
        rows.append([n + 1, int(d[0]) + 1 if d.size else -1, int(u[0]) + 1 if u.size else -1]
                    + [_fmt(v) for v in R_D[:, n]] + [_fmt(v) for v in R_U[:, n]])
    _write_csv(paths["schedule.csv"], header, rows)

    P = np.asarray(solution.power)
    _write_csv(paths["power.csv"], ["n", "i", "p_watts"],
               [[n + 1, i + 1, _fmt(P[i, n])] for n in range(N) for i in range(P.shape[0])])

    rd, ru = solution.rate_breakdown.per_slot(solution.schedule)
    _write_csv(paths["rates.csv"], ["n", "Rd_weighted", "Ru_weighted"],
               [[n + 1, _fmt(rd[n]), _fmt(ru[n])] for n in range(N)])

    doc = solution_to_dict(solution)
    doc["scenario"] = scenario.to_mapping()
    paths["solution.json"].write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return paths


def validate_solution(solution: Solution, scenario: Scenario, tol: float = 1e-9) -> list[str]:
    """Check a solution against the invariants of its scheme; returns problems found."""
    problems = []
    trace = list(solution.objective_trace)
    for r in range(1, len(trace)):
        if trace[r] < trace[r - 1] - tol:
            problems.append(f"objective trace decreases at pass {r + 1}")
    for name, A in (("A_D", solution.schedule.A_D), ("A_U", solution.schedule.A_U)):
        if not np.all((A == 0) | (A == 1)):
            problems.append(f"binary schedule {name} has non-binary entries")
        if np.any(A.sum(axis=0) > 1):
            problems.append(f"binary schedule {name} assigns several users in one slot")
    for name, A in (("A_D", solution.relaxed_schedule.A_D), ("A_U", solution.relaxed_schedule.A_U)):
        if np.any(A < -tol) or np.any(A > 1 + tol) or np.any(A.sum(axis=0) > 1 + tol):
            problems.append(f"relaxed schedule {name} leaves the unit simplex")
    P = np.asarray(solution.power)
    if np.any(P < 0) or np.any(P > scenario.max_uplink_power_Pmax * (1 + 1e-12)):
        problems.append("power outside [0, P_max]")
    q = np.asarray(solution.trajectory)
    if q.shape != (scenario.N + 1, 2):
        problems.append("trajectory has wrong shape")
    else:
        if max_violation(q, scenario.max_step) > FEAS_TOL:
            problems.append("trajectory exceeds the speed limit")
        if solution.scheme == SchemeId.STATIC.value:
            if not np.allclose(q, static_position(scenario)[None, :], atol=FEAS_TOL):
                problems.append("static trajectory is not the users' centroid")
        elif (np.linalg.norm(q[0] - scenario.q_initial) > FEAS_TOL
              or np.linalg.norm(q[-1] - scenario.q_final) > FEAS_TOL):
            problems.append("trajectory endpoints differ from q_initial/q_final")
        value, _ = objective(solution.schedule, q, P, scenario, model_for(solution.scheme))
        if not math.isclose(value, solution.final_binary_objective, rel_tol=1e-9, abs_tol=1e-9):
            problems.append("final_binary_objective does not match a re-evaluation")
    return problems


# ---------------------------------------------------------------------------
# sweeps

def parse_values(text: str) -> list[float]:
    """Parse ``start:stop:step`` ranges (stop inclusive) and comma lists."""
    values: list[float] = []
    for part in (p.strip() for p in text.split(",")):
        if not part:
            continue
        if ":" in part:
            bits = part.split(":")
            if len(bits) != 3:
                raise ValueError(f"range must be start:stop:step, got {part!r}")
            start, stop, step = (float(b) for b in bits)
            if step == 0 or (stop - start) * step < 0:
                raise ValueError(f"range {part!r} does not reach its stop value")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            values.extend(start + k * step for k in range(count))
        else:
            values.append(float(part))
    if not values:
        raise ValueError("empty value list")
    return values


def canonical_param(name: str) -> str:
    name = _PARAM_ALIASES.get(name, name)
    if name not in SWEEP_PARAMS:
        raise ValueError(f"unknown sweep parameter {name!r} (expected T, fb_db or H)")
    return name


def apply_override(scenario: Scenario, param: str, value: float) -> Scenario:
    field_name, convert = SWEEP_PARAMS[canonical_param(param)]
    return scenario.replace(**{field_name: convert(value)})


@dataclass
class SweepSpec:
    param: str
    values: list
    schemes: list
    scenario_path: str | os.PathLike
    out_dir: str | os.PathLike
    settings: ScaSettings = field(default_factory=ScaSettings)

    def __post_init__(self):
        self.param = canonical_param(self.param)
        if not self.values:
            raise ValueError("sweep needs at least one value")
        self.schemes = [SchemeId.parse(s) if isinstance(s, str) else s for s in self.schemes]
        if not self.schemes:
            raise ValueError("sweep needs at least one scheme")


def worker_count() -> int:
    raw = os.environ.get("FDUAV_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("ignoring non-integer FDUAV_THREADS=%r", raw)
        return 1


def _run_cell(base: Scenario, spec: SweepSpec, scheme: SchemeId, value: float) -> dict:
    row = {"scheme": scheme.value, "param": spec.param, "value": value}
    start = time.perf_counter()
    try:
        scenario = apply_override(base, spec.param, value)
        solution = run_scheme(scheme, scenario, spec.settings)
        cell_dir = Path(spec.out_dir) / "cells" / f"{scheme.value}__{spec.param}={value:g}"
        export_solution(solution, scenario, cell_dir)
        row.update(binary_objective=solution.final_binary_objective,
                   relaxed_objective=solution.final_relaxed_objective,
                   iterations=solution.iterations_used, status="ok", message="")
    except Exception as exc:  # recorded per cell; the sweep goes on
        logger.warning("sweep cell %s %s=%g failed: %s", scheme.value, spec.param, value, exc)
        row.update(binary_objective=float("nan"), relaxed_objective=float("nan"),
                   iterations=0, status="error", message=str(exc))
    row["wall_time_s"] = time.perf_counter() - start
    return row


def run_sweep(spec: SweepSpec, workers: int | None = None) -> list[dict]:
    """Run every (scheme, value) cell and write ``summary.csv`` and ``timings.csv``.

    ``summary.csv`` holds only deterministic columns; wall-clock times go to
    ``timings.csv``. Rows are sorted by (scheme, value).
    """
    base = load_scenario(spec.scenario_path)
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = [(scheme, float(v)) for scheme in spec.schemes for v in spec.values]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda c: _run_cell(base, spec, *c), cells))
    else:
        rows = [_run_cell(base, spec, *c) for c in cells]
    rows.sort(key=lambda r: (r["scheme"], r["value"]))

    def fmt(r, k):
        v = r[k]
        return _fmt(v) if isinstance(v, float) else v

    _write_csv(out / "summary.csv", SUMMARY_FIELDS, [[fmt(r, k) for k in SUMMARY_FIELDS] for r in rows])
    _write_csv(out / "timings.csv", ["scheme", "param", "value", "wall_time_s"],
               [[r["scheme"], r["param"], _fmt(r["value"]), f"{r['wall_time_s']:.3f}"] for r in rows])
    return rows


def read_summary(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
