"""Trajectory, monitor and plot-data file writers.

CSV columns: t, x1, x2, x3, u_p, u_d, h_1..h_N, phi_bar, active_barrier.
Floats are written with 17 significant digits so a read-back reproduces the
values exactly (well inside the 1e-12 round-trip requirement). Plot data is
point lists only: boundary and both annulus level sets per barrier.
"""

import json
from typing import List

import numpy as np

from .geometry import level_set_points
from .scenarios import Scenario
from .sim import MonitorReport, RunResult, Trajectory


def trajectory_header(n_barriers: int) -> List[str]:
    cols = ["t", "x1", "x2", "x3", "u_p", "u_d"]
    cols += [f"h_{i + 1}" for i in range(n_barriers)]
    cols += ["phi_bar", "active_barrier"]
    return cols


def write_trajectory_csv(path, traj: Trajectory):
    nbar = traj.h.shape[1]
    with open(path, "w") as fh:
        fh.write(",".join(trajectory_header(nbar)) + "\n")
        for k in range(traj.times.shape[0]):
            row = [traj.times[k], *traj.states[k], *traj.inputs[k], *traj.h[k], traj.phi[k]]
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write(f",{int(traj.active[k])}\n")


def read_trajectory_csv(path):
    """Read back a trajectory CSV as (header, float matrix)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data


def monitor_to_dict(m: MonitorReport) -> dict:
    out = {
        "mode": m.mode,
        "min_h": m.min_h.tolist(),
        "min_h_overall": m.min_h_overall,
        "max_abs_u": m.max_abs_u.tolist(),
        "input_box": "pass" if m.input_box_ok else "fail",
        "safety": "pass" if m.safety_ok else "fail",
        "h_decrease_violations": m.h_decrease_violations.tolist(),
        "disjointness": "pass" if m.disjointness_ok else "fail",
        "completed": m.completed,
        "qp_infeasible_count": m.qp_infeasible_count,
    }
    if m.robustness_barrier is not None:
        out["robustness"] = {
            "label": m.robustness_label,
            "barrier": m.robustness_barrier,
            "distance_start": float(m.robustness_distances[0]),
            "distance_end": float(m.robustness_distances[-1]),
            "distance_max_step_increase": float(
                np.diff(m.robustness_distances).max() if m.robustness_distances.size > 1 else 0.0
            ),
        }
    return out


def write_monitor_json(path, results: List[RunResult]):
    payload = {
        "runs": [monitor_to_dict(r.monitor) for r in results],
        "all_safety_pass": all(r.monitor.safety_ok for r in results),
        "all_input_box_pass": all(r.monitor.input_box_ok for r in results),
    }
    failures = [
        {"run": i, "first_violation_time": _first_violation_time(r.trajectory)}
        for i, r in enumerate(results)
        if not r.monitor.safety_ok
    ]
    if failures:
        payload["safety_failures"] = failures
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    return payload


def _first_violation_time(traj: Trajectory):
    bad = np.nonzero((traj.h < -1e-9).any(axis=1))[0]
    return float(traj.times[bad[0]]) if bad.size else None


def write_plot_data(path, scenario: Scenario, n_points: int = 512):
    """Boundary and annulus level-set polylines for redrawing the field."""
    barriers = []
    for i, bar in enumerate(scenario.barriers):
        ell = bar.shell.ellipsoid
        barriers.append(
            {
                "index": i,
                "gamma": ell.gamma,
                "boundary": level_set_points(ell, 0.0, n_points).tolist(),
                "level_a": level_set_points(ell, bar.shell.a, n_points).tolist(),
                "level_b": level_set_points(ell, -bar.shell.b, n_points).tolist(),
            }
        )
    payload = {
        "scenario": scenario.name,
        "input_box": {
            "lower": scenario.box.lower.tolist(),
            "upper": scenario.box.upper.tolist(),
        },
        "barriers": barriers,
        "initial_states": scenario.initial_states.tolist(),
        "robustness_states": scenario.robustness_states.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")
    return payload
