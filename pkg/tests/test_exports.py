import json

import numpy as np
import pytest

from barrier_guard.exports import (
    monitor_to_dict,
    read_trajectory_csv,
    trajectory_header,
    write_monitor_json,
    write_plot_data,
    write_trajectory_csv,
)
from barrier_guard.geometry import eval_c
from barrier_guard.scenarios import load_shipped_scenario
from barrier_guard.sim import run_single


@pytest.fixture(scope="module")
def scenario():
    return load_shipped_scenario()


@pytest.fixture(scope="module")
def result(scenario):
    return run_single(scenario, scenario.initial_states[0], "blended", horizon=0.5)


class TestTrajectoryCsv:
    def test_round_trip_exact(self, tmp_path, result, scenario):
        path = tmp_path / "traj.csv"
        write_trajectory_csv(path, result.trajectory)
        header, data = read_trajectory_csv(path)
        assert header == trajectory_header(scenario.n_barriers)
        traj = result.trajectory
        n = scenario.n_barriers
        assert np.max(np.abs(data[:, 0] - traj.times)) <= 1e-12
        assert np.max(np.abs(data[:, 1:4] - traj.states)) <= 1e-12
        assert np.max(np.abs(data[:, 4:6] - traj.inputs)) <= 1e-12
        assert np.max(np.abs(data[:, 6 : 6 + n] - traj.h)) <= 1e-12
        assert np.max(np.abs(data[:, 6 + n] - traj.phi)) <= 1e-12
        assert np.array_equal(data[:, 7 + n].astype(int), traj.active)

    def test_one_row_per_step(self, tmp_path, result):
        path = tmp_path / "traj.csv"
        write_trajectory_csv(path, result.trajectory)
        with open(path) as fh:
            rows = fh.read().strip().split("\n")
        assert len(rows) == 1 + result.trajectory.times.shape[0]


class TestMonitorJson:
    def test_pass_fields(self, tmp_path, result):
        payload = write_monitor_json(tmp_path / "m.json", [result])
        assert payload["runs"][0]["safety"] == "pass"
        assert payload["runs"][0]["input_box"] == "pass"
        with open(tmp_path / "m.json") as fh:
            assert json.load(fh) == payload

    def test_failure_records_first_violation_time(self, tmp_path, scenario):
        bad = run_single(scenario, scenario.initial_states[0], "nominal_only", horizon=15.0)
        payload = write_monitor_json(tmp_path / "m.json", [bad])
        assert payload["runs"][0]["safety"] == "fail"
        t = payload["safety_failures"][0]["first_violation_time"]
        assert t is not None and 0.0 < t < 15.0

    def test_monitor_dict_includes_robustness_trend(self, scenario):
        r = run_single(scenario, scenario.robustness_states[0], "safety_only", horizon=0.2)
        d = monitor_to_dict(r.monitor)
        assert d["robustness"]["label"] == "empirical"


class TestPlotData:
    def test_polylines_lie_on_levels(self, tmp_path, scenario):
        payload = write_plot_data(tmp_path / "plot.json", scenario, n_points=64)
        assert len(payload["barriers"]) == scenario.n_barriers
        for entry in payload["barriers"]:
            bar = scenario.barriers[entry["index"]]
            for key, lev in (("boundary", 0.0), ("level_a", bar.shell.a), ("level_b", -bar.shell.b)):
                pts = np.asarray(entry[key])
                assert pts.shape == (64, 2)
                vals = [eval_c(bar.shell.ellipsoid, p) for p in pts]
                assert np.max(np.abs(np.asarray(vals) - lev)) < 1e-9
