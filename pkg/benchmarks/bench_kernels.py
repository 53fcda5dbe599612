#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the full closed-loop rollout and the single controller evaluation on
the shipped obstacle field. Run directly; set BARRIER_GUARD_NUMBA=0 to check
what the fallback path alone would cost (this script always times both
explicitly when numba is importable).
"""

import time

import numpy as np

from barrier_guard._accel import NUMBA_AVAILABLE
from barrier_guard.kernels import MODE_BLENDED, controller_step, run_simulation
from barrier_guard.scenarios import load_shipped_scenario


def time_rollout(scenario, backend, n_steps, repeats=3):
    bars = scenario.pack()
    k_r, k_a = scenario.nominal_gains()
    x0 = scenario.initial_states[0]
    run_simulation(x0, 10, scenario.dt, MODE_BLENDED, bars, k_r=k_r, k_a=k_a,
                   backend=backend)  # warm / compile
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = run_simulation(x0, n_steps, scenario.dt, MODE_BLENDED, bars,
                             k_r=k_r, k_a=k_a, backend=backend)
        best = min(best, time.perf_counter() - t0)
        assert out.status == 0
    return best


def time_step(scenario, backend, repeats=20_000):
    bars = scenario.pack()
    x = np.array([*scenario.barriers[1].shell.point_at(0.2, 0.3), 0.4])
    u_nom = np.array([1.0, 0.3])
    controller_step(x, u_nom, bars, backend=backend)
    t0 = time.perf_counter()
    for _ in range(repeats):
        controller_step(x, u_nom, bars, backend=backend)
    return (time.perf_counter() - t0) / repeats


def main():
    scenario = load_shipped_scenario()
    n_steps = scenario.n_steps  # 30 s at 1 ms
    backends = ["numpy"] + (["numba"] if NUMBA_AVAILABLE else [])
    print(f"scenario: {scenario.name} ({scenario.n_barriers} barriers, "
          f"{n_steps} steps per rollout)\n")
    print(f"{'backend':<10}{'rollout_s':>12}{'steps_per_s':>14}{'ctrl_step_us':>14}")
    rollout = {}
    for backend in backends:
        r = time_rollout(scenario, backend, n_steps)
        s = time_step(scenario, backend)
        rollout[backend] = r
        print(f"{backend:<10}{r:>12.4f}{n_steps / r:>14.0f}{s * 1e6:>14.2f}")
    if "numba" in rollout:
        print(f"\nspeedup (rollout): {rollout['numpy'] / rollout['numba']:.1f}x")


if __name__ == "__main__":
    main()
