"""Command-line interface.

Subcommands: validate (schema + geometry + gains, exit 2 on failure),
run (integrate a scenario and write CSV/JSON/plot-data artifacts, exit 3 on
runtime monitor failure), compare (per-mode metrics table), serve (teleop
WebSocket server). BARRIER_GUARD_LOG sets the log level.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .exports import write_monitor_json, write_plot_data, write_trajectory_csv
from .kernels import controller_step, barrier_qp_rows
from .qp import QpProblem, lipschitz_probe, solve_stacked_qp
from .scenarios import ScenarioError, load_scenario, validate_scenario
from .sim import MODES, run_scenario, time_controller_step

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_MONITOR = 3

log = logging.getLogger(__name__)


def _setup_logging():
    level = os.environ.get("BARRIER_GUARD_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load_validated(path, dt=None, horizon=None, seed=None):
    try:
        scenario = load_scenario(path)
    except (OSError, ScenarioError, ValueError, KeyError) as exc:
        print(f"scenario load failed: {exc}", file=sys.stderr)
        return None
    overrides = {}
    if dt is not None:
        overrides["dt"] = dt
    if horizon is not None:
        overrides["horizon"] = horizon
    if seed is not None:
        overrides["seed"] = seed
    if overrides:
        scenario = replace(scenario, **overrides)
    report = validate_scenario(scenario)
    if not report.passed:
        for issue in report.issues:
            print(f"validation failure [{issue.code}]: {issue.message}", file=sys.stderr)
        return None
    return scenario


def cmd_validate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except (OSError, ScenarioError, ValueError, KeyError) as exc:
        print(f"FAIL parse: {exc}")
        return EXIT_VALIDATION
    report = validate_scenario(scenario, resolution=args.resolution)
    n_safe = scenario.initial_states.shape[0]
    n_rob = scenario.robustness_states.shape[0]
    print(f"scenario {scenario.name!r}: {scenario.n_barriers} barriers, "
          f"{n_safe} safe starts, {n_rob} robustness starts")
    print(f"annulus disjointness margin: {report.min_disjoint_margin:.6g}")
    if report.passed:
        print("PASS")
        return EXIT_OK
    for issue in report.issues:
        print(f"FAIL [{issue.code}] {issue.message}")
    return EXIT_VALIDATION


def cmd_run(args) -> int:
    scenario = _load_validated(args.scenario, args.dt, args.horizon, args.seed)
    if scenario is None:
        return EXIT_VALIDATION
    os.makedirs(args.out, exist_ok=True)
    states = None
    if args.states == "robustness":
        states = scenario.robustness_states
    elif args.states == "all":
        states = np.vstack([scenario.initial_states, scenario.robustness_states])
    elif args.states == "initial":
        states = scenario.initial_states
    results = run_scenario(scenario, args.mode, backend=args.backend, states=states)

    for k, res in enumerate(results):
        write_trajectory_csv(os.path.join(args.out, f"trajectory_{k}.csv"), res.trajectory)
    payload = write_monitor_json(os.path.join(args.out, "monitors.json"), results)
    write_plot_data(os.path.join(args.out, "plot_data.json"), scenario)

    failed = False
    for k, res in enumerate(results):
        m = res.monitor
        line = (f"run {k}: safety={'pass' if m.safety_ok else 'fail'} "
                f"input_box={'pass' if m.input_box_ok else 'fail'} "
                f"min_h={m.min_h_overall:.3e} max|u|=({m.max_abs_u[0]:.3f}, {m.max_abs_u[1]:.3f})")
        if not m.safety_ok and payload.get("safety_failures"):
            hits = [f for f in payload["safety_failures"] if f["run"] == k]
            if hits:
                line += f" first_violation_t={hits[0]['first_violation_time']:.3f}s"
        print(line)
        hard_fail = not m.completed or not m.disjointness_ok or not m.input_box_ok
        if args.mode != "nominal_only":  # the baseline violates by design
            if m.robustness_barrier is not None:
                # started inside an obstacle on purpose: gate on recovery
                hard_fail = hard_fail or int(m.h_decrease_violations.sum()) > 0
            else:
                hard_fail = hard_fail or not m.safety_ok
        failed = failed or hard_fail
    print(f"artifacts written to {args.out}")
    return EXIT_MONITOR if failed else EXIT_OK


def _probe_region(scenario):
    # bounding box of the obstacle shells (heading free): where blending happens
    lo = np.array([np.inf, np.inf])
    hi = -np.array([np.inf, np.inf])
    for bar in scenario.barriers[1:] or scenario.barriers:
        ell = bar.shell.ellipsoid
        reach = np.sqrt(2.0 * (ell.delta**2 + max(bar.shell.a, bar.shell.b))
                        / np.linalg.eigvalsh(ell.P)[0])
        lo = np.minimum(lo, ell.center - reach)
        hi = np.maximum(hi, ell.center + reach)
    return [(lo[0], hi[0]), (lo[1], hi[1]), (-np.pi, np.pi)]


def _mode_controller(scenario, mode):
    bars = scenario.pack()
    nominal = scenario.nominal_fn()
    if mode == "stacked_qp":
        def ctrl(x):
            rows, rhs, _ = barrier_qp_rows(x, bars)
            sol = solve_stacked_qp(QpProblem(
                u_nom=nominal(x),
                half_spaces=[(rows[i], rhs[i]) for i in range(bars.n)],
                box=scenario.box,
            ))
            return sol.u if not sol.infeasible else np.zeros(2)
        return ctrl
    if mode == "nominal_only":
        return nominal
    if mode == "safety_only":
        return lambda x: controller_step(x, np.zeros(2), bars)[0]
    return lambda x: controller_step(x, nominal(x), bars)[0]


def _cmd_sweep(args) -> int:
    from .scenarios import synthetic_ring_scenario

    sizes = []
    for tok in args.sweep.split(","):
        tok = tok.strip()
        if tok:
            sizes.append(int(tok))
    print(f"{'N':>4}{'blend_us':>12}{'stacked_us':>12}")
    for n in sizes:
        s = synthetic_ring_scenario(n)
        x = np.array([*s.barriers[0].shell.point_at(0.2, 0.3), 0.25])
        t_blend = time_controller_step(s, "blended", x, repeats=args.repeats)
        t_qp = time_controller_step(s, "stacked_qp", x, repeats=max(10, args.repeats // 10))
        print(f"{n:>4}{t_blend * 1e6:>12.2f}{t_qp * 1e6:>12.2f}")
    return EXIT_OK


def cmd_compare(args) -> int:
    if args.sweep:
        return _cmd_sweep(args)
    scenario = _load_validated(args.scenario, horizon=args.horizon)
    if scenario is None:
        return EXIT_VALIDATION
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    for m in modes:
        if m not in MODES:
            print(f"unknown mode {m!r}; choose from {MODES}", file=sys.stderr)
            return EXIT_VALIDATION

    rng = np.random.default_rng(scenario.seed)
    region = _probe_region(scenario)
    probe_x = scenario.initial_states[0]
    rows = []
    for mode in modes:
        results = run_scenario(scenario, mode, backend=args.backend)
        min_h = min(r.monitor.min_h_overall for r in results)
        max_u = max(r.monitor.max_abs_u.max() for r in results)
        step_time = time_controller_step(scenario, mode, probe_x, repeats=args.repeats)
        bound = lipschitz_probe(_mode_controller(scenario, mode), region, args.pairs,
                                np.random.default_rng(scenario.seed))
        rows.append((mode, min_h, max_u, step_time, bound))

    header = f"{'mode':<14}{'min_h':>12}{'max|u|':>10}{'step_time_us':>14}{'lipschitz':>12}"
    print(header)
    print("-" * len(header))
    for mode, min_h, max_u, t, bound in rows:
        print(f"{mode:<14}{min_h:>12.3e}{max_u:>10.4f}{t * 1e6:>14.2f}{bound:>12.3f}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(
                [{"mode": m, "min_h": h, "max_abs_u": u, "step_time_s": t,
                  "lipschitz_bound": b} for m, h, u, t, b in rows],
                fh, indent=1)
        print(f"table written to {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .teleop import serve

    scenarios = None
    if args.scenario:
        scenario = _load_validated(args.scenario)
        if scenario is None:
            return EXIT_VALIDATION
        scenarios = {scenario.name: scenario}
    serve(port=args.port, scenarios=scenarios, log_dir=args.log_dir,
          static_dir=args.static_dir, host=args.host)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="barrier-guard",
        description="Safety-filtered unicycle simulation and teleoperation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file (exit 2 on failure)")
    p.add_argument("scenario")
    p.add_argument("--resolution", type=int, default=256,
                   help="polar grid resolution for the disjointness test")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="integrate a scenario and write artifacts")
    p.add_argument("scenario")
    p.add_argument("--mode", choices=MODES, default="blended")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--backend", choices=["numba", "numpy"], default=None)
    p.add_argument("--states", choices=["default", "initial", "robustness", "all"],
                   default="default",
                   help="default: robustness starts for safety_only, safe starts otherwise")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="per-mode metric table")
    p.add_argument("scenario")
    p.add_argument("--modes", default="blended,stacked_qp")
    p.add_argument("--sweep", default=None, metavar="N1,N2,...",
                   help="instead: per-step solve-time table on synthetic N-barrier rings")
    p.add_argument("--horizon", type=float, default=None)
    p.add_argument("--pairs", type=int, default=10_000,
                   help="close pairs for the Lipschitz probe")
    p.add_argument("--repeats", type=int, default=300,
                   help="controller evaluations per timing measurement")
    p.add_argument("--backend", choices=["numba", "numpy"], default=None)
    p.add_argument("--out", default=None, help="also write the table as JSON")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("serve", help="teleoperation WebSocket server")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--scenario", default=None, help="scenario file (default: shipped field)")
    p.add_argument("--log-dir", default=None, help="write per-session replay logs here")
    p.add_argument("--static-dir", default=None, help="serve the web client from this directory")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
