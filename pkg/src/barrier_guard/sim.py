"""Fixed-step closed-loop simulation and runtime monitors.

Integration is classical RK4 with the input held constant over each step
(zero-order hold); the monitors recompute every claimed property from the
recorded trajectory so a run can be audited after the fact. Statements about
set attraction are empirical observations of the recorded data, never
analytic certificates.
"""

import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import kernels
from .geometry import AnnulusShell, eval_c
from .qp import QpProblem, solve_stacked_qp
from .scenarios import Scenario

log = logging.getLogger(__name__)

MODES = ("blended", "nominal_only", "safety_only", "stacked_qp")

SAFETY_SLACK = 1e-9  # hold-induced dips below this are integration noise
H_DECREASE_TOL = 1e-6


class IntegrationError(RuntimeError):
    pass


def rk4_step(flow, x, u, dt: float, wrap=None) -> np.ndarray:
    """One classical RK4 step of xdot = flow(x, u) with u held constant."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    x = np.asarray(x, dtype=float)
    k1 = np.asarray(flow(x, u), dtype=float)
    k2 = np.asarray(flow(x + 0.5 * dt * k1, u), dtype=float)
    k3 = np.asarray(flow(x + 0.5 * dt * k2, u), dtype=float)
    k4 = np.asarray(flow(x + dt * k3, u), dtype=float)
    x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(x_next)):
        raise IntegrationError(f"non-finite state after step: x={x}, u={u}, dt={dt}")
    if wrap is not None:
        x_next = wrap(x_next)
    return x_next


def distance_to_set(shell: AnnulusShell, z) -> float:
    """Euclidean distance from z to the constraint set of the shell's ellipsoid.

    Zero inside the set; outside, the boundary ellipse is scanned coarsely and
    the nearest point refined by golden-section search (about 1e-9 accurate,
    which is plenty for trend monitoring).
    """
    z = np.asarray(z, dtype=float)
    ell = shell.ellipsoid
    if eval_c(ell, z) >= 0.0:
        return 0.0
    evals, vecs = np.linalg.eigh(ell.P)
    radii = np.sqrt(2.0 * ell.delta**2 / evals)
    axes = vecs * radii[None, :]  # columns map (cos s, sin s) to the boundary

    def boundary(sv):
        return ell.center[:, None] + axes @ np.stack([np.cos(sv), np.sin(sv)])

    coarse = np.linspace(0.0, 2.0 * np.pi, 512, endpoint=False)
    d2 = ((boundary(coarse) - z[:, None]) ** 2).sum(axis=0)
    i = int(np.argmin(d2))
    span = 2.0 * np.pi / 512
    lo, hi = coarse[i] - span, coarse[i] + span

    def f(sv):
        p = ell.center + axes @ np.array([np.cos(sv), np.sin(sv)])
        return float(((p - z) ** 2).sum())

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(60):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = f(d)
    return float(np.sqrt(min(fc, fd)))


@dataclass(frozen=True)
class Trajectory:
    mode: str
    x0: np.ndarray
    dt: float
    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    u_noms: np.ndarray
    h: np.ndarray
    phi: np.ndarray
    active: np.ndarray
    status: int
    fail_step: int
    qp_infeasible_steps: np.ndarray

    @property
    def completed(self) -> bool:
        return self.status == kernels.STATUS_OK

    @property
    def n_steps(self) -> int:
        return self.times.shape[0] - 1


@dataclass(frozen=True)
class MonitorReport:
    """Post-hoc audit of a trajectory; all fields recomputed from recorded data.

    The set-attraction fields are labelled empirical: they report what the
    sampled run did, not a proof over the continuum.
    """

    mode: str
    min_h: np.ndarray
    min_h_overall: float
    max_abs_u: np.ndarray
    input_box_ok: bool
    safety_ok: bool
    h_decrease_violations: np.ndarray
    disjointness_ok: bool
    completed: bool
    qp_infeasible_count: int
    robustness_barrier: Optional[int] = None
    robustness_distances: Optional[np.ndarray] = None
    robustness_label: str = "empirical"


@dataclass(frozen=True)
class RunResult:
    trajectory: Trajectory
    monitor: MonitorReport


def _monitor(traj: Trajectory, scenario: Scenario, robustness: bool) -> MonitorReport:
    box = scenario.box
    in_box = np.all((traj.inputs >= box.lower) & (traj.inputs <= box.upper))
    min_h = traj.h.min(axis=0)

    nbar = scenario.n_barriers
    violations = np.zeros(nbar, dtype=int)
    act = traj.active[:-1]
    dh = traj.h[1:] - traj.h[:-1]
    for i in range(nbar):
        mask = act == i
        if mask.any():
            violations[i] = int(np.count_nonzero(dh[mask, i] < -H_DECREASE_TOL))

    rob_barrier = None
    rob_dist = None
    if robustness:
        first_h = traj.h[0]
        neg = np.nonzero(first_h < 0)[0]
        if neg.size:
            rob_barrier = int(neg[0])
            shell = scenario.barriers[rob_barrier].shell
            rob_dist = np.array([distance_to_set(shell, st[:2]) for st in traj.states])

    return MonitorReport(
        mode=traj.mode,
        min_h=min_h,
        min_h_overall=float(min_h.min()) if min_h.size else np.inf,
        max_abs_u=np.abs(traj.inputs).max(axis=0),
        input_box_ok=bool(in_box),
        safety_ok=bool(min_h.min() >= -SAFETY_SLACK) if min_h.size else True,
        h_decrease_violations=violations,
        disjointness_ok=traj.status != kernels.STATUS_DISJOINT,
        completed=traj.completed,
        qp_infeasible_count=int(traj.qp_infeasible_steps.shape[0]),
        robustness_barrier=rob_barrier,
        robustness_distances=rob_dist,
    )


def _from_sim_output(out: kernels.SimOutput, mode: str, x0, dt: float) -> Trajectory:
    n = out.states.shape[0]
    return Trajectory(
        mode=mode,
        x0=np.asarray(x0, dtype=float),
        dt=dt,
        times=np.arange(n) * dt,
        states=out.states,
        inputs=out.inputs,
        u_noms=out.u_noms,
        h=out.h,
        phi=out.phi,
        active=out.active,
        status=out.status,
        fail_step=out.fail_step,
        qp_infeasible_steps=np.zeros(0, dtype=int),
    )


def _run_stacked_qp(scenario: Scenario, x0, backend: Optional[str]) -> Trajectory:
    bars = scenario.pack()
    nominal = scenario.nominal_fn()
    n = scenario.n_steps
    dt = scenario.dt
    states = np.empty((n + 1, 3))
    inputs = np.empty((n + 1, 2))
    u_noms = np.empty((n + 1, 2))
    hs = np.empty((n + 1, bars.n))
    infeasible: List[int] = []

    box = scenario.box
    x = np.asarray(x0, dtype=float).copy()
    u_prev = np.zeros(2)
    status = kernels.STATUS_OK
    fail_step = -1
    n_rec = 0
    for k in range(n + 1):
        u_nom = nominal(x)
        rows, rhs, h = kernels.barrier_qp_rows(x, bars)
        hs[k] = h
        feasible_nom = box.contains(u_nom) and np.all(rows @ u_nom >= rhs - 1e-12)
        if feasible_nom:
            u = np.asarray(u_nom, dtype=float)
        else:
            problem = QpProblem(
                u_nom=u_nom,
                half_spaces=[(rows[i], rhs[i]) for i in range(bars.n)],
                box=box,
            )
            sol = solve_stacked_qp(problem)
            if sol.infeasible:
                infeasible.append(k)
                u = u_prev.copy()  # hold the previous input
                log.warning("stacked QP infeasible at step %d (t=%.4f); holding input", k, k * dt)
            else:
                u = sol.u
        states[k] = x
        inputs[k] = u
        u_noms[k] = u_nom
        n_rec = k + 1
        u_prev = u
        if k < n:
            x = kernels.rk4_unicycle_step(x, u, dt)
            if not np.all(np.isfinite(x)):
                status = kernels.STATUS_NONFINITE
                fail_step = k + 1
                break
    return Trajectory(
        mode="stacked_qp",
        x0=np.asarray(x0, dtype=float),
        dt=dt,
        times=np.arange(n_rec) * dt,
        states=states[:n_rec],
        inputs=inputs[:n_rec],
        u_noms=u_noms[:n_rec],
        h=hs[:n_rec],
        phi=np.full(n_rec, np.nan),
        active=np.full(n_rec, -1, dtype=np.int64),
        status=status,
        fail_step=fail_step,
        qp_infeasible_steps=np.asarray(infeasible, dtype=int),
    )


def run_single(
    scenario: Scenario,
    x0,
    mode: str,
    backend: Optional[str] = None,
    horizon: Optional[float] = None,
) -> RunResult:
    """Integrate one initial state under the given controller mode."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    dt = scenario.dt
    n_steps = int(round((horizon if horizon is not None else scenario.horizon) / dt))
    robustness = bool(np.any(kernels.eval_h_batch(np.asarray(x0)[:2], scenario.pack()) < 0))
    if mode == "stacked_qp":
        traj = _run_stacked_qp(scenario, x0, backend)
    else:
        k_r, k_a = scenario.nominal_gains()
        out = kernels.run_simulation(
            x_init=x0,
            n_steps=n_steps,
            dt=dt,
            mode=kernels.MODE_IDS["tabulated" if mode == "tabulated" else mode],
            bars=scenario.pack(),
            k_r=k_r,
            k_a=k_a,
            backend=backend,
        )
        traj = _from_sim_output(out, mode, x0, dt)
    return RunResult(trajectory=traj, monitor=_monitor(traj, scenario, robustness))


def replay_tabulated(
    scenario: Scenario,
    x0,
    u_nom_log: np.ndarray,
    backend: Optional[str] = None,
    dt: Optional[float] = None,
) -> RunResult:
    """Blended rollout with a tabulated nominal input (one row per step).

    This is the offline twin of a live teleop session: feeding the recorded
    per-step nominal inputs back through the same kernel reproduces the
    session's state sequence. ``dt`` defaults to the scenario integration
    step; pass the session's step to replay a live run.
    """
    u_nom_log = np.asarray(u_nom_log, dtype=float)
    n_steps = u_nom_log.shape[0] - 1
    dt = scenario.dt if dt is None else dt
    out = kernels.run_simulation(
        x_init=x0,
        n_steps=n_steps,
        dt=dt,
        mode=kernels.MODE_TABULATED,
        bars=scenario.pack(),
        u_tab=u_nom_log,
        backend=backend,
    )
    traj = _from_sim_output(out, "blended", x0, dt)
    return RunResult(trajectory=traj, monitor=_monitor(traj, scenario, False))


def run_scenario(
    scenario: Scenario,
    mode: str,
    backend: Optional[str] = None,
    states: Optional[Sequence] = None,
    horizon: Optional[float] = None,
) -> List[RunResult]:
    """Run every relevant initial state; safety_only defaults to the robustness states."""
    if states is None:
        states = scenario.robustness_states if mode == "safety_only" else scenario.initial_states
    return [run_single(scenario, x0, mode, backend=backend, horizon=horizon) for x0 in states]


def time_controller_step(
    scenario: Scenario, mode: str, x, repeats: int = 1000, backend: Optional[str] = None
) -> float:
    """Mean wall-clock seconds per controller evaluation at state x."""
    bars = scenario.pack()
    nominal = scenario.nominal_fn()
    x = np.asarray(x, dtype=float)
    u_nom = nominal(x)
    if mode == "stacked_qp":
        rows, rhs, _ = kernels.barrier_qp_rows(x, bars)

        def step():
            problem = QpProblem(
                u_nom=u_nom,
                half_spaces=[(rows[i], rhs[i]) for i in range(bars.n)],
                box=scenario.box,
            )
            solve_stacked_qp(problem)

    else:

        def step():
            kernels.controller_step(x, u_nom, bars, backend=backend)

    step()  # warm / compile
    t0 = time.perf_counter()
    for _ in range(repeats):
        step()
    return (time.perf_counter() - t0) / repeats
