"""Hot simulation kernels for the unicycle obstacle field.

The object layer (:mod:`barrier_core`, :mod:`plants`) stays fully general;
these kernels duplicate the unicycle closed loop on packed barrier arrays so
a 30 s / 1 ms trajectory costs milliseconds. The numba path compiles the
scalar functions below; the numpy fallback vectorizes over barriers per step.
Select with ``BARRIER_GUARD_NUMBA=0`` or the explicit ``backend`` argument.
benchmarks/bench_kernels.py compares the two.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._accel import USING_NUMBA, maybe_njit

MODE_BLENDED = 0
MODE_NOMINAL = 1
MODE_SAFETY = 2
MODE_TABULATED = 3

MODE_IDS = {
    "blended": MODE_BLENDED,
    "nominal_only": MODE_NOMINAL,
    "safety_only": MODE_SAFETY,
    "tabulated": MODE_TABULATED,
}

STATUS_OK = 0
STATUS_DISJOINT = 1
STATUS_NONFINITE = 2

GOAL_RADIUS = 1e-9
ALPHA_TAYLOR_GUARD = 1e-6


@dataclass(frozen=True)
class BarrierArrays:
    """Packed ellipsoid barriers: one row per barrier, SPD 2x2 P matrices."""

    gammas: np.ndarray  # (N,) +-1.0
    deltas2: np.ndarray  # (N,) delta^2
    Ps: np.ndarray  # (N, 2, 2)
    centers: np.ndarray  # (N, 2)
    a: np.ndarray  # (N,)
    b: np.ndarray  # (N,)
    kp: np.ndarray  # (N,)
    kd: np.ndarray  # (N,)
    alpha: np.ndarray  # (N,) linear class-K gains, used by the QP rows

    @property
    def n(self) -> int:
        return self.gammas.shape[0]


# ---------------------------------------------------------------------------
# scalar kernels (numba-compiled on the accelerated path)
# ---------------------------------------------------------------------------

@maybe_njit
def _wrap_heading(t):
    w = (t + np.pi) % (2.0 * np.pi) - np.pi
    if w == -np.pi:
        w = np.pi
    return w


@maybe_njit
def _phi(h, a):
    if h < 0.0:
        return 0.0
    if h > a:
        return 1.0
    s = h / a
    return (3.0 - 2.0 * s) * s * s


@maybe_njit
def _aicardi(x0, x1, x3, k_r, k_a):
    r = np.sqrt(x0 * x0 + x1 * x1)
    if r < GOAL_RADIUS:
        return 0.0, 0.0
    theta = np.arctan2(x1, x0)
    alpha = _wrap_heading(x3 - theta)
    cos_a = np.cos(alpha)
    u_p = -k_r * r * cos_a
    if abs(alpha) < ALPHA_TAYLOR_GUARD:
        swirl = cos_a * cos_a
    else:
        swirl = np.sin(alpha) * cos_a / alpha
    u_d = -k_a * alpha - k_r * swirl * (alpha - theta)
    return u_p, u_d


@maybe_njit
def _eval_h(x0, x1, gammas, deltas2, Ps, centers, out_h):
    for i in range(gammas.shape[0]):
        e0 = x0 - centers[i, 0]
        e1 = x1 - centers[i, 1]
        pe0 = Ps[i, 0, 0] * e0 + Ps[i, 0, 1] * e1
        pe1 = Ps[i, 1, 0] * e0 + Ps[i, 1, 1] * e1
        out_h[i] = gammas[i] * (deltas2[i] - 0.5 * (e0 * pe0 + e1 * pe1))


@maybe_njit
def _controller(x0, x1, x3, un0, un1, gammas, deltas2, Ps, centers, avec, bvec, kp, kd, out_h):
    """Multi-barrier blend at one state; active = -1 outside all annuli, -2 on overlap."""
    _eval_h(x0, x1, gammas, deltas2, Ps, centers, out_h)
    active = -1
    for i in range(gammas.shape[0]):
        if out_h[i] >= -bvec[i] and out_h[i] <= avec[i]:
            if active >= 0:
                return un0, un1, 1.0, -2
            active = i
    if active == -1:
        return un0, un1, 1.0, -1

    c = out_h[active]
    w = _phi(c, avec[active])
    e0 = x0 - centers[active, 0]
    e1 = x1 - centers[active, 1]
    pe0 = Ps[active, 0, 0] * e0 + Ps[active, 0, 1] * e1
    pe1 = Ps[active, 1, 0] * e0 + Ps[active, 1, 1] * e1
    cos3 = np.cos(x3)
    sin3 = np.sin(x3)
    along = pe0 * cos3 + pe1 * sin3
    across = -pe0 * sin3 + pe1 * cos3
    sign = 1.0 if c >= 0.0 else -1.0
    us0 = -sign * kp[active] * gammas[active] * c * along
    us1 = -kd[active] * across
    if w >= 1.0:
        return un0, un1, 1.0, active
    if w <= 0.0:
        return us0, us1, 0.0, active
    return (1.0 - w) * us0 + w * un0, (1.0 - w) * us1 + w * un1, w, active


@maybe_njit
def _rk4_unicycle(x0, x1, x3, u0, u1, dt):
    k1x = u0 * np.cos(x3)
    k1y = u0 * np.sin(x3)
    a2 = x3 + 0.5 * dt * u1
    k2x = u0 * np.cos(a2)
    k2y = u0 * np.sin(a2)
    a3 = x3 + 0.5 * dt * u1
    k3x = u0 * np.cos(a3)
    k3y = u0 * np.sin(a3)
    a4 = x3 + dt * u1
    k4x = u0 * np.cos(a4)
    k4y = u0 * np.sin(a4)
    nx0 = x0 + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    nx1 = x1 + (dt / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    nx3 = x3 + (dt / 6.0) * 6.0 * u1
    return nx0, nx1, _wrap_heading(nx3)


@maybe_njit
def _simulate(
    x_init, n_steps, dt, mode, k_r, k_a, u_tab,
    gammas, deltas2, Ps, centers, avec, bvec, kp, kd,
):
    nbar = gammas.shape[0]
    states = np.empty((n_steps + 1, 3))
    inputs = np.empty((n_steps + 1, 2))
    u_noms = np.empty((n_steps + 1, 2))
    hs = np.empty((n_steps + 1, nbar))
    phis = np.empty(n_steps + 1)
    actives = np.empty(n_steps + 1, np.int64)

    status = STATUS_OK
    fail_step = -1
    n_recorded = 0
    x0, x1, x3 = x_init[0], x_init[1], x_init[2]
    for k in range(n_steps + 1):
        if mode == MODE_BLENDED or mode == MODE_NOMINAL:
            un0, un1 = _aicardi(x0, x1, x3, k_r, k_a)
        elif mode == MODE_SAFETY:
            un0, un1 = 0.0, 0.0
        else:
            un0, un1 = u_tab[k, 0], u_tab[k, 1]
        u0, u1, w, active = _controller(
            x0, x1, x3, un0, un1,
            gammas, deltas2, Ps, centers, avec, bvec, kp, kd, hs[k],
        )
        if mode == MODE_NOMINAL:
            u0, u1 = un0, un1
        states[k, 0], states[k, 1], states[k, 2] = x0, x1, x3
        inputs[k, 0], inputs[k, 1] = u0, u1
        u_noms[k, 0], u_noms[k, 1] = un0, un1
        phis[k] = w
        actives[k] = active
        n_recorded = k + 1
        if active == -2:
            status = STATUS_DISJOINT
            fail_step = k
            break
        if k < n_steps:
            x0, x1, x3 = _rk4_unicycle(x0, x1, x3, u0, u1, dt)
            if not (np.isfinite(x0) and np.isfinite(x1) and np.isfinite(x3)):
                status = STATUS_NONFINITE
                fail_step = k + 1
                break
    return states, inputs, u_noms, hs, phis, actives, status, fail_step, n_recorded


# ---------------------------------------------------------------------------
# vectorized numpy fallback
# ---------------------------------------------------------------------------

def eval_h_batch(z, bars: BarrierArrays) -> np.ndarray:
    """h_i for every barrier at positions z of shape (..., 2)."""
    e = np.asarray(z, dtype=float)[..., None, :] - bars.centers  # (..., N, 2)
    pe = np.einsum("nij,...nj->...ni", bars.Ps, e)
    q = 0.5 * (e * pe).sum(axis=-1)
    return bars.gammas * (bars.deltas2 - q)


def _controller_np(x0, x1, x3, un0, un1, bars: BarrierArrays, out_h):
    e = np.array([x0, x1]) - bars.centers
    pe = np.einsum("nij,nj->ni", bars.Ps, e)
    q = 0.5 * (e * pe).sum(axis=1)
    out_h[:] = bars.gammas * (bars.deltas2 - q)
    inside = (out_h >= -bars.b) & (out_h <= bars.a)
    hits = np.nonzero(inside)[0]
    if hits.size > 1:
        return un0, un1, 1.0, -2
    if hits.size == 0:
        return un0, un1, 1.0, -1
    i = int(hits[0])
    c = out_h[i]
    w = _phi(c, bars.a[i])
    cos3, sin3 = np.cos(x3), np.sin(x3)
    along = pe[i, 0] * cos3 + pe[i, 1] * sin3
    across = -pe[i, 0] * sin3 + pe[i, 1] * cos3
    sign = 1.0 if c >= 0.0 else -1.0
    us0 = -sign * bars.kp[i] * bars.gammas[i] * c * along
    us1 = -bars.kd[i] * across
    if w >= 1.0:
        return un0, un1, 1.0, i
    if w <= 0.0:
        return us0, us1, 0.0, i
    return (1.0 - w) * us0 + w * un0, (1.0 - w) * us1 + w * un1, w, i


def _simulate_np(x_init, n_steps, dt, mode, k_r, k_a, u_tab, bars: BarrierArrays):
    states = np.empty((n_steps + 1, 3))
    inputs = np.empty((n_steps + 1, 2))
    u_noms = np.empty((n_steps + 1, 2))
    hs = np.empty((n_steps + 1, bars.n))
    phis = np.empty(n_steps + 1)
    actives = np.empty(n_steps + 1, np.int64)

    status = STATUS_OK
    fail_step = -1
    n_recorded = 0
    x0, x1, x3 = float(x_init[0]), float(x_init[1]), float(x_init[2])
    for k in range(n_steps + 1):
        if mode in (MODE_BLENDED, MODE_NOMINAL):
            un0, un1 = _aicardi(x0, x1, x3, k_r, k_a)
        elif mode == MODE_SAFETY:
            un0, un1 = 0.0, 0.0
        else:
            un0, un1 = u_tab[k, 0], u_tab[k, 1]
        u0, u1, w, active = _controller_np(x0, x1, x3, un0, un1, bars, hs[k])
        if mode == MODE_NOMINAL:
            u0, u1 = un0, un1
        states[k] = (x0, x1, x3)
        inputs[k] = (u0, u1)
        u_noms[k] = (un0, un1)
        phis[k] = w
        actives[k] = active
        n_recorded = k + 1
        if active == -2:
            status = STATUS_DISJOINT
            fail_step = k
            break
        if k < n_steps:
            x0, x1, x3 = _rk4_unicycle(x0, x1, x3, u0, u1, dt)
            if not (np.isfinite(x0) and np.isfinite(x1) and np.isfinite(x3)):
                status = STATUS_NONFINITE
                fail_step = k + 1
                break
    return states, inputs, u_noms, hs, phis, actives, status, fail_step, n_recorded


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimOutput:
    states: np.ndarray
    inputs: np.ndarray
    u_noms: np.ndarray
    h: np.ndarray
    phi: np.ndarray
    active: np.ndarray
    status: int
    fail_step: int


def run_simulation(
    x_init,
    n_steps: int,
    dt: float,
    mode: int,
    bars: BarrierArrays,
    k_r: float = 0.0,
    k_a: float = 0.0,
    u_tab: Optional[np.ndarray] = None,
    backend: Optional[str] = None,
) -> SimOutput:
    """Closed-loop unicycle rollout; arrays trimmed to the recorded steps on abort."""
    x_init = np.asarray(x_init, dtype=float)
    if u_tab is None:
        u_tab = np.zeros((n_steps + 1, 2))
    else:
        u_tab = np.asarray(u_tab, dtype=float)
        if u_tab.shape != (n_steps + 1, 2):
            raise ValueError(f"u_tab must have shape ({n_steps + 1}, 2), got {u_tab.shape}")
    if backend is None:
        backend = "numba" if USING_NUMBA else "numpy"
    if backend == "numba":
        if not USING_NUMBA:
            raise RuntimeError("numba backend requested but unavailable/disabled")
        out = _simulate(
            x_init, n_steps, dt, mode, k_r, k_a, u_tab,
            bars.gammas, bars.deltas2, bars.Ps, bars.centers,
            bars.a, bars.b, bars.kp, bars.kd,
        )
    elif backend == "numpy":
        out = _simulate_np(x_init, n_steps, dt, mode, k_r, k_a, u_tab, bars)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    states, inputs, u_noms, hs, phis, actives, status, fail_step, n_rec = out
    return SimOutput(
        states=states[:n_rec],
        inputs=inputs[:n_rec],
        u_noms=u_noms[:n_rec],
        h=hs[:n_rec],
        phi=phis[:n_rec],
        active=actives[:n_rec],
        status=int(status),
        fail_step=int(fail_step),
    )


def controller_step(x, u_nom, bars: BarrierArrays, backend: Optional[str] = None):
    """One blend evaluation; returns (u, phi_bar, active, h)."""
    x = np.asarray(x, dtype=float)
    u_nom = np.asarray(u_nom, dtype=float)
    h = np.empty(bars.n)
    if backend is None:
        backend = "numba" if USING_NUMBA else "numpy"
    if backend == "numba":
        if not USING_NUMBA:
            raise RuntimeError("numba backend requested but unavailable/disabled")
        u0, u1, w, active = _controller(
            x[0], x[1], x[2], u_nom[0], u_nom[1],
            bars.gammas, bars.deltas2, bars.Ps, bars.centers,
            bars.a, bars.b, bars.kp, bars.kd, h,
        )
    else:
        u0, u1, w, active = _controller_np(x[0], x[1], x[2], u_nom[0], u_nom[1], bars, h)
    return np.array([u0, u1]), float(w), int(active), h


def rk4_unicycle_step(x, u, dt: float) -> np.ndarray:
    """Single RK4 step of the unicycle with zero-order-held input, heading wrapped."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    nx0, nx1, nx3 = _rk4_unicycle(x[0], x[1], x[2], u[0], u[1], dt)
    return np.array([nx0, nx1, nx3])


def barrier_qp_rows(x, bars: BarrierArrays):
    """Stacked-QP half-space rows at x: (L_g h_i, -alpha_i(h_i)); L_f h_i = 0 (driftless)."""
    x = np.asarray(x, dtype=float)
    e = x[:2] - bars.centers
    pe = np.einsum("nij,nj->ni", bars.Ps, e)
    q = 0.5 * (e * pe).sum(axis=1)
    h = bars.gammas * (bars.deltas2 - q)
    grad_z = -bars.gammas[:, None] * pe  # dh/dz
    cos3, sin3 = np.cos(x[2]), np.sin(x[2])
    rows = np.zeros((bars.n, 2))
    rows[:, 0] = grad_z[:, 0] * cos3 + grad_z[:, 1] * sin3
    rhs = -np.where(h >= 0.0, bars.alpha * h, 0.0)
    return rows, rhs, h
