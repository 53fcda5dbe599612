"""Concrete plants and their controllers.

Two systems ship with the library: the planar unicycle with ellipsoid
constraint barriers (the obstacle-field experiment), and a damped point
mass whose barrier is built from the kinetic-energy storage function (the
passivity route to a barrier certificate).
"""

import logging
from dataclasses import dataclass

import numpy as np

from .barrier_core import AlphaFn, BarrierSpec, InputBox
from .geometry import AnnulusShell, DegenerateShellError, eta, eval_c, grad_c

log = logging.getLogger(__name__)

GOAL_RADIUS = 1e-9  # below this the stabilizing controller returns zero input
ALPHA_TAYLOR_GUARD = 1e-6  # removable singularity of the heading law at alpha=0


def wrap_heading(theta: float) -> float:
    """Normalize an angle into (-pi, pi]."""
    w = (theta + np.pi) % (2.0 * np.pi) - np.pi
    if w == -np.pi:
        return np.pi
    return w


# ---------------------------------------------------------------------------
# unicycle
# ---------------------------------------------------------------------------

def unicycle_flow(x, u) -> np.ndarray:
    """xdot = (u_p cos x3, u_p sin x3, u_d)."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    return np.array([u[0] * np.cos(x[2]), u[0] * np.sin(x[2]), u[1]])


def unicycle_f(x) -> np.ndarray:
    """Drift term; the unicycle is driftless."""
    return np.zeros(3)


def unicycle_g(x) -> np.ndarray:
    """Input map g(x) with columns for (u_p, u_d)."""
    x3 = float(np.asarray(x, dtype=float)[2])
    return np.array([[np.cos(x3), 0.0], [np.sin(x3), 0.0], [0.0, 1.0]])


@dataclass(frozen=True)
class UnicycleBarrierGains:
    k_p: float
    k_d: float

    def __post_init__(self):
        if self.k_p <= 0 or self.k_d <= 0:
            raise ValueError(f"gains must be positive, got k_p={self.k_p}, k_d={self.k_d}")


def unicycle_safety_ctrl(shell: AnnulusShell, gains: UnicycleBarrierGains, x) -> np.ndarray:
    """Passivity-motivated shell controller.

    The speed channel pushes along the constraint gradient, scaled by c so it
    vanishes on the boundary (and flips sign with c, keeping hdot >= 0 on both
    sides); the heading channel turns the body axis onto the gradient
    direction. Both branches agree at c = 0, so the switch is continuous.
    """
    x = np.asarray(x, dtype=float)
    ell = shell.ellipsoid
    e = x[:2] - ell.center
    c = eval_c(ell, x[:2])
    Pe = ell.P @ e
    cos3, sin3 = np.cos(x[2]), np.sin(x[2])
    along = Pe[0] * cos3 + Pe[1] * sin3
    across = -Pe[0] * sin3 + Pe[1] * cos3
    sign = 1.0 if c >= 0.0 else -1.0
    u_p = -sign * gains.k_p * ell.gamma * c * along
    u_d = -gains.k_d * across
    return np.array([u_p, u_d])


def unicycle_gain_synthesis(shell: AnnulusShell, box: InputBox) -> UnicycleBarrierGains:
    """Maximal gains keeping the shell controller inside a symmetric box.

    k_p <= u_p_max / (eta * max(a, b)) and k_d <= u_d_max / eta, with
    eta the exact maximum of ||Pe|| over the shell.
    """
    if not box.is_symmetric(tol=1e-12):
        raise ValueError("gain synthesis assumes a box symmetric about 0")
    et = eta(shell)
    if et <= 0:
        raise DegenerateShellError("eta is zero; shell collapsed onto the center")
    u_p_max, u_d_max = box.upper[0], box.upper[1]
    return UnicycleBarrierGains(
        k_p=u_p_max / (et * max(shell.a, shell.b)),
        k_d=u_d_max / et,
    )


def unicycle_barrier(
    shell: AnnulusShell, gains: UnicycleBarrierGains, alpha: AlphaFn = None
) -> BarrierSpec:
    """Package a shell + gains as a BarrierSpec over the 3-state unicycle."""
    alpha = alpha if alpha is not None else AlphaFn()

    def h(x):
        return eval_c(shell.ellipsoid, np.asarray(x, dtype=float)[:2])

    def grad_h(x):
        g2 = grad_c(shell.ellipsoid, np.asarray(x, dtype=float)[:2])
        return np.array([g2[0], g2[1], 0.0])

    def ctrl(x):
        return unicycle_safety_ctrl(shell, gains, x)

    return BarrierSpec(h=h, grad_h=grad_h, a=shell.a, b=shell.b, alpha=alpha, safety_ctrl=ctrl)


def aicardi_nominal(x, k_r: float, k_a: float) -> np.ndarray:
    """Polar-coordinate stabilizing controller driving the unicycle to the origin.

    u_p = -k_r r cos(alpha), u_d = -k_a alpha - k_r sin(alpha)cos(alpha)(alpha-theta)/alpha
    with r the distance to the origin, theta = atan2(x2, x1) and
    alpha = wrap(x3 - theta). The alpha -> 0 singularity is removable and
    guarded by a Taylor branch; at the origin itself the goal is reached and
    the zero input is returned.
    """
    x = np.asarray(x, dtype=float)
    r = np.hypot(x[0], x[1])
    if r < GOAL_RADIUS:
        return np.zeros(2)
    theta = np.arctan2(x[1], x[0])
    alpha = wrap_heading(x[2] - theta)
    cos_a = np.cos(alpha)
    u_p = -k_r * r * cos_a
    if abs(alpha) < ALPHA_TAYLOR_GUARD:
        swirl = cos_a * cos_a
    else:
        swirl = np.sin(alpha) * cos_a / alpha
    u_d = -k_a * alpha - k_r * swirl * (alpha - theta)
    return np.array([u_p, u_d])


def aicardi_gain_bounds(r0: float, box: InputBox) -> tuple:
    """Upper bounds (k_r_max, k_a_max at that k_r) keeping the nominal law in the box.

    k_r <= u_p_max / r0 and k_a <= (u_d_max - k_r * 1.5 pi) / (2 pi); the
    second bound is only meaningful while positive, which caps k_r at
    u_d_max / (1.5 pi) as well.
    """
    u_p_max, u_d_max = box.upper[0], box.upper[1]
    k_r_max = min(u_p_max / r0, u_d_max / (1.5 * np.pi))
    return k_r_max, (u_d_max - k_r_max * 1.5 * np.pi) / (2.0 * np.pi)


# ---------------------------------------------------------------------------
# damped point mass with an energy barrier
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MechParams:
    """Constant-mass damped point mass: M = mass*I, C = 0, F = damping*I.

    ``gravity`` is the constant bias force vector (zero for the planar
    instance); the dimension n comes from its length.
    """

    mass: float
    damping: float
    gravity: np.ndarray

    def __post_init__(self):
        gravity = np.asarray(self.gravity, dtype=float)
        object.__setattr__(self, "gravity", gravity)
        if self.mass <= 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.damping <= 0:
            raise ValueError(f"damping must be positive, got {self.damping}")

    @property
    def n(self) -> int:
        return self.gravity.shape[0]


def mech_split(state, params: MechParams):
    state = np.asarray(state, dtype=float)
    return state[: params.n], state[params.n :]


def mech_flow(state, u, params: MechParams) -> np.ndarray:
    """qdot = v, vdot = (-gravity - damping*v + u) / mass."""
    q, v = mech_split(state, params)
    u = np.asarray(u, dtype=float)
    return np.concatenate([v, (-params.gravity - params.damping * v + u) / params.mass])


def storage(state, params: MechParams) -> float:
    """Kinetic energy 0.5 * mass * ||v||^2."""
    _, v = mech_split(state, params)
    return 0.5 * params.mass * float(v @ v)


def energy_barrier(state, shell: AnnulusShell, k_h: float, params: MechParams) -> float:
    """h(q, v) = k_h c(q) - kinetic energy."""
    q, _ = mech_split(state, params)
    return k_h * eval_c(shell.ellipsoid, q) - storage(state, params)


def energy_barrier_grad(state, shell: AnnulusShell, k_h: float, params: MechParams):
    q, v = mech_split(state, params)
    return np.concatenate([k_h * grad_c(shell.ellipsoid, q), -params.mass * v])


def energy_safety_ctrl(state, shell: AnnulusShell, k_h: float, params: MechParams) -> np.ndarray:
    """u_s = gravity + k_h grad c(q); passive w.r.t. mu = k_h grad c."""
    q, _ = mech_split(state, params)
    return params.gravity + k_h * grad_c(shell.ellipsoid, q)


def energy_kh_synthesis(
    shell: AnnulusShell,
    box: InputBox,
    params: MechParams,
    grid: int = 64,
    margin: float = 0.95,
    cap: float = 1e6,
    grad_fn=None,
) -> float:
    """Largest k with gravity + k grad c inside the box over a shell grid.

    Deterministic grid x grid polar sampling of the configuration shell with a
    safety margin absorbing sampling gaps. A gradient that vanishes at every
    sample leaves k unconstrained; the configured cap is returned with a
    warning. Gravity outside the interior of the box is an error.
    ``grad_fn`` overrides the ellipsoid gradient (for custom constraint maps).
    """
    g = params.gravity
    if grad_fn is None:
        grad_fn = lambda q: grad_c(shell.ellipsoid, q)
    if not box.contains(g) or np.any(g <= box.lower) or np.any(g >= box.upper):
        raise ValueError("gravity must lie strictly inside the input box")
    angles = np.linspace(-np.pi, np.pi, grid, endpoint=False)
    levels = np.linspace(-shell.b, shell.a, grid)
    k_max = np.inf
    for lev in levels:
        for ang in angles:
            q = shell.point_at(lev, ang)
            d = grad_fn(q)
            for j in range(box.dim):
                if d[j] > 0:
                    k_max = min(k_max, (box.upper[j] - g[j]) / d[j])
                elif d[j] < 0:
                    k_max = min(k_max, (box.lower[j] - g[j]) / d[j])
    if not np.isfinite(k_max):
        log.warning("grad c vanished at every shell sample; returning cap %.3g", cap)
        return cap
    if k_max <= 0:
        raise ValueError("no positive k admissible; gravity sits on the box boundary")
    return margin * k_max


def mech_f(state, params: MechParams) -> np.ndarray:
    q, v = mech_split(state, params)
    return np.concatenate([v, (-params.gravity - params.damping * v) / params.mass])


def mech_g(state, params: MechParams) -> np.ndarray:
    n = params.n
    top = np.zeros((n, n))
    return np.vstack([top, np.eye(n) / params.mass])


def mech_barrier(
    shell: AnnulusShell,
    k_h: float,
    params: MechParams,
    a: float,
    b: float,
    alpha: AlphaFn = None,
) -> BarrierSpec:
    """Energy barrier as a BarrierSpec over the stacked (q, v) state.

    The annulus margins a, b here are in units of h = k_h c - S, not of the
    configuration shell used to synthesize k_h.
    """
    alpha = alpha if alpha is not None else AlphaFn()
    return BarrierSpec(
        h=lambda s: energy_barrier(s, shell, k_h, params),
        grad_h=lambda s: energy_barrier_grad(s, shell, k_h, params),
        a=a,
        b=b,
        alpha=alpha,
        safety_ctrl=lambda s: energy_safety_ctrl(s, shell, k_h, params),
    )
