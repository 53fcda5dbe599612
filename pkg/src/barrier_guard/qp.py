"""Minimum-norm safe control and the stacked-QP baseline.

The stacked QP projects the nominal input onto the intersection of all
barrier half-spaces (plus the input box). It exists here as the contrast
case: it couples every constraint into one program, may go infeasible, and
its input-constrained solution map carries no Lipschitz guarantee, which is
exactly what the blended controller avoids.
"""

import itertools
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .barrier_core import BarrierSpec, InputBox


class DegenerateConstraintError(RuntimeError):
    """L_g h vanished inside the annulus; the min-norm construction needs it nonzero."""


FEAS_TOL = 1e-9
DUAL_TOL = 1e-9


@dataclass(frozen=True)
class QpProblem:
    """min 0.5||u - u_nom||^2 s.t. row @ u >= rhs for each half space, u in box."""

    u_nom: np.ndarray
    half_spaces: List[Tuple[np.ndarray, float]] = field(default_factory=list)
    box: Optional[InputBox] = None

    def __post_init__(self):
        object.__setattr__(self, "u_nom", np.asarray(self.u_nom, dtype=float))
        rows = [(np.asarray(r, dtype=float), float(b)) for r, b in self.half_spaces]
        object.__setattr__(self, "half_spaces", rows)
        for r, b in rows:
            if not (np.all(np.isfinite(r)) and np.isfinite(b)):
                raise ValueError("half-space rows must be finite")

    def stacked(self) -> Tuple[np.ndarray, np.ndarray]:
        """All constraints as G u >= d (half spaces first, then box faces)."""
        m = self.u_nom.shape[0]
        G = [r for r, _ in self.half_spaces]
        d = [b for _, b in self.half_spaces]
        if self.box is not None:
            eye = np.eye(m)
            for j in range(m):
                G.append(eye[j])
                d.append(self.box.lower[j])
                G.append(-eye[j])
                d.append(-self.box.upper[j])
        if not G:
            return np.zeros((0, m)), np.zeros(0)
        return np.array(G), np.array(d)


@dataclass(frozen=True)
class QpSolution:
    status: str  # "optimal" | "infeasible"
    u: Optional[np.ndarray]
    multipliers: Optional[np.ndarray]  # one per stacked constraint
    active_set: Tuple[int, ...]
    objective: float

    @property
    def infeasible(self) -> bool:
        return self.status == "infeasible"


def barrier_half_space(barrier: BarrierSpec, f, g, x) -> Tuple[np.ndarray, float]:
    """The barrier's QP row at x: L_g h @ u >= -alpha(h) - L_f h."""
    x = np.asarray(x, dtype=float)
    grad = np.asarray(barrier.grad_h(x), dtype=float)
    Lf = float(grad @ np.asarray(f(x), dtype=float))
    Lg = grad @ np.asarray(g(x), dtype=float)
    return Lg, -barrier.alpha(barrier.h(x)) - Lf


def min_norm_us(barrier: BarrierSpec, f, g, x) -> np.ndarray:
    """Closed-form minimum-norm input enforcing hdot + alpha(h) >= 0 on the annulus.

    Outside the annulus the zero input is returned. Inside, with
    rho = L_f h + alpha(h), the single-constraint QP solution is zero when
    rho >= 0 and -rho * L_g h / ||L_g h||^2 otherwise.
    """
    x = np.asarray(x, dtype=float)
    gx = np.asarray(g(x), dtype=float)
    m = gx.shape[1]
    if not barrier.in_annulus(x):
        return np.zeros(m)
    grad = np.asarray(barrier.grad_h(x), dtype=float)
    Lf = float(grad @ np.asarray(f(x), dtype=float))
    Lg = grad @ gx
    rho = Lf + barrier.alpha(barrier.h(x))
    if rho >= 0.0:
        return np.zeros(m)
    nrm2 = float(Lg @ Lg)
    if nrm2 < 1e-24:
        raise DegenerateConstraintError(
            f"||L_g h|| < 1e-12 at annulus state {x}; constraint is uncontrollable"
        )
    return -rho * Lg / nrm2


def solve_stacked_qp(p: QpProblem) -> QpSolution:
    """Exact minimizer via dense active-set enumeration.

    Every candidate active set of size <= m is solved as an
    equality-constrained projection and kept when its multipliers are
    non-negative and the point is primal feasible; the feasible KKT point of
    least objective wins, ties broken by the first (lowest lexicographic)
    active set visited. No candidate at all means the constraint system is
    empty: infeasibility is reported as a value, not an exception, because a
    conflicting stack of barrier rows is a legitimate outcome to observe.
    """
    u_nom = p.u_nom
    m = u_nom.shape[0]
    if m > 4:
        raise ValueError(f"dense enumeration supports dimension <= 4, got {m}")
    G, d = p.stacked()
    K = G.shape[0]
    if len(p.half_spaces) > 64:
        raise ValueError("constraint count limited to 64 half-spaces")

    # KKT is sufficient here (convex objective, affine constraints), so the
    # first candidate passing every check is the unique minimizer; visiting
    # subsets in (size, lexicographic) order fixes the reported active set.
    for size in range(0, m + 1):
        for subset in itertools.combinations(range(K), size):
            if size == 0:
                u = u_nom.copy()
                lam_s = np.zeros(0)
            else:
                Gs = G[list(subset)]
                gram = Gs @ Gs.T
                rhs = d[list(subset)] - Gs @ u_nom
                try:
                    lam_s = np.linalg.solve(gram, rhs)
                except np.linalg.LinAlgError:
                    continue
                u = u_nom + Gs.T @ lam_s
                if np.any(np.abs(Gs @ u - d[list(subset)]) > FEAS_TOL):
                    continue  # ill-conditioned subset
            if np.any(lam_s < -DUAL_TOL):
                continue
            if K and np.any(G @ u < d - FEAS_TOL):
                continue
            lam = np.zeros(K)
            lam[list(subset)] = np.maximum(lam_s, 0.0)
            return QpSolution(
                status="optimal",
                u=u,
                multipliers=lam,
                active_set=subset,
                objective=0.5 * float((u - u_nom) @ (u - u_nom)),
            )
    return QpSolution("infeasible", None, None, (), np.inf)


def kkt_residuals(p: QpProblem, sol: QpSolution) -> dict:
    """Stationarity / feasibility / complementarity residuals of a returned optimum."""
    if sol.infeasible:
        raise ValueError("no KKT certificate for an infeasible problem")
    G, d = p.stacked()
    slack = G @ sol.u - d if G.size else np.zeros(0)
    stationarity = sol.u - p.u_nom - (G.T @ sol.multipliers if G.size else 0.0)
    return {
        "stationarity": float(np.max(np.abs(stationarity))) if stationarity.size else 0.0,
        "primal": float(max(0.0, -(slack.min() if slack.size else 0.0))),
        "dual": float(max(0.0, -(sol.multipliers.min() if sol.multipliers.size else 0.0))),
        "complementarity": float(np.max(np.abs(sol.multipliers * slack))) if slack.size else 0.0,
    }


def grid_qp_oracle(p: QpProblem, half_width: float, n: int = 401) -> Optional[np.ndarray]:
    """Brute-force lattice search for 2-D problems; independent of the solver."""
    if p.u_nom.shape[0] != 2:
        raise ValueError("grid oracle is 2-D only")
    G, d = p.stacked()
    axis = np.linspace(-half_width, half_width, n) + 0.0
    U1, U2 = np.meshgrid(p.u_nom[0] + axis, p.u_nom[1] + axis, indexing="ij")
    pts = np.stack([U1.ravel(), U2.ravel()], axis=1)
    feas = np.ones(pts.shape[0], dtype=bool)
    if G.size:
        feas = np.all(pts @ G.T >= d[None, :], axis=1)
    if not feas.any():
        return None
    diff = pts[feas] - p.u_nom
    return pts[feas][np.argmin((diff**2).sum(axis=1))]


def lipschitz_probe(
    controller: Callable[[np.ndarray], np.ndarray],
    region: Sequence[Tuple[float, float]],
    pairs: int,
    rng: np.random.Generator,
    separation: float = 1e-3,
    accept: Optional[Callable[[np.ndarray], bool]] = None,
) -> float:
    """Max difference quotient ||u(x)-u(x')|| / ||x-x'|| over random close pairs.

    Empirical probe of local Lipschitz behavior over a compact box region;
    pair separations are at most ``separation``. ``accept`` restricts sampling
    to a sub-domain (both pair endpoints must pass), e.g. the safe set when
    probing the gated multi-barrier blend, whose disjointness gate switches
    across the annulus inner edges that trajectories from the safe set never
    cross.
    """
    lo = np.array([r[0] for r in region], dtype=float)
    hi = np.array([r[1] for r in region], dtype=float)
    n = lo.shape[0]
    worst = 0.0
    done = 0
    budget = 200 * pairs  # rejection-sampling guard
    while done < pairs and budget > 0:
        budget -= 1
        x = rng.uniform(lo, hi)
        step = rng.normal(size=n)
        step *= rng.uniform(0.1, 1.0) * separation / np.linalg.norm(step)
        x2 = np.clip(x + step, lo, hi)
        if accept is not None and not (accept(x) and accept(x2)):
            continue
        dist = float(np.linalg.norm(x2 - x))
        if dist == 0.0:
            continue
        done += 1
        q = float(np.linalg.norm(controller(x2) - controller(x))) / dist
        if q > worst:
            worst = q
    if done < pairs:
        raise ValueError("accept predicate rejected nearly the whole region")
    return worst
