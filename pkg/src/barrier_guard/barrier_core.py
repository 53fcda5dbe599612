"""Barrier abstractions and the blended safety controller.

A barrier here is a scalar function h whose zero-superlevel set is the
constraint set to keep forward invariant. The safety controller attached to
a barrier is only certified on an annulus ``h in [-b, a]`` around the
boundary; outside all annuli the nominal input passes through untouched.
The blend

    u* = (1 - phi(h)) * u_s + phi(h) * u_nom

is a pointwise convex combination, so box input constraints survive it.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


class InputViolationError(ValueError):
    """Nominal input outside the admissible box (callers must clamp first)."""


class DisjointnessError(RuntimeError):
    """A state was found in two barrier annuli at once."""


@dataclass(frozen=True)
class AlphaFn:
    """Class-K ramp on the non-negative side, identically zero below it.

    alpha(h) = gain*h for h >= 0 and 0 for h < 0. This satisfies both
    required properties: continuous and strictly increasing on [0, inf),
    and alpha(h) <= 0 for all h < 0 (here exactly 0).
    """

    gain: float = 1.0

    def __post_init__(self):
        if self.gain <= 0:
            raise ValueError(f"alpha gain must be positive, got {self.gain}")

    def __call__(self, h: float) -> float:
        return self.gain * h if h >= 0.0 else 0.0


@dataclass(frozen=True)
class InputBox:
    """Componentwise input bounds; convex by construction."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower/upper must be 1-D arrays of equal shape")
        if not np.all(lower < upper):
            raise ValueError("need lower < upper componentwise")

    @classmethod
    def symmetric(cls, bounds) -> "InputBox":
        bounds = np.asarray(bounds, dtype=float)
        return cls(lower=-bounds, upper=bounds)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def contains(self, u, tol: float = 0.0) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(np.all(u >= self.lower - tol) and np.all(u <= self.upper + tol))

    def clamp(self, u) -> np.ndarray:
        return np.clip(np.asarray(u, dtype=float), self.lower, self.upper)

    def is_symmetric(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.lower + self.upper) <= tol))


@dataclass(frozen=True)
class BarrierSpec:
    """One barrier: value, gradient, annulus margins, alpha, safety controller.

    ``h`` maps a state to a scalar, ``grad_h`` to the row of partials.
    ``safety_ctrl`` must map annulus states into the admissible input set
    while certifying hdot + alpha(h) >= 0 there.
    """

    h: Callable[[np.ndarray], float]
    grad_h: Callable[[np.ndarray], np.ndarray]
    a: float
    b: float
    alpha: AlphaFn = field(default_factory=AlphaFn)
    safety_ctrl: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError(f"annulus margins must be positive, got a={self.a}, b={self.b}")

    def in_annulus(self, x) -> bool:
        return -self.b <= self.h(x) <= self.a


@dataclass(frozen=True)
class BlendReport:
    """Per-step record of the blend; u_star == (1-phi_bar)*u_s_used + phi_bar*u_nom_used."""

    u_star: np.ndarray
    phi_bar: float
    active_barrier: Optional[int]
    u_nom_used: np.ndarray
    u_s_used: np.ndarray


def kappa(h: float, a: float) -> float:
    """Cubic smoothstep ramp on [0, a]: -2h^3/a^3 + 3h^2/a^2.

    kappa(0) = 0, kappa(a) = 1, locally Lipschitz, monotone on [0, a].
    """
    if a <= 0:
        raise ValueError(f"a must be positive, got {a}")
    if h < 0.0 or h > a:
        raise ValueError(f"kappa domain is [0, a]; got h={h}, a={a}")
    s = h / a
    return (3.0 - 2.0 * s) * s * s


def phi(h: float, a: float) -> float:
    """Intervention weight in [0, 1]: 0 below the boundary, 1 beyond the annulus."""
    if h < 0.0:
        return 0.0
    if h > a:
        return 1.0
    return kappa(h, a)


def _blend(u_s: np.ndarray, u_nom: np.ndarray, w: float) -> np.ndarray:
    # Branch the endpoints so pass-through and full-safety are bit-exact.
    if w >= 1.0:
        return u_nom.copy()
    if w <= 0.0:
        return u_s.copy()
    return (1.0 - w) * u_s + w * u_nom


def blend_single(barrier: BarrierSpec, x, u_nom, box: Optional[InputBox] = None) -> BlendReport:
    """Blend one barrier's safety controller with a nominal input.

    Raises InputViolationError if ``box`` is given and u_nom lies outside it;
    clamping out-of-box inputs is the teleop layer's job, not this one's.
    """
    x = np.asarray(x, dtype=float)
    u_nom = np.asarray(u_nom, dtype=float)
    if box is not None and not box.contains(u_nom):
        raise InputViolationError(f"u_nom {u_nom} outside input box")
    w = phi(barrier.h(x), barrier.a)
    if w >= 1.0:
        u_s = np.zeros_like(u_nom)
    else:
        u_s = np.asarray(barrier.safety_ctrl(x), dtype=float)
    return BlendReport(
        u_star=_blend(u_s, u_nom, w),
        phi_bar=w,
        active_barrier=0 if w < 1.0 else None,
        u_nom_used=u_nom,
        u_s_used=u_s,
    )


def blend_multi(
    barriers: Sequence[BarrierSpec], x, u_nom, box: Optional[InputBox] = None
) -> BlendReport:
    """Multi-barrier blend under the pairwise-disjoint-annuli hypothesis.

    At most one annulus may contain ``x``; if one does, that barrier's weight
    and safety controller drive the blend. Otherwise the nominal input passes
    through bit-exactly (the recorded u_s is the zero input, weighted by zero).

    Raises DisjointnessError if two annuli claim the state: the disjointness
    hypothesis must hold along trajectories, not just at configuration time.
    """
    x = np.asarray(x, dtype=float)
    u_nom = np.asarray(u_nom, dtype=float)
    if box is not None and not box.contains(u_nom):
        raise InputViolationError(f"u_nom {u_nom} outside input box")

    active = None
    for i, bar in enumerate(barriers):
        if bar.in_annulus(x):
            if active is not None:
                raise DisjointnessError(
                    f"state {x} lies in annuli of barriers {active} and {i}"
                )
            active = i

    if active is None:
        return BlendReport(
            u_star=u_nom.copy(),
            phi_bar=1.0,
            active_barrier=None,
            u_nom_used=u_nom,
            u_s_used=np.zeros_like(u_nom),
        )

    bar = barriers[active]
    w = phi(bar.h(x), bar.a)
    u_s = np.asarray(bar.safety_ctrl(x), dtype=float)
    return BlendReport(
        u_star=_blend(u_s, u_nom, w),
        phi_bar=w,
        active_barrier=active,
        u_nom_used=u_nom,
        u_s_used=u_s,
    )


@dataclass(frozen=True)
class ConditionReport:
    """Sampled check of hdot + alpha(h) >= 0 under the safety controller."""

    n_samples: int
    min_value: float
    argmin_state: Optional[np.ndarray]
    satisfied: bool


def check_typeII_condition(
    barrier: BarrierSpec,
    f: Callable[[np.ndarray], np.ndarray],
    g: Callable[[np.ndarray], np.ndarray],
    samples: Sequence[np.ndarray],
    tol: float = 1e-6,
) -> ConditionReport:
    """Evaluate L_f h + L_g h u_s + alpha(h) at annulus samples; report the minimum.

    Report-only: an empty sample list passes vacuously with count 0.
    """
    min_value = np.inf
    argmin = None
    n = 0
    for x in samples:
        x = np.asarray(x, dtype=float)
        grad = np.asarray(barrier.grad_h(x), dtype=float)
        u_s = np.asarray(barrier.safety_ctrl(x), dtype=float)
        value = grad @ np.asarray(f(x), dtype=float)
        value += grad @ np.asarray(g(x), dtype=float) @ u_s
        value += barrier.alpha(barrier.h(x))
        n += 1
        if value < min_value:
            min_value = float(value)
            argmin = x
    if n == 0:
        return ConditionReport(0, np.inf, None, True)
    return ConditionReport(n, min_value, argmin, min_value >= -tol)
