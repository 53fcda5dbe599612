"""Ellipsoid constraints, annulus shells, and their geometry helpers.

A constraint is c(z) = gamma * (delta^2 - 0.5 * e'Pe) with e = z - center:
gamma=+1 keeps the plant inside the ellipse, gamma=-1 keeps it outside
(an obstacle). The annulus shell {c in [-b, a]} is where the safety
controller must be certified, and shells of different barriers must be
pairwise disjoint for the multi-barrier blend to be well defined.
"""

from dataclasses import dataclass

import numpy as np


class DegenerateShellError(ValueError):
    pass


@dataclass(frozen=True)
class Ellipsoid:
    """gamma in {-1, +1}, level delta >= 0, SPD 2x2 matrix P, center z_r."""

    gamma: int
    delta: float
    P: np.ndarray
    center: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        center = np.asarray(self.center, dtype=float)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "center", center)
        if self.gamma not in (-1, 1):
            raise ValueError(f"gamma must be -1 or +1, got {self.gamma}")
        if self.delta < 0:
            raise ValueError(f"delta must be non-negative, got {self.delta}")
        if P.shape != (2, 2):
            raise ValueError(f"P must be 2x2, got shape {P.shape}")
        if not np.allclose(P, P.T, atol=1e-12, rtol=0.0):
            raise ValueError("P must be symmetric to 1e-12")
        if np.any(np.linalg.eigvalsh(P) <= 0):
            raise ValueError("P must be positive definite")
        if center.shape != (2,):
            raise ValueError(f"center must be a 2-vector, got shape {center.shape}")

    @classmethod
    def from_semiaxes(cls, gamma, semiaxes, angle=0.0, center=(0.0, 0.0), delta=1.0):
        """Ellipse with given semi-axis lengths, rotated by ``angle``.

        The boundary {0.5 e'Pe = delta^2} passes through center + R(angle) @ (s1, 0)
        and center + R(angle) @ (0, s2).
        """
        s1, s2 = float(semiaxes[0]), float(semiaxes[1])
        if s1 <= 0 or s2 <= 0:
            raise ValueError("semi-axes must be positive")
        c, s = np.cos(angle), np.sin(angle)
        R = np.array([[c, -s], [s, c]])
        D = np.diag([2.0 * delta**2 / s1**2, 2.0 * delta**2 / s2**2])
        P = R @ D @ R.T
        P = 0.5 * (P + P.T)
        return cls(gamma=gamma, delta=delta, P=P, center=np.asarray(center, dtype=float))


def eval_c(ell: Ellipsoid, z) -> float:
    """c(z) = gamma * (delta^2 - 0.5 * e'Pe)."""
    e = np.asarray(z, dtype=float) - ell.center
    return ell.gamma * (ell.delta**2 - 0.5 * e @ ell.P @ e)


def grad_c(ell: Ellipsoid, z) -> np.ndarray:
    """Exact differential of eval_c: -gamma * (Pe)'."""
    e = np.asarray(z, dtype=float) - ell.center
    return -ell.gamma * (ell.P @ e)


@dataclass(frozen=True)
class AnnulusShell:
    """An ellipsoid constraint together with its annulus margins a, b > 0.

    The shell must exclude the ellipse center: the inner level set
    0.5 e'Pe = delta^2 - a (gamma=+1) resp. delta^2 - b (gamma=-1) has to sit
    strictly outside the center, i.e. the subtracted margin stays below
    delta^2.
    """

    ellipsoid: Ellipsoid
    a: float
    b: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError(f"annulus margins must be positive, got a={self.a}, b={self.b}")
        inner = self.ellipsoid.delta**2 - self._inner_margin()
        if inner <= 0:
            raise ValueError(
                "shell contains the ellipse center: need "
                f"{'a' if self.ellipsoid.gamma == 1 else 'b'} < delta^2 "
                f"(a={self.a}, b={self.b}, delta^2={self.ellipsoid.delta**2})"
            )

    def _inner_margin(self) -> float:
        return self.a if self.ellipsoid.gamma == 1 else self.b

    def _outer_margin(self) -> float:
        return self.b if self.ellipsoid.gamma == 1 else self.a

    def h(self, z) -> float:
        return eval_c(self.ellipsoid, z)

    def grad_h(self, z) -> np.ndarray:
        return grad_c(self.ellipsoid, z)

    def contains(self, z) -> bool:
        return -self.b <= self.h(z) <= self.a

    def quad_range(self) -> tuple:
        """Range of q = 0.5 e'Pe covered by the shell."""
        d2 = self.ellipsoid.delta**2
        return (d2 - self._inner_margin(), d2 + self._outer_margin())

    def point_at(self, h_level: float, angle: float) -> np.ndarray:
        """The shell point with value h_level in direction ``angle`` from the center."""
        if not -self.b <= h_level <= self.a:
            raise ValueError(f"h_level {h_level} outside [-b, a]")
        q = self.ellipsoid.delta**2 - self.ellipsoid.gamma * h_level
        d = np.array([np.cos(angle), np.sin(angle)])
        r = np.sqrt(2.0 * q / (d @ self.ellipsoid.P @ d))
        return self.ellipsoid.center + r * d

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n random shell points, uniform in (h-level, angle)."""
        levels = rng.uniform(-self.b, self.a, size=n)
        angles = rng.uniform(-np.pi, np.pi, size=n)
        return np.array([self.point_at(h, t) for h, t in zip(levels, angles)])


def eta(shell: AnnulusShell) -> float:
    """Exact maximum of ||P e|| over the shell.

    The maximum sits on the outermost level set 0.5 e'Pe = delta^2 + s
    (s = b for gamma=+1, s = a for gamma=-1) along the top eigenvector of P,
    giving sqrt(2 (delta^2 + s) lambda_max(P)).
    """
    s = shell._outer_margin()
    level = shell.ellipsoid.delta**2 + s
    if level <= 0:
        raise DegenerateShellError(f"outer level delta^2 + s = {level} not positive")
    lam_max = float(np.linalg.eigvalsh(shell.ellipsoid.P)[-1])
    return float(np.sqrt(2.0 * level * lam_max))


def eta_grid_oracle(shell: AnnulusShell, resolution: int = 512) -> float:
    """Grid maximization of ||P e|| over the shell (independent check of eta)."""
    angles = np.linspace(-np.pi, np.pi, resolution, endpoint=False)
    levels = np.linspace(-shell.b, shell.a, resolution)
    d = np.stack([np.cos(angles), np.sin(angles)], axis=1)  # (R, 2)
    P = shell.ellipsoid.P
    dPd = np.einsum("ij,jk,ik->i", d, P, d)  # (R,)
    q = shell.ellipsoid.delta**2 - shell.ellipsoid.gamma * levels  # (R,)
    r = np.sqrt(2.0 * q[:, None] / dPd[None, :])  # (level, angle)
    e = r[:, :, None] * d[None, :, :]
    Pe = np.einsum("jk,abk->abj", P, e)
    return float(np.sqrt((Pe**2).sum(axis=-1)).max())


@dataclass(frozen=True)
class DisjointnessReport:
    """Outcome of the sampled shell-overlap test.

    ``margin`` is the smallest observed distance (in h units of the other
    barrier) from a sampled shell point to the other shell's band [-b, a]:
    positive means separated, non-positive means a sampled point fell inside.
    """

    disjoint: bool
    margin: float
    offending_point: np.ndarray = None


def _one_sided_margin(src: AnnulusShell, dst: AnnulusShell, resolution: int):
    angles = np.linspace(-np.pi, np.pi, resolution, endpoint=False)
    levels = np.linspace(-src.b, src.a, resolution)
    d = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    P = src.ellipsoid.P
    dPd = np.einsum("ij,jk,ik->i", d, P, d)
    q = src.ellipsoid.delta**2 - src.ellipsoid.gamma * levels
    r = np.sqrt(2.0 * q[:, None] / dPd[None, :])
    pts = src.ellipsoid.center + (r[:, :, None] * d[None, :, :]).reshape(-1, 2)

    e = pts - dst.ellipsoid.center
    h2 = dst.ellipsoid.gamma * (
        dst.ellipsoid.delta**2 - 0.5 * np.einsum("ij,jk,ik->i", e, dst.ellipsoid.P, e)
    )
    # distance of h2 to the band [-b2, a2]; negative inside the band
    margin = np.maximum(h2 - dst.a, -dst.b - h2)
    idx = int(np.argmin(margin))
    return float(margin[idx]), pts[idx]


def annuli_disjoint(
    s1: AnnulusShell, s2: AnnulusShell, resolution: int = 256
) -> DisjointnessReport:
    """Deterministic polar-grid test that two shells do not intersect.

    Samples each shell on a resolution x resolution (h-level, angle) grid and
    checks membership of every point in the other shell; report-only, callers
    escalate. resolution >= 64 required (tangency detection needs density).
    """
    if resolution < 64:
        raise ValueError(f"resolution must be >= 64, got {resolution}")
    m12, p12 = _one_sided_margin(s1, s2, resolution)
    m21, p21 = _one_sided_margin(s2, s1, resolution)
    if m12 <= m21:
        margin, point = m12, p12
    else:
        margin, point = m21, p21
    return DisjointnessReport(disjoint=margin > 0.0, margin=margin, offending_point=point)


def level_set_points(ell: Ellipsoid, h_level: float, n: int = 512) -> np.ndarray:
    """Polyline of the level set {c(z) = h_level}, for plotting and export."""
    q = ell.delta**2 - ell.gamma * h_level
    if q <= 0:
        raise ValueError(f"level set c={h_level} is empty (quadratic level {q})")
    angles = np.linspace(-np.pi, np.pi, n)
    d = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    dPd = np.einsum("ij,jk,ik->i", d, ell.P, d)
    r = np.sqrt(2.0 * q / dPd)
    return ell.center + r[:, None] * d
