import numpy as np
import pytest

from barrier_guard.geometry import (
    AnnulusShell,
    Ellipsoid,
    annuli_disjoint,
    eta,
    eta_grid_oracle,
    eval_c,
    grad_c,
    level_set_points,
)


def fd_grad(ell, z, eps=1e-6):
    """Central finite differences of eval_c; the independent gradient oracle."""
    z = np.asarray(z, dtype=float)
    out = np.zeros(2)
    for j in range(2):
        dz = np.zeros(2)
        dz[j] = eps
        out[j] = (eval_c(ell, z + dz) - eval_c(ell, z - dz)) / (2 * eps)
    return out


def random_ellipsoid(rng, gamma=None):
    gamma = gamma if gamma is not None else int(rng.choice([-1, 1]))
    semis = rng.uniform(0.5, 3.0, size=2)
    angle = rng.uniform(-np.pi, np.pi)
    center = rng.uniform(-5, 5, size=2)
    delta = rng.uniform(0.5, 2.0)
    return Ellipsoid.from_semiaxes(gamma, semis, angle, center, delta)


class TestEllipsoid:
    def test_rejects_bad_gamma(self):
        with pytest.raises(ValueError):
            Ellipsoid(gamma=0, delta=1.0, P=np.eye(2), center=np.zeros(2))

    def test_rejects_asymmetric_p(self):
        P = np.array([[1.0, 0.1], [0.0, 1.0]])
        with pytest.raises(ValueError):
            Ellipsoid(gamma=1, delta=1.0, P=P, center=np.zeros(2))

    def test_rejects_indefinite_p(self):
        with pytest.raises(ValueError):
            Ellipsoid(gamma=1, delta=1.0, P=np.diag([1.0, -0.5]), center=np.zeros(2))

    def test_semiaxes_boundary(self):
        ell = Ellipsoid.from_semiaxes(1, (2.0, 1.0), angle=0.3, center=(1.0, -2.0))
        c, s = np.cos(0.3), np.sin(0.3)
        R = np.array([[c, -s], [s, c]])
        for axis_pt in (R @ [2.0, 0.0], R @ [0.0, 1.0]):
            assert eval_c(ell, np.array([1.0, -2.0]) + axis_pt) == pytest.approx(0.0, abs=1e-12)


class TestEvalC:
    def test_center_value(self):
        ell = Ellipsoid(gamma=1, delta=1.0, P=np.eye(2), center=np.zeros(2))
        assert eval_c(ell, [0.0, 0.0]) == 1.0

    def test_boundary_level(self):
        ell = Ellipsoid(gamma=1, delta=1.0, P=np.eye(2), center=np.zeros(2))
        z = np.array([np.sqrt(2.0), 0.0])  # 0.5*||z||^2 = 1
        assert eval_c(ell, z) == pytest.approx(0.0, abs=1e-12)

    def test_obstacle_outside_positive(self):
        # gamma=-1, e=(2,0): 0.5 e'e = 2, c = -(1-2) = 1
        ell = Ellipsoid(gamma=-1, delta=1.0, P=np.eye(2), center=np.zeros(2))
        assert eval_c(ell, [2.0, 0.0]) == pytest.approx(1.0, abs=1e-15)

    def test_level_set_consistency_random_directions(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            ell = random_ellipsoid(rng)
            th = rng.uniform(-np.pi, np.pi)
            d = np.array([np.cos(th), np.sin(th)])
            r = np.sqrt(2.0 * ell.delta**2 / (d @ ell.P @ d))
            assert abs(eval_c(ell, ell.center + r * d)) < 1e-9


class TestGradC:
    def test_vanishes_at_center(self):
        ell = Ellipsoid(gamma=1, delta=1.0, P=np.eye(2), center=np.array([2.0, 3.0]))
        assert np.array_equal(grad_c(ell, [2.0, 3.0]), [0.0, 0.0])

    def test_hand_values(self):
        ell = Ellipsoid(gamma=1, delta=1.0, P=np.eye(2), center=np.zeros(2))
        assert grad_c(ell, [1.0, 0.0]) == pytest.approx([-1.0, 0.0], abs=1e-12)
        ell2 = Ellipsoid(gamma=-1, delta=1.0, P=np.diag([2.0, 1.0]), center=np.zeros(2))
        assert grad_c(ell2, [1.0, 1.0]) == pytest.approx([2.0, 1.0], abs=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        worst = 0.0
        for _ in range(1000):
            ell = random_ellipsoid(rng)
            z = ell.center + rng.uniform(-4, 4, size=2)
            g = grad_c(ell, z)
            g_fd = fd_grad(ell, z)
            scale = max(1.0, np.linalg.norm(g))
            worst = max(worst, np.linalg.norm(g - g_fd) / scale)
        assert worst <= 1e-5


class TestAnnulusShell:
    def test_center_exclusion_stay_inside(self):
        ell = Ellipsoid(gamma=1, delta=1.0, P=np.eye(2), center=np.zeros(2))
        AnnulusShell(ellipsoid=ell, a=0.5, b=2.0)  # fine: a < delta^2
        with pytest.raises(ValueError):
            AnnulusShell(ellipsoid=ell, a=1.0, b=0.5)  # annulus reaches the center

    def test_center_exclusion_obstacle(self):
        ell = Ellipsoid(gamma=-1, delta=1.0, P=np.eye(2), center=np.zeros(2))
        AnnulusShell(ellipsoid=ell, a=2.0, b=0.5)
        with pytest.raises(ValueError):
            AnnulusShell(ellipsoid=ell, a=0.5, b=1.0)

    def test_membership_equals_h_band(self):
        rng = np.random.default_rng(5)
        ell = Ellipsoid.from_semiaxes(-1, (1.5, 1.0), 0.4, (1.0, 2.0))
        shell = AnnulusShell(ellipsoid=ell, a=0.7, b=0.6)
        pts = rng.uniform(-2, 4, size=(10_000, 2))
        for z in pts:
            h = shell.h(z)
            assert shell.contains(z) == (-shell.b <= h <= shell.a)

    def test_point_at_hits_level(self):
        rng = np.random.default_rng(6)
        ell = Ellipsoid.from_semiaxes(1, (2.0, 1.0), 0.2, (0.0, 0.0))
        shell = AnnulusShell(ellipsoid=ell, a=0.5, b=0.5)
        for _ in range(100):
            lev = rng.uniform(-0.5, 0.5)
            ang = rng.uniform(-np.pi, np.pi)
            z = shell.point_at(lev, ang)
            assert shell.h(z) == pytest.approx(lev, abs=1e-10)


class TestEta:
    def test_unit_circle_example(self):
        ell = Ellipsoid(gamma=1, delta=1.0, P=np.eye(2), center=np.zeros(2))
        shell = AnnulusShell(ellipsoid=ell, a=0.5, b=0.5)
        assert eta(shell) == pytest.approx(np.sqrt(3.0), abs=1e-12)
        assert eta(shell) == pytest.approx(eta_grid_oracle(shell), rel=1e-3)

    def test_anisotropic_obstacle_example(self):
        ell = Ellipsoid(gamma=-1, delta=1.0, P=np.diag([4.0, 1.0]), center=np.zeros(2))
        shell = AnnulusShell(ellipsoid=ell, a=1.0, b=0.5)
        assert eta(shell) == pytest.approx(4.0, abs=1e-12)
        assert eta(shell) == pytest.approx(eta_grid_oracle(shell), rel=1e-3)

    def test_collapsed_shell_limit(self):
        ell = Ellipsoid(gamma=1, delta=1.0, P=np.eye(2), center=np.zeros(2))
        shell = AnnulusShell(ellipsoid=ell, a=1e-9, b=1e-9)
        assert eta(shell) == pytest.approx(np.sqrt(2.0), rel=1e-8)

    def test_grid_oracle_on_random_shells(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            ell = random_ellipsoid(rng)
            inner = ell.delta**2
            if ell.gamma == 1:
                a = rng.uniform(0.05, 0.9) * inner
                b = rng.uniform(0.05, 1.5)
            else:
                a = rng.uniform(0.05, 1.5)
                b = rng.uniform(0.05, 0.9) * inner
            shell = AnnulusShell(ellipsoid=ell, a=a, b=b)
            assert eta(shell) == pytest.approx(eta_grid_oracle(shell, 512), rel=1e-3)

    def test_dominates_shell_samples(self):
        rng = np.random.default_rng(13)
        ell = Ellipsoid.from_semiaxes(-1, (1.2, 0.7), 0.9, (0.5, -1.0))
        shell = AnnulusShell(ellipsoid=ell, a=0.8, b=0.6)
        bound = eta(shell)
        for z in shell.sample(10_000, rng):
            assert np.linalg.norm(ell.P @ (z - ell.center)) <= bound + 1e-9


class TestDisjointness:
    def circle_shell(self, cx, r=1.0, a=0.3, b=0.3, gamma=-1):
        ell = Ellipsoid.from_semiaxes(gamma, (r, r), 0.0, (cx, 0.0))
        return AnnulusShell(ellipsoid=ell, a=a, b=b)

    def test_far_apart(self):
        rep = annuli_disjoint(self.circle_shell(0.0), self.circle_shell(10.0))
        assert rep.disjoint and rep.margin > 0

    def test_identical_shells(self):
        rep = annuli_disjoint(self.circle_shell(0.0), self.circle_shell(0.0))
        assert not rep.disjoint

    def test_tangent_shells_detected(self):
        # outer level sets h = a touch: radius of the h=a set is r*sqrt(1+a)
        r_outer = np.sqrt(1.0 + 0.3)
        rep = annuli_disjoint(self.circle_shell(0.0), self.circle_shell(2.0 * r_outer - 1e-6))
        assert not rep.disjoint
        rep2 = annuli_disjoint(self.circle_shell(0.0), self.circle_shell(2.0 * r_outer + 0.05))
        assert rep2.disjoint

    def test_resolution_floor(self):
        with pytest.raises(ValueError):
            annuli_disjoint(self.circle_shell(0.0), self.circle_shell(5.0), resolution=32)


class TestLevelSetPoints:
    def test_points_lie_on_level(self):
        ell = Ellipsoid.from_semiaxes(-1, (1.5, 0.8), 0.7, (2.0, -1.0))
        for lev in (-0.4, 0.0, 0.6):
            pts = level_set_points(ell, lev, n=128)
            vals = [eval_c(ell, p) for p in pts]
            assert np.max(np.abs(np.array(vals) - lev)) < 1e-9

    def test_empty_level_rejected(self):
        ell = Ellipsoid(gamma=1, delta=1.0, P=np.eye(2), center=np.zeros(2))
        with pytest.raises(ValueError):
            level_set_points(ell, 1.5)  # above the peak value delta^2
