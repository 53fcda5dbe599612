import numpy as np
import pytest

from barrier_guard.barrier_core import AlphaFn, BarrierSpec, InputBox, blend_single
from barrier_guard.qp import (
    DegenerateConstraintError,
    QpProblem,
    barrier_half_space,
    grid_qp_oracle,
    kkt_residuals,
    lipschitz_probe,
    min_norm_us,
    solve_stacked_qp,
)


def line_barrier(a=0.5, b=0.5, alpha_gain=1.0):
    """h(x) = x1 on a 2-state plant with full input authority on x1."""
    return BarrierSpec(
        h=lambda x: float(x[0]),
        grad_h=lambda x: np.array([1.0, 0.0]),
        a=a,
        b=b,
        alpha=AlphaFn(alpha_gain),
        safety_ctrl=None,
    )


F_DRIFT = lambda x: np.array([-1.0, 0.0])
G_ID = lambda x: np.eye(2)


class TestMinNorm:
    def test_outside_annulus_zero(self):
        bar = line_barrier()
        assert np.array_equal(min_norm_us(bar, F_DRIFT, G_ID, [2.0, 0.0]), [0.0, 0.0])

    def test_hand_example(self):
        # L_g h = (1,0), L_f h = -1, alpha(h)=0 at h=0: u = (1, 0)
        bar = line_barrier()
        u = min_norm_us(bar, F_DRIFT, G_ID, [0.0, 0.0])
        assert u == pytest.approx([1.0, 0.0], abs=1e-12)

    def test_inactive_constraint_zero(self):
        bar = line_barrier(alpha_gain=10.0)  # alpha(0.13) = 1.3 > |L_f h|
        assert np.array_equal(min_norm_us(bar, F_DRIFT, G_ID, [0.13, 0.0]), [0.0, 0.0])

    def test_degenerate_lg_raises(self):
        bar = line_barrier()
        g_null = lambda x: np.zeros((2, 2))
        with pytest.raises(DegenerateConstraintError):
            min_norm_us(bar, F_DRIFT, g_null, [0.0, 0.0])

    def test_lattice_oracle_bulk(self):
        # brute-force feasible-lattice minimum-norm agrees within resolution
        rng = np.random.default_rng(17)
        for _ in range(300):
            lg = rng.normal(size=2)
            while np.linalg.norm(lg) < 0.3:
                lg = rng.normal(size=2)
            lf = rng.normal() * 2
            h = rng.uniform(-0.5, 0.5)
            gain = rng.uniform(0.2, 3.0)
            bar = BarrierSpec(
                h=lambda x, h=h: h,
                grad_h=lambda x, lg=lg: lg.copy(),
                a=0.5,
                b=0.5,
                alpha=AlphaFn(gain),
                safety_ctrl=None,
            )
            f = lambda x, lf=lf, lg=lg: np.array([lf / (lg @ lg) * lg[0], lf / (lg @ lg) * lg[1]])
            u = min_norm_us(bar, f, G_ID, [0.0, 0.0])
            rho = lf + bar.alpha(h)
            # constraint satisfied with equality when active
            assert lg @ u + rho >= -1e-9
            # lattice search around the analytic answer
            half = max(0.5, 1.2 * np.linalg.norm(u))
            res = 2 * half / 400
            axis = np.linspace(-half, half, 401)
            U1, U2 = np.meshgrid(axis, axis, indexing="ij")
            feas = U1 * lg[0] + U2 * lg[1] >= -rho
            norms = np.where(feas, np.hypot(U1, U2), np.inf)
            k = np.unravel_index(np.argmin(norms), norms.shape)
            assert abs(np.hypot(*u) - norms[k]) <= 2 * res * np.sqrt(2)

    def test_safety_substitution(self):
        # plugging u_s back into the certified inequality stays >= -1e-9
        rng = np.random.default_rng(18)
        bar = line_barrier(alpha_gain=0.7)
        for _ in range(500):
            x = np.array([rng.uniform(-0.5, 0.5), rng.normal()])
            u = min_norm_us(bar, F_DRIFT, G_ID, x)
            grad = bar.grad_h(x)
            val = grad @ F_DRIFT(x) + grad @ G_ID(x) @ u + bar.alpha(bar.h(x))
            assert val >= -1e-9

    def test_remark1_blend_consistency(self):
        # blending the min-norm construction leaves u_nom untouched outside A
        bar = BarrierSpec(
            h=lambda x: float(x[0]),
            grad_h=lambda x: np.array([1.0, 0.0]),
            a=0.5,
            b=0.5,
            alpha=AlphaFn(1.0),
            safety_ctrl=lambda x: min_norm_us(line_barrier(), F_DRIFT, G_ID, x),
        )
        u_nom = np.array([0.77, -0.33])
        rep = blend_single(bar, np.array([3.0, 0.0]), u_nom)
        assert rep.u_star[0] == u_nom[0] and rep.u_star[1] == u_nom[1]


class TestStackedQp:
    def test_feasible_nominal_passthrough(self):
        p = QpProblem(
            u_nom=np.array([0.5, -0.5]),
            half_spaces=[(np.array([1.0, 0.0]), -1.0)],
            box=InputBox.symmetric([2.0, 2.0]),
        )
        sol = solve_stacked_qp(p)
        assert sol.status == "optimal"
        assert np.array_equal(sol.u, p.u_nom)
        assert sol.active_set == ()

    def test_single_halfspace_projection(self):
        # violated half space, no box: Euclidean projection formula
        rng = np.random.default_rng(19)
        for _ in range(200):
            row = rng.normal(size=2)
            while np.linalg.norm(row) < 0.2:
                row = rng.normal(size=2)
            u_nom = rng.normal(size=2) * 2
            rhs = row @ u_nom + rng.uniform(0.1, 2.0)  # make it violated
            p = QpProblem(u_nom=u_nom, half_spaces=[(row, rhs)])
            sol = solve_stacked_qp(p)
            expect = u_nom + (rhs - row @ u_nom) / (row @ row) * row
            assert sol.u == pytest.approx(expect, abs=1e-10)

    def test_grid_oracle_never_beats_solver(self):
        # every feasible lattice point is at least as far from u_nom; narrow
        # feasible wedges keep the reverse direction from being resolution-bounded
        rng = np.random.default_rng(20)
        box = InputBox.symmetric([2.0, 2.0])
        for _ in range(100):
            nrows = rng.integers(1, 6)
            rows = [(rng.normal(size=2), rng.uniform(-1.5, 1.5)) for _ in range(nrows)]
            u_nom = rng.uniform(-3, 3, size=2)
            p = QpProblem(u_nom=u_nom, half_spaces=rows, box=box)
            sol = solve_stacked_qp(p)
            oracle = grid_qp_oracle(p, half_width=6.0, n=401)
            if sol.infeasible:
                continue
            assert oracle is not None
            assert np.linalg.norm(sol.u - u_nom) <= np.linalg.norm(oracle - u_nom) + 1e-9

    def test_grid_oracle_two_sided_single_row(self):
        # half-plane geometry: nearest feasible lattice point is within a cell
        rng = np.random.default_rng(25)
        for _ in range(100):
            row = rng.normal(size=2)
            while np.linalg.norm(row) < 0.2:
                row = rng.normal(size=2)
            u_nom = rng.uniform(-2, 2, size=2)
            rhs = row @ u_nom + rng.uniform(0.05, 1.5) * np.linalg.norm(row)
            p = QpProblem(u_nom=u_nom, half_spaces=[(row, rhs)])
            sol = solve_stacked_qp(p)
            oracle = grid_qp_oracle(p, half_width=3.0, n=401)
            res = 6.0 / 400
            # objective agreement; the lattice argmin may slide along the
            # boundary where the objective is flat to second order
            d_sol = np.linalg.norm(sol.u - u_nom)
            d_oracle = np.linalg.norm(oracle - u_nom)
            assert 0.0 <= d_oracle - d_sol <= 2 * res * np.sqrt(2)
            assert row @ oracle >= rhs

    def test_antiparallel_infeasible(self):
        p = QpProblem(
            u_nom=np.zeros(2),
            half_spaces=[(np.array([1.0, 0.0]), 1.0), (np.array([-1.0, 0.0]), 1.0)],
        )
        sol = solve_stacked_qp(p)
        assert sol.infeasible
        assert sol.u is None

    def test_box_infeasible_constraint(self):
        # row requires u_1 >= 3 but the box caps at 2
        p = QpProblem(
            u_nom=np.zeros(2),
            half_spaces=[(np.array([1.0, 0.0]), 3.0)],
            box=InputBox.symmetric([2.0, 2.0]),
        )
        assert solve_stacked_qp(p).infeasible

    def test_kkt_residuals_random(self):
        rng = np.random.default_rng(22)
        box = InputBox.symmetric([2.0, 2.0])
        solved = 0
        while solved < 500:
            nrows = rng.integers(0, 8)
            rows = [(rng.normal(size=2) * 2, rng.uniform(-2, 2)) for _ in range(nrows)]
            p = QpProblem(u_nom=rng.uniform(-4, 4, size=2), half_spaces=rows, box=box)
            sol = solve_stacked_qp(p)
            if sol.infeasible:
                continue
            res = kkt_residuals(p, sol)
            assert res["stationarity"] <= 1e-9
            assert res["primal"] <= 1e-9
            assert res["dual"] <= 1e-9
            assert res["complementarity"] <= 1e-7
            solved += 1

    def test_deterministic(self):
        p = QpProblem(
            u_nom=np.array([3.0, 0.0]),
            half_spaces=[(np.array([1.0, 1.0]), 1.0), (np.array([1.0, -1.0]), 1.0)],
            box=InputBox.symmetric([2.0, 2.0]),
        )
        s1 = solve_stacked_qp(p)
        s2 = solve_stacked_qp(p)
        assert np.array_equal(s1.u, s2.u)
        assert s1.active_set == s2.active_set

    def test_rejects_nonfinite_rows(self):
        with pytest.raises(ValueError):
            QpProblem(u_nom=np.zeros(2), half_spaces=[(np.array([np.inf, 0.0]), 0.0)])

    def test_dimension_guard(self):
        with pytest.raises(ValueError):
            solve_stacked_qp(QpProblem(u_nom=np.zeros(5)))


class TestBarrierHalfSpace:
    def test_row_encodes_condition(self):
        bar = line_barrier(alpha_gain=2.0)
        x = np.array([0.2, 0.0])
        row, rhs = barrier_half_space(bar, F_DRIFT, G_ID, x)
        # L_f h + L_g h u + alpha(h) >= 0  <=>  row @ u >= rhs
        assert np.allclose(row, [1.0, 0.0])
        assert rhs == pytest.approx(-2.0 * 0.2 - (-1.0))


class TestLipschitzProbe:
    def test_constant_controller(self):
        rng = np.random.default_rng(23)
        q = lipschitz_probe(lambda x: np.array([1.0, 2.0]), [(-1, 1), (-1, 1)], 1000, rng)
        assert q == 0.0

    def test_linear_controller_matches_norm(self):
        A = np.array([[1.0, 2.0], [0.0, 3.0]])
        rng = np.random.default_rng(24)
        q = lipschitz_probe(lambda x: A @ x, [(-1, 1), (-1, 1)], 20_000, rng)
        spectral = np.linalg.svd(A, compute_uv=False)[0]
        assert q <= spectral + 1e-9
        assert q >= 0.8 * spectral
