import numpy as np
import pytest

from inexact_pg import (Constant, DoublingL, ErrorSchedule, LassoInstance,
                        SolverConfig, cur_from_csv, gen_cur, gen_lasso,
                        load_matrix_csv, run_basic_pg, solve_reference)


def power_iteration_top_eig(M, iters=5000):
    """Independent largest-eigenvalue oracle for a symmetric PSD matrix."""
    v = np.ones(M.shape[0]) / np.sqrt(M.shape[0])
    for _ in range(iters):
        w = M @ v
        v = w / np.linalg.norm(w)
    return float(v @ (M @ v))


class TestGenLasso:
    def test_identity_spectrum_when_condition_one(self):
        inst = gen_lasso(0, 12, 12, 1.0)
        G = inst.A.T @ inst.A
        assert np.allclose(G, np.eye(12), atol=1e-12)
        assert inst.mu_known == inst.L_known == 1.0

    def test_deterministic_given_seed(self):
        a = gen_lasso(5, 20, 10, 7.0)
        b = gen_lasso(5, 20, 10, 7.0)
        assert np.all(a.A == b.A) and np.all(a.b == b.b)

    def test_condition_number_exact(self):
        inst = gen_lasso(3, 40, 25, 100.0)
        eigs = np.linalg.eigvalsh(inst.A.T @ inst.A)
        assert eigs.max() / eigs.min() == pytest.approx(100.0, abs=1e-6)
        assert eigs.max() == pytest.approx(inst.L_known, rel=1e-12)
        assert eigs.min() == pytest.approx(inst.mu_known, rel=1e-12)

    def test_L_matches_power_iteration(self):
        inst = gen_lasso(4, 30, 15, 9.0)
        est = power_iteration_top_eig(inst.A.T @ inst.A)
        assert est == pytest.approx(inst.L_known, rel=1e-8)

    def test_wide_instance_has_no_strong_convexity(self):
        inst = gen_lasso(0, 10, 40, 5.0)
        assert inst.mu_known == 0.0


class TestGenCur:
    def test_unit_spectral_norm(self):
        inst = gen_cur(0, 15, 12)
        assert np.linalg.norm(inst.W, 2) == pytest.approx(1.0, rel=1e-12)
        assert inst.lipschitz == pytest.approx(1.0, rel=1e-12)

    def test_L_matches_power_iteration(self):
        inst = gen_cur(1, 10, 8)
        top = power_iteration_top_eig(inst.W.T @ inst.W)
        assert top ** 2 == pytest.approx(inst.lipschitz, rel=1e-8)

    def test_deterministic(self):
        assert np.all(gen_cur(9, 6, 7).W == gen_cur(9, 6, 7).W)

    def test_variable_shape_follows_penalty_grouping(self):
        inst = gen_cur(0, 12, 5)
        assert inst.x_shape == (12, 5)
        assert inst.W.shape == (5, 12)
        assert inst.groups.n_rows == 12 and inst.groups.n_cols == 5

    def test_gradient_matches_finite_differences(self):
        inst = gen_cur(2, 6, 5)
        prob = inst.problem()
        rng = np.random.default_rng(0)
        x = rng.standard_normal(prob.dimension)
        grad = prob.g.gradient(x)
        step = 1e-5
        for _ in range(20):
            u = rng.standard_normal(prob.dimension)
            u /= np.linalg.norm(u)
            num = (prob.g.value(x + step * u)
                   - prob.g.value(x - step * u)) / (2 * step)
            assert num == pytest.approx(float(grad @ u),
                                        rel=1e-6, abs=1e-10)

    def test_regularized_solution_zeroes_rows_at_default_penalty(self):
        # rectangular instance where entire rows of X vanish exactly
        inst = gen_cur(1, 40, 10, 0.01, 0.01)
        prob = inst.problem()
        cfg = SolverConfig("basic_convex", 600,
                           ErrorSchedule(Constant(1e-12)), DoublingL(1.0),
                           np.zeros(prob.dimension))
        out = run_basic_pg(prob, cfg)
        X = out.final_x.reshape(40, 10)
        assert np.sum(np.linalg.norm(X, axis=1) == 0) >= 2


class TestCsvImport:
    def test_roundtrip(self, tmp_path):
        W = np.array([[1.0, 2.5], [-3.0, 0.25], [0.0, 7.0]])
        path = tmp_path / "w.csv"
        np.savetxt(path, W, delimiter=",")
        assert np.allclose(load_matrix_csv(path), W)
        inst = cur_from_csv(path, 0.1, 0.2)
        assert inst.W.shape == (3, 2)
        assert inst.x_shape == (2, 3)


class TestSolveReference:
    def test_unregularized_identity_recovers_b(self):
        rng = np.random.default_rng(0)
        b = rng.standard_normal(6)
        inst = LassoInstance(A=np.eye(6), b=b, lam=0.0, mu_known=1.0,
                             L_known=1.0)
        x_star, f_star = solve_reference(inst.problem(), tol=1e-12)
        assert np.allclose(x_star, b, atol=1e-12)
        assert f_star <= 1e-24

    def test_large_penalty_kills_everything(self):
        inst = gen_lasso(1, 20, 10, 4.0)
        lam = float(np.abs(inst.A.T @ inst.b).max()) * 1.001
        big = LassoInstance(A=inst.A, b=inst.b, lam=lam,
                            mu_known=inst.mu_known, L_known=inst.L_known)
        x_star, f_star = solve_reference(big.problem(), tol=1e-12)
        assert np.all(x_star == 0)
        assert f_star == pytest.approx(0.5 * inst.b @ inst.b)

    def test_subgradient_residual(self):
        inst = gen_lasso(2, 40, 20, 10.0)
        tol = 1e-10
        x_star, _ = solve_reference(inst.problem(), tol=tol)
        r = inst.A.T @ (inst.A @ x_star - inst.b)
        on = x_star != 0
        s = np.empty_like(x_star)
        s[on] = np.sign(x_star[on])
        s[~on] = np.clip(-r[~on] / inst.lam, -1.0, 1.0)
        assert np.linalg.norm(r + inst.lam * s) <= 10 * tol

    def test_invariant_to_starting_point(self):
        inst = gen_lasso(3, 40, 20, 10.0)
        prob = inst.problem()
        tol = 1e-9
        rng = np.random.default_rng(0)
        sols = [solve_reference(prob, tol=tol, x0=rng.standard_normal(20))[0]
                for _ in range(3)]
        for i in range(3):
            for j in range(i + 1, 3):
                assert np.linalg.norm(sols[i] - sols[j]) <= 2 * tol

    def test_bad_tol_rejected(self):
        inst = gen_lasso(0, 10, 5, 2.0)
        with pytest.raises(ValueError):
            solve_reference(inst.problem(), tol=0.0)
