import numpy as np
import pytest

from inexact_pg import (ConvergenceError, GapBelow, GroupStructure,
                        RowColGroups, Sweeps, duality_gap,
                        inject_prox_error, iter_dykstra_states, l1_term,
                        prox_group_l2, prox_l1, prox_overlap_bcd,
                        proximal_objective, rowcol_term, zero_term)


def rowcol_prox_objective(y, L, rc, x):
    return proximal_objective(rowcol_term(rc), y, L, x)


class TestProxL1:
    def test_zero_input(self):
        assert np.all(prox_l1(np.zeros(2), 1.0, 3.0) == 0)

    def test_shrink_by_ratio(self):
        out = prox_l1(np.array([3.0, -1.0]), 2.0, 2.0)
        assert out == pytest.approx([2.0, 0.0])

    def test_beats_grid_search(self):
        # brute-force oracle: dense grid over a box containing the minimizer
        rng = np.random.default_rng(4)
        grid = np.arange(-2.0, 2.0 + 1e-9, 1e-3)
        for _ in range(5):
            y = rng.uniform(-1.8, 1.8, size=2)
            lam = float(rng.uniform(0.1, 2.0))
            L = float(rng.uniform(0.5, 3.0))
            h = l1_term(lam)
            x = prox_l1(y, L, lam)
            bestq = np.inf
            for g0 in grid:
                q = (0.5 * L * ((g0 - y[0]) ** 2 + (grid - y[1]) ** 2)
                     + lam * (abs(g0) + np.abs(grid)))
                bestq = min(bestq, q.min())
            assert proximal_objective(h, y, L, x) <= bestq + 1e-12

    def test_subgradient_optimality(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            y = rng.standard_normal(8)
            lam = float(rng.uniform(0.05, 2.0))
            L = float(rng.uniform(0.5, 3.0))
            x = prox_l1(y, L, lam)
            r = L * (y - x)
            on = x != 0
            assert np.allclose(r[on], lam * np.sign(x[on]), atol=1e-12)
            assert np.all(np.abs(r[~on]) <= lam + 1e-12)

    def test_nonexpansive(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            y1, y2 = rng.standard_normal((2, 6))
            lam = float(rng.uniform(0.0, 2.0))
            d = np.linalg.norm(prox_l1(y1, 2.0, lam) - prox_l1(y2, 2.0, lam))
            assert d <= np.linalg.norm(y1 - y2) * (1 + 1e-12)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            prox_l1(np.zeros(2), 0.0, 1.0)
        with pytest.raises(ValueError):
            prox_l1(np.zeros(2), 1.0, -1.0)


class TestProxGroupL2:
    def test_zero_blocks_stay_zero(self):
        gs = GroupStructure(groups=(np.array([0, 1]), np.array([2, 3])),
                            weights=[1.0, 2.0])
        assert np.all(prox_group_l2(np.zeros(4), 1.0, gs) == 0)

    def test_boundary_shrinks_to_zero(self):
        gs = GroupStructure(groups=(np.array([0, 1]),), weights=[5.0])
        out = prox_group_l2(np.array([3.0, 4.0]), 1.0, gs)
        assert np.all(out == 0)

    def test_interior_shrink_factor(self):
        gs = GroupStructure(groups=(np.array([0, 1]),), weights=[5.0])
        out = prox_group_l2(np.array([6.0, 8.0]), 1.0, gs)
        assert out == pytest.approx([3.0, 4.0])   # factor 1 - 5/10

    def test_ungrouped_coordinates_pass_through(self):
        gs = GroupStructure(groups=(np.array([1, 2]),), weights=[10.0])
        y = np.array([7.0, 1.0, 1.0, -4.0])
        out = prox_group_l2(y, 1.0, gs)
        assert out[0] == 7.0 and out[3] == -4.0
        assert np.all(out[1:3] == 0)

    def test_overlap_rejected(self):
        gs = GroupStructure(groups=(np.array([0, 1]), np.array([1, 2])),
                            weights=[1.0, 1.0])
        with pytest.raises(ValueError):
            prox_group_l2(np.zeros(3), 1.0, gs)

    def test_matches_bcd_on_disjoint_rows(self):
        # rows of a matrix are disjoint groups; columns get zero weight
        rng = np.random.default_rng(7)
        y = rng.standard_normal(12)
        rc = RowColGroups(n_rows=3, n_cols=4, lambda_row=0.8, lambda_col=0.0)
        gs = GroupStructure(
            groups=tuple(np.arange(4) + 4 * i for i in range(3)),
            weights=[0.8] * 3)
        closed = prox_group_l2(y, 2.0, gs)
        res = prox_overlap_bcd(y, 2.0, rc, GapBelow(1e-12))
        assert np.linalg.norm(res.point - closed) <= 1e-6

    def test_subgradient_optimality(self):
        rng = np.random.default_rng(8)
        gs = GroupStructure(groups=(np.array([0, 1, 2]), np.array([3, 4])),
                            weights=[1.3, 0.4])
        for _ in range(50):
            y = rng.standard_normal(5)
            L = float(rng.uniform(0.5, 3.0))
            x = prox_group_l2(y, L, gs)
            r = L * (y - x)
            for g, w in zip(gs.groups, gs.weights):
                if np.linalg.norm(x[g]) > 0:
                    expect = w * x[g] / np.linalg.norm(x[g])
                    assert np.allclose(r[g], expect, atol=1e-12)
                else:
                    assert np.linalg.norm(r[g]) <= w + 1e-12

    def test_nonexpansive(self):
        gs = GroupStructure(groups=(np.array([0, 1]), np.array([2, 3])),
                            weights=[0.9, 1.7])
        rng = np.random.default_rng(9)
        for _ in range(100):
            y1, y2 = rng.standard_normal((2, 4))
            d = np.linalg.norm(prox_group_l2(y1, 1.5, gs)
                               - prox_group_l2(y2, 1.5, gs))
            assert d <= np.linalg.norm(y1 - y2) * (1 + 1e-12)


class TestProxOverlapBCD:
    def test_zero_penalties_return_center(self):
        y = np.arange(6.0)
        rc = RowColGroups(2, 3, 0.0, 0.0)
        res = prox_overlap_bcd(y, 1.0, rc, GapBelow(1e-10))
        assert np.all(res.point == y)
        assert res.certified_gap == 0.0
        assert res.inner_iterations == 0

    def test_single_row_degenerates_to_closed_form(self):
        rng = np.random.default_rng(10)
        y = rng.standard_normal(7)
        rc = RowColGroups(1, 7, 1.2, 0.0)
        res = prox_overlap_bcd(y, 1.5, rc, GapBelow(1e-12))
        gs = GroupStructure(groups=(np.arange(7),), weights=[1.2])
        assert np.linalg.norm(res.point - prox_group_l2(y, 1.5, gs)) <= 1e-10

    def test_random_5x5_matches_longrun(self):
        rng = np.random.default_rng(11)
        y = rng.standard_normal(25)
        rc = RowColGroups(5, 5, 0.01, 0.01)
        ref = prox_overlap_bcd(y, 1.0, rc, Sweeps(10 ** 5))
        res = prox_overlap_bcd(y, 1.0, rc, GapBelow(1e-10))
        diff = (rowcol_prox_objective(y, 1.0, rc, res.point)
                - rowcol_prox_objective(y, 1.0, rc, ref.point))
        assert diff <= 1e-8

    def test_sweeps_stop_runs_exact_count(self):
        y = np.random.default_rng(12).standard_normal(16)
        rc = RowColGroups(4, 4, 0.5, 0.5)
        res = prox_overlap_bcd(y, 1.0, rc, Sweeps(7))
        assert res.inner_iterations == 7

    def test_gap_below_zero_rejected(self):
        with pytest.raises(ValueError):
            GapBelow(0.0)
        with pytest.raises(ValueError):
            GapBelow(-1e-3)

    def test_sweep_cap_raises_with_last_gap(self):
        y = np.random.default_rng(13).standard_normal(16)
        rc = RowColGroups(4, 4, 1.5, 1.5)
        with pytest.raises(ConvergenceError) as exc:
            prox_overlap_bcd(y, 1.0, rc, GapBelow(1e-300), max_sweeps=3)
        assert exc.value.last_gap is not None

    def test_dykstra_identity_every_sweep(self):
        rng = np.random.default_rng(14)
        y = rng.standard_normal(20)
        rc = RowColGroups(4, 5, 0.7, 0.4)
        for st in iter_dykstra_states(y, 2.0, rc, 40):
            recon = y - (st.p_row + st.p_col)
            assert np.linalg.norm(st.z - recon) <= 1e-12

    def test_eps_certificate_is_valid(self):
        # certified gap upper-bounds the true suboptimality vs a long run
        rng = np.random.default_rng(15)
        for _ in range(10):
            y = rng.standard_normal(12)
            rc = RowColGroups(3, 4, rng.uniform(0.05, 1.0),
                              rng.uniform(0.05, 1.0))
            ref = prox_overlap_bcd(y, 1.0, rc, GapBelow(1e-13))
            res = prox_overlap_bcd(y, 1.0, rc, GapBelow(1e-4))
            true_sub = (rowcol_prox_objective(y, 1.0, rc, res.point)
                        - rowcol_prox_objective(y, 1.0, rc, ref.point))
            assert res.certified_gap >= true_sub - 1e-10
            assert res.certified_gap <= 1e-4


class TestDualityGap:
    def test_zero_penalty_zero_corrections(self):
        y = np.arange(4.0)
        rc = RowColGroups(2, 2, 0.0, 0.0)
        gap = duality_gap(y, 1.0, rc, y, np.zeros(4), np.zeros(4))
        assert gap == 0.0

    def test_converged_state_has_tiny_gap(self):
        rng = np.random.default_rng(16)
        y = rng.standard_normal(9)
        rc = RowColGroups(3, 3, 0.3, 0.3)
        last = None
        for st in iter_dykstra_states(y, 1.0, rc, 4000):
            last = st
        gap = duality_gap(y, 1.0, rc, last.z, last.p_row, last.p_col)
        assert 0.0 <= gap <= 1e-12

    def test_gap_dominates_true_suboptimality_for_any_state(self):
        rng = np.random.default_rng(17)
        y = rng.standard_normal(12)
        rc = RowColGroups(3, 4, 0.6, 0.9)
        ref = prox_overlap_bcd(y, 1.0, rc, GapBelow(1e-13))
        p_ref = rowcol_prox_objective(y, 1.0, rc, ref.point)
        # arbitrary (even unconverged) states: projection makes duals feasible
        for _ in range(50):
            z = rng.standard_normal(12)
            p_row = rng.standard_normal(12)
            p_col = rng.standard_normal(12)
            gap = duality_gap(y, 1.0, rc, z, p_row, p_col)
            true_sub = rowcol_prox_objective(y, 1.0, rc, z) - p_ref
            assert gap >= true_sub - 1e-10

    def test_dual_value_ascends_per_sweep(self):
        # the projected dual value is the monotone quantity of the
        # alternating scheme; the primal prox objective may move up and down
        rng = np.random.default_rng(18)
        for _ in range(10):
            y = rng.standard_normal(20)
            rc = RowColGroups(4, 5, rng.uniform(0.05, 1.5),
                              rng.uniform(0.05, 1.5))
            h = rowcol_term(rc)
            prev = -np.inf
            for st in iter_dykstra_states(y, 1.0, rc, 50):
                gap = duality_gap(y, 1.0, rc, st.z, st.p_row, st.p_col)
                dual = proximal_objective(h, y, 1.0, st.z) - gap
                assert dual >= prev - 1e-12 * (1.0 + abs(dual))
                prev = dual


class TestInjectProxError:
    def test_gap_target_is_respected_and_realized(self):
        h = inject_prox_error(l1_term(0.5), seed=0)
        rng = np.random.default_rng(19)
        for eps in (1e-2, 1e-5, 1e-9):
            y = rng.standard_normal(10)
            res = h.prox(y, 2.0, GapBelow(eps))
            exact = prox_l1(y, 2.0, 0.5)
            true_gap = (proximal_objective(l1_term(0.5), y, 2.0, res.point)
                        - proximal_objective(l1_term(0.5), y, 2.0, exact))
            assert 0.0 <= res.certified_gap <= eps
            assert res.certified_gap == pytest.approx(true_gap, abs=1e-15)
            assert res.certified_gap >= 0.5 * eps   # target actually loosened

    def test_exact_request_passes_through(self):
        from inexact_pg import Exact
        h = inject_prox_error(l1_term(0.5), seed=0)
        y = np.array([3.0, -1.0])
        res = h.prox(y, 2.0, Exact())
        assert np.all(res.point == prox_l1(y, 2.0, 0.5))
        assert res.certified_gap == 0.0

    def test_deterministic(self):
        h = inject_prox_error(l1_term(0.3), seed=42)
        y = np.linspace(-1, 1, 6)
        a = h.prox(y, 1.0, GapBelow(1e-3))
        b = h.prox(y, 1.0, GapBelow(1e-3))
        assert np.all(a.point == b.point)
        assert a.certified_gap == b.certified_gap


class TestZeroTerm:
    def test_identity_prox(self):
        y = np.array([1.0, -2.0, 3.0])
        res = zero_term().prox(y, 5.0, GapBelow(1.0))
        assert np.all(res.point == y)
        assert res.certified_gap == 0.0
