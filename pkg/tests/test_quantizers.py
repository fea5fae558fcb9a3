import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chanopt import constructions as cx
from chanopt.channels import Channel, join, product_setwise_gap
from chanopt.control import CostSpec, evaluate_policy, make_action_grid, optimal_cost, optimal_policy
from chanopt.measures import DiscreteMeasure, Grid, TestSetFamily
from chanopt.oracles import enumerate_interval_cost
from chanopt.quantizers import (
    FRQ,
    IntervalQuantizer,
    Quantizer,
    RandomQuantizer,
    as_channel,
    cellwise_setwise_gap,
    decompose_random_quantizer,
    optimize_interval_quantizer,
    policy_to_quantizer,
    recombine,
    round_to_simplex_grid,
    setwise_to_tv_bound,
)

from conftest import simplex

seeds = st.integers(0, 2**32 - 1)


def random_rq(rng, nx, M, sparse=True):
    return RandomQuantizer(Grid.atoms(range(nx)), np.vstack([simplex(rng, M, sparse) for _ in range(nx)]))


class TestTypes:
    def test_cell_range_checked(self):
        with pytest.raises(ValueError):
            Quantizer(Grid.atoms(range(3)), [0, 1, 2], 2)

    def test_single_cell_channel(self):
        ch = as_channel(Quantizer(Grid.atoms(range(3)), [0, 0, 0], 1))
        np.testing.assert_array_equal(ch.kernel, np.ones((3, 1)))

    def test_two_cells_identity(self):
        ch = as_channel(Quantizer(Grid.atoms([0, 1]), [0, 1], 2))
        np.testing.assert_array_equal(ch.kernel, np.eye(2))

    def test_alternating_cells_follow_wave(self):
        q = cx.alternating_quantizer(16, 4)
        np.testing.assert_array_equal(q.cell_of, [0, 0, 1, 1] * 4)

    def test_interval_quantizer(self):
        iq = IntervalQuantizer((0.3, 0.6))
        q = iq.to_quantizer(Grid.atoms([0.0, 0.3, 0.5, 0.9]))
        np.testing.assert_array_equal(q.cell_of, [0, 1, 1, 2])
        with pytest.raises(ValueError):
            IntervalQuantizer((0.6, 0.3))

    def test_frq_validation(self):
        q = Quantizer(Grid.atoms([0, 1]), [0, 1], 2)
        with pytest.raises(ValueError):
            FRQ((0.5, 0.6), (q, q))
        with pytest.raises(ValueError):
            FRQ((1.0,), ())


class TestPolicyToQuantizer:
    def test_nearest_action(self):
        g = Grid.atoms([0.0, 1.0])
        q = policy_to_quantizer([0, 1], CostSpec.quadratic(g, g))
        np.testing.assert_array_equal(q.cell_of, [0, 1])

    def test_duplicate_actions_tie_to_first_cell(self):
        g = Grid.atoms([0.0, 1.0, 2.0])
        q = policy_to_quantizer([1, 1], CostSpec.quadratic(g, g))
        np.testing.assert_array_equal(q.cell_of, [0, 0, 0])

    @given(seeds)
    def test_deterministic_improves_on_random(self, seed):
        rng = np.random.default_rng(seed)
        nx, M = 4, int(rng.integers(2, 5))
        rq = random_rq(rng, nx, M, sparse=False)
        P = DiscreteMeasure(rq.x_grid, simplex(rng, nx))
        cost = CostSpec(rq.x_grid, Grid.atoms(range(5)), rng.uniform(0, 1, (nx, 5)))
        opt = optimal_policy(P, rq.as_channel(), cost)
        q = policy_to_quantizer(opt.policy, cost)
        assert evaluate_policy(P, as_channel(q), cost, opt.policy) <= opt.cost + 1e-12
        assert optimal_cost(P, as_channel(q), cost) <= opt.cost + 1e-12


class TestDecomposition:
    def test_halves(self):
        rq = RandomQuantizer(Grid.atoms([0]), [[0.5, 0.5]])
        frq = decompose_random_quantizer(rq, 2)
        assert frq.weights == (0.5, 0.5)
        assert [q.cell_of[0] for q in frq.quantizers] == [0, 1]
        np.testing.assert_array_equal(recombine(frq).kernel, rq.kernel)

    def test_thirds(self):
        rq = RandomQuantizer(Grid.atoms([0, 1]), [[1 / 3, 2 / 3], [2 / 3, 1 / 3]])
        frq = decompose_random_quantizer(rq, 3)
        assert len(frq.quantizers) == 3 and all(w == 1 / 3 for w in frq.weights)
        first = np.array([q.cell_of for q in frq.quantizers])
        assert (first[:, 0] == 0).sum() == 1 and (first[:, 1] == 0).sum() == 2
        np.testing.assert_allclose(recombine(frq).kernel, rq.kernel, atol=1e-15)

    def test_single_component(self):
        q = Quantizer(Grid.atoms(range(3)), [0, 2, 1], 3)
        np.testing.assert_array_equal(recombine(FRQ((1.0,), (q,))).kernel, as_channel(q).kernel)

    def test_rounding_counts(self):
        counts = round_to_simplex_grid([[0.5, 0.25, 0.25], [0.34, 0.33, 0.33]], 4)
        np.testing.assert_array_equal(counts.sum(axis=1), [4, 4])
        np.testing.assert_array_equal(counts[0], [2, 1, 1])

    @given(seeds, st.integers(1, 16), st.integers(1, 6), st.integers(1, 40))
    def test_round_trip_within_one_over_n(self, seed, nx, M, n):
        rng = np.random.default_rng(seed)
        rq = random_rq(rng, nx, M)
        rec = recombine(decompose_random_quantizer(rq, n))
        assert np.abs(rec.kernel - rq.kernel).max() <= 1.0 / n

    def test_dyadic_refinement_pinned_kernel(self):
        rq = random_rq(np.random.default_rng(20240), 8, 4, sparse=False)
        errs = [np.abs(recombine(decompose_random_quantizer(rq, n)).kernel - rq.kernel).max() for n in (2, 4, 8, 16)]
        assert all(e <= 1 / n for e, n in zip(errs, (2, 4, 8, 16)))
        assert all(b <= a for a, b in zip(errs, errs[1:]))


class TestSetwiseToTV:
    def test_identical(self):
        q = Quantizer(Grid.atoms(range(4)), [0, 1, 1, 0], 2)
        b = setwise_to_tv_bound(DiscreteMeasure.uniform(q.x_grid), q, q)
        assert (b.tv, b.cell_sym_diff_sum, b.holds) == (0.0, 0.0, True)

    def test_sub_interval(self):
        N = 20
        g = Grid.uniform(N)
        P = DiscreteMeasure.uniform(g)
        a = Quantizer(g, (np.arange(N) >= 10).astype(int), 2)
        b = Quantizer(g, (np.arange(N) >= 13).astype(int), 2)
        eps = 3 / N
        r = setwise_to_tv_bound(P, a, b)
        assert r.cell_sym_diff_sum == pytest.approx(2 * eps, abs=1e-15)
        assert r.tv == pytest.approx(2 * eps, abs=1e-15)
        assert r.holds

    @given(seeds, st.integers(1, 12), st.integers(1, 5))
    def test_bound_holds(self, seed, nx, M):
        rng = np.random.default_rng(seed)
        g = Grid.atoms(range(nx))
        P = DiscreteMeasure(g, simplex(rng, nx, sparse=True))
        a = Quantizer(g, rng.integers(0, M, nx), M)
        b = Quantizer(g, rng.integers(0, M, nx), M)
        r = setwise_to_tv_bound(P, a, b)
        assert r.tv <= r.cell_sym_diff_sum + 1e-12

    def test_cellwise_gap_matches_subset_enumeration(self, rng):
        nx = 6
        P = DiscreteMeasure(Grid.atoms(range(nx)), simplex(rng, nx))
        a, b = random_rq(rng, nx, 3).as_channel(), random_rq(rng, nx, 3).as_channel()
        b = Channel(a.x_grid, a.y_grid, b.kernel)
        want = product_setwise_gap(join(P, a), join(P, b), TestSetFamily.all_subsets(nx), TestSetFamily.singletons(3))
        assert cellwise_setwise_gap(P, a, b) == pytest.approx(want, abs=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 4, 8])
    def test_alternating_sequence_keeps_quarter(self, n):
        P, limit, seq = cx.alternating_quantizer_sequence(32)
        assert cellwise_setwise_gap(P, seq(n), limit.as_channel()) == pytest.approx(0.25, abs=1e-15)


class TestIntervalQuantizer:
    def test_uniform_two_cells(self):
        N = 256
        x = Grid.uniform(N)
        P = DiscreteMeasure.uniform(x)
        cost = CostSpec.quadratic(x, make_action_grid(np.linspace(0, 1, 1025)))
        res = optimize_interval_quantizer(P, cost, 2)
        assert abs(res.quantizer.thresholds[0] - 0.5) <= 1 / N
        assert res.cost_value == pytest.approx(1 / 48, abs=1e-3)
        oracle, cuts = enumerate_interval_cost(P, cost, 2)
        assert res.cost_value == oracle and res.cuts == cuts

    def test_one_cell_per_point(self, rng):
        x = Grid.atoms(np.sort(rng.uniform(0, 1, 6)))
        P = DiscreteMeasure(x, simplex(rng, 6))
        cost = CostSpec.quadratic(x, x)
        assert optimize_interval_quantizer(P, cost, 6).cost_value == 0.0

    def test_single_cell(self, rng):
        x = Grid.atoms(np.sort(rng.uniform(0, 1, 7)))
        P = DiscreteMeasure(x, simplex(rng, 7))
        cost = CostSpec(x, Grid.atoms(range(3)), rng.uniform(0, 1, (7, 3)))
        res = optimize_interval_quantizer(P, cost, 1)
        assert res.cost_value == pytest.approx(float((P.weights @ cost.values).min()), abs=1e-15)
        assert res.quantizer.thresholds == ()

    def test_rejects_unsorted_grid(self):
        x = Grid.atoms([0.5, 0.1])
        with pytest.raises(ValueError):
            optimize_interval_quantizer(DiscreteMeasure.uniform(x), CostSpec.quadratic(x, x), 1)

    @given(seeds, st.integers(1, 24), st.integers(1, 4))
    def test_matches_enumeration_exactly(self, seed, N, M):
        rng = np.random.default_rng(seed)
        M = min(M, N)
        x = Grid.atoms(np.sort(rng.uniform(0, 1, N)))
        P = DiscreteMeasure(x, simplex(rng, N, sparse=True))
        cost = CostSpec(x, Grid.atoms(range(4)), rng.uniform(0, 1, (N, 4)))
        res = optimize_interval_quantizer(P, cost, M)
        oracle, _ = enumerate_interval_cost(P, cost, M)
        assert res.cost_value == oracle

    @given(seeds)
    def test_reported_quantizer_achieves_cost(self, seed):
        rng = np.random.default_rng(seed)
        N, M = 12, 3
        x = Grid.atoms(np.sort(rng.uniform(0, 1, N)))
        P = DiscreteMeasure(x, simplex(rng, N))
        cost = CostSpec.quadratic(x, make_action_grid(np.linspace(0, 1, 21)))
        res = optimize_interval_quantizer(P, cost, M)
        q = res.quantizer.to_quantizer(x)
        assert evaluate_policy(P, as_channel(q), cost, res.policy) == pytest.approx(res.cost_value, abs=1e-14)
        assert optimal_cost(P, as_channel(q), cost) == pytest.approx(res.cost_value, abs=1e-14)
