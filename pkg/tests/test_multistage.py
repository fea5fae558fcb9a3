import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chanopt.channels import Channel, ChannelSequence, join
from chanopt.control import CostSpec, evaluate_policy, optimal_cost, optimal_policy
from chanopt.measures import DiscreteMeasure, Grid, GridMismatchError
from chanopt.multistage import (
    ControlledKernel,
    HistoryPolicy,
    MultistageModel,
    NumericGuardError,
    UncoveredHistoryError,
    evaluate_history_policy,
    solve_exhaustive,
    uniform_tv_continuity_experiment,
)
from chanopt.oracles import fully_observed_value, open_loop_value, path_sum_value
from chanopt.scenarios import random_model, structured_model

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 3)


def model_from(seed, nx=2, ny=2, nu=2, T=2):
    return random_model(np.random.default_rng(seed), nx, ny, nu, T)


class TestModel:
    def test_kernel_rows_checked(self):
        with pytest.raises(ValueError):
            ControlledKernel(np.ones((2, 2, 2)))

    def test_kernel_shape_checked(self):
        with pytest.raises(ValueError):
            ControlledKernel(np.ones((2, 2, 3)) / 3)

    def test_horizon_positive(self):
        m = model_from(0)
        with pytest.raises(ValueError):
            MultistageModel(m.initial, m.kernel, m.channel, m.cost, 0)

    def test_grid_mismatch(self):
        m = model_from(0)
        other = DiscreteMeasure.uniform(Grid.atoms([5.0, 6.0]))
        with pytest.raises(GridMismatchError):
            MultistageModel(other, m.kernel, m.channel, m.cost, 2)

    def test_history_count(self):
        m = model_from(0, 2, 3, 2, 3)
        assert m.history_count() == 3 + 9 * 2 + 27 * 4


class TestEvaluate:
    @given(seeds, dims, dims, dims)
    def test_single_stage_reduces(self, seed, nx, ny, nu):
        m = model_from(seed, nx + 1, ny, nu, 1)
        rng = np.random.default_rng(seed)
        per_y = rng.integers(0, nu, ny)
        got = evaluate_history_policy(m, HistoryPolicy.stationary(m, per_y))
        assert got == pytest.approx(evaluate_policy(m.initial, m.channel, m.cost, per_y), abs=1e-14)

    def test_constant_policy_matrix_powers(self):
        g = Grid.atoms([0.0, 1.0, 2.0])
        perm = np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float)
        cost = CostSpec(g, Grid.atoms([0, 1]), [[1.0, 0.0], [2.0, 0.5], [4.0, 0.1]])
        init = DiscreteMeasure(g, [0.5, 0.3, 0.2])
        m = MultistageModel(init, ControlledKernel.uncontrolled(perm, 2), Channel.identity(g), cost, 4)
        got = evaluate_history_policy(m, HistoryPolicy.from_function(m, lambda ys, us: 0))
        want = sum(init.weights @ np.linalg.matrix_power(perm, t) @ cost.values[:, 0] for t in range(4))
        assert got == pytest.approx(want, abs=1e-14)

    @given(seeds, st.integers(1, 3))
    def test_matches_path_sum(self, seed, T):
        m = model_from(seed, 2, 2, 2, T)
        rng = np.random.default_rng(seed + 1)
        table = {}

        def fn(ys, us):
            key = (ys, us)
            if key not in table:
                table[key] = int(rng.integers(0, 2))
            return table[key]

        pol = HistoryPolicy.from_function(m, fn)
        want = path_sum_value(m.initial.weights, m.kernel.transition, m.channel.kernel, m.cost.values, T, pol)
        assert evaluate_history_policy(m, pol) == pytest.approx(want, abs=1e-13)

    def test_uncovered_history(self):
        m = model_from(0)
        with pytest.raises(UncoveredHistoryError):
            evaluate_history_policy(m, HistoryPolicy({((0,), ()): 0}))


class TestExhaustive:
    @given(seeds, dims, dims, dims)
    def test_single_stage_equals_optimal_policy(self, seed, nx, ny, nu):
        m = model_from(seed, nx + 1, ny, nu, 1)
        assert solve_exhaustive(m).cost == pytest.approx(optimal_cost(m.initial, m.channel, m.cost), abs=1e-12)

    @given(seeds, st.integers(1, 3))
    def test_blind_channel_is_open_loop(self, seed, T):
        m = model_from(seed, 3, 2, 2, T)
        rng = np.random.default_rng(seed)
        blind = Channel.uninformative(m.channel.x_grid, m.channel.y_grid, rng.dirichlet(np.ones(2)))
        got = solve_exhaustive(m.with_channel(blind)).cost
        want = open_loop_value(m.initial.weights, m.kernel.transition, m.cost.values, T)
        assert got == pytest.approx(want, abs=1e-12)

    @given(seeds, st.integers(1, 3))
    def test_perfect_channel_is_fully_observed(self, seed, T):
        m = model_from(seed, 3, 3, 2, T)
        ident = Channel.identity(m.channel.x_grid)
        m = MultistageModel(m.initial, m.kernel, Channel(ident.x_grid, m.channel.y_grid, ident.kernel), m.cost, T)
        got = solve_exhaustive(m).cost
        want = fully_observed_value(m.initial.weights, m.kernel.transition, m.cost.values, T)
        assert got == pytest.approx(want, abs=1e-12)

    @given(seeds)
    def test_policy_achieves_cost(self, seed):
        m = model_from(seed, 2, 2, 3, 3)
        res = solve_exhaustive(m)
        assert evaluate_history_policy(m, res.policy) == pytest.approx(res.cost, abs=1e-13)

    @given(seeds)
    def test_no_worse_than_stationary(self, seed):
        m = model_from(seed, 2, 2, 2, 2)
        best = solve_exhaustive(m).cost
        for a in range(2):
            for b in range(2):
                assert best <= evaluate_history_policy(m, HistoryPolicy.stationary(m, [a, b])) + 1e-13

    def test_budget_guard(self):
        m = model_from(0, 2, 2, 2, 3)
        with pytest.raises(NumericGuardError):
            solve_exhaustive(m, budget=10)

    def test_first_stage_policy_single_stage(self):
        m = model_from(5, 3, 3, 3, 1)
        res = solve_exhaustive(m)
        opt = optimal_policy(m.initial, m.channel, m.cost)
        for y in range(3):
            if opt.y_mass[y] > 0:
                assert res.policy((y,), ()) == opt.policy[y]


class TestContinuityExperiment:
    def test_constant_sequence(self):
        m, _ = structured_model(2)
        rows = uniform_tv_continuity_experiment(m, ChannelSequence.constant(m.channel), [1, 5])
        assert all(r.gap == 0.0 and r.bound == 0.0 and r.holds for r in rows)

    @given(seeds, st.integers(1, 3))
    def test_bound_holds_random(self, seed, T):
        rng = np.random.default_rng(seed)
        m = random_model(rng, 2, 2, 2, T)
        other = Channel(m.channel.x_grid, m.channel.y_grid, np.vstack([rng.dirichlet(np.ones(2)) for _ in range(2)]))
        rows = uniform_tv_continuity_experiment(m, ChannelSequence.mixture_towards(m.channel, other), [1, 2, 3, 7, 50])
        assert all(r.holds for r in rows)

    def test_structured_model_gap_decays(self):
        m, blind = structured_model(2)
        rows = uniform_tv_continuity_experiment(m, ChannelSequence.mixture_towards(m.channel, blind), [1, 2, 4, 8, 16])
        gaps = [r.gap for r in rows]
        assert all(b <= a for a, b in zip(gaps, gaps[1:]))
        assert gaps[0] > 0.1 and gaps[-1] < gaps[0] / 8

    def test_single_stage_bound_dominates_tv_bound(self, rng):
        m = random_model(rng, 3, 3, 2, 1)
        other = Channel(m.channel.x_grid, m.channel.y_grid, np.vstack([rng.dirichlet(np.ones(3)) for _ in range(3)]))
        seq = ChannelSequence.mixture_towards(m.channel, other)
        for r in uniform_tv_continuity_experiment(m, seq, [1, 4]):
            tv = np.abs(join(m.initial, seq(r.n)).mass - join(m.initial, m.channel).mass).sum()
            assert r.bound >= m.cost.sup_norm * tv - 1e-15
