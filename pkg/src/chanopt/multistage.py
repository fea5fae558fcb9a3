"""Finite-horizon partially observed control on finite grids.

The state evolves through a controlled kernel ``P(x' | x, u)``; at every stage
the controller sees ``Y_t ~ Q(. | X_t)`` and acts on the whole history
``(y_0..y_t, u_0..u_{t-1})``. Costs are computed by exact propagation of the
unnormalised state distribution attached to each history; nothing is sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .channels import Channel, ChannelSequence, GridMismatchError, uniform_tv
from .control import CostSpec, argmin_lowest
from .measures import NORM_TOL, DiscreteMeasure, _frozen

DEFAULT_BUDGET = 10**7


class NumericGuardError(RuntimeError):
    """Raised when a requested computation exceeds its size budget."""


class UncoveredHistoryError(KeyError):
    pass


@dataclass(frozen=True, eq=False)
class ControlledKernel:
    """``transition[x, u, x'] = P(x' | x, u)``."""

    transition: np.ndarray

    def __init__(self, transition):
        t = np.asarray(transition, dtype=float)
        if t.ndim != 3 or t.shape[0] != t.shape[2]:
            raise ValueError("transition must have shape (X, U, X)")
        if np.any(t < 0) or np.any(np.abs(t.sum(axis=2) - 1.0) > NORM_TOL):
            raise ValueError("each (x, u) row must be a probability vector")
        object.__setattr__(self, "transition", _frozen(t))

    @classmethod
    def uncontrolled(cls, matrix, n_actions: int) -> "ControlledKernel":
        m = np.asarray(matrix, dtype=float)
        return cls(np.repeat(m[:, None, :], n_actions, axis=1))


@dataclass(frozen=True, eq=False)
class MultistageModel:
    initial: DiscreteMeasure
    kernel: ControlledKernel
    channel: Channel
    cost: CostSpec
    horizon: int

    def __post_init__(self):
        nx, nu, nx2 = self.kernel.transition.shape
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if not (self.initial.grid.same_as(self.channel.x_grid) and self.cost.x_grid.same_as(self.channel.x_grid)):
            raise GridMismatchError("incompatible grids")
        if nx != len(self.channel.x_grid) or nu != len(self.cost.u_grid):
            raise GridMismatchError("kernel shape does not match state/action grids")

    @property
    def n_x(self) -> int:
        return len(self.channel.x_grid)

    @property
    def n_y(self) -> int:
        return len(self.channel.y_grid)

    @property
    def n_u(self) -> int:
        return len(self.cost.u_grid)

    def with_channel(self, channel: Channel) -> "MultistageModel":
        return MultistageModel(self.initial, self.kernel, channel, self.cost, self.horizon)

    def history_count(self) -> int:
        """Number of decision points ``sum_t |Y|^(t+1) |U|^t``."""
        return sum(self.n_y ** (t + 1) * self.n_u**t for t in range(self.horizon))


@dataclass
class HistoryPolicy:
    """Deterministic history-dependent policy, keyed by ``(ys, us)`` tuples."""

    actions: dict = field(default_factory=dict)

    def __call__(self, ys: tuple, us: tuple) -> int:
        try:
            return self.actions[(tuple(ys), tuple(us))]
        except KeyError:
            raise UncoveredHistoryError(f"policy does not cover history ys={ys}, us={us}") from None

    @classmethod
    def from_function(cls, model: MultistageModel, fn: Callable[[tuple, tuple], int]) -> "HistoryPolicy":
        """Tabulate ``fn`` on every history of the model."""
        actions = {}
        for t in range(model.horizon):
            for ys in np.ndindex(*(model.n_y,) * (t + 1)):
                for us in np.ndindex(*(model.n_u,) * t):
                    actions[(tuple(ys), tuple(us))] = int(fn(tuple(ys), tuple(us)))
        return cls(actions)

    @classmethod
    def stationary(cls, model: MultistageModel, per_y: Sequence[int]) -> "HistoryPolicy":
        return cls.from_function(model, lambda ys, us: per_y[ys[-1]])


def evaluate_history_policy(model: MultistageModel, policy: HistoryPolicy) -> float:
    """Expected total cost ``E sum_{t<T} c(X_t, U_t)`` under ``policy``.

    Histories of probability zero are pruned, so the policy only has to cover
    reachable ones.
    """
    Q = model.channel.kernel
    K = model.kernel.transition
    C = model.cost.values
    # frontier: history -> unnormalised joint of (X_t, history)
    frontier = {((y,), ()): model.initial.weights * Q[:, y] for y in range(model.n_y)}
    total = 0.0
    for t in range(model.horizon):
        nxt = {}
        for (ys, us), sigma in frontier.items():
            if not np.any(sigma > 0):
                continue
            u = policy(ys, us)
            total += float(sigma @ C[:, u])
            if t + 1 < model.horizon:
                pred = sigma @ K[:, u, :]
                for y in range(model.n_y):
                    nxt[(ys + (y,), us + (u,))] = pred * Q[:, y]
        frontier = nxt
    return total


@dataclass(frozen=True)
class ExhaustiveResult:
    policy: HistoryPolicy
    cost: float


def solve_exhaustive(model: MultistageModel, budget: int = DEFAULT_BUDGET) -> ExhaustiveResult:
    """Exact optimum over all deterministic history-dependent policies.

    The expected cost splits over histories, so the best policy picks, at every
    history, the action minimising immediate cost plus the optimal cost of all its
    continuations. The recursion visits the full history tree (every action at every
    node), ``budget`` caps the work ``|X|^2 * nodes``; ties go to the lowest action.
    """
    work = model.n_x**2 * model.history_count() * model.n_u
    if work > budget:
        raise NumericGuardError(f"history tree needs {work} operations, budget is {budget}")
    Q = model.channel.kernel
    K = model.kernel.transition
    C = model.cost.values
    T = model.horizon
    actions: dict = {}

    def value(t: int, ys: tuple, us: tuple, sigma: np.ndarray) -> float:
        immediate = sigma @ C  # (U,)
        if t + 1 == T:
            cand = immediate
        else:
            cand = np.empty(model.n_u)
            for u in range(model.n_u):
                pred = sigma @ K[:, u, :]
                cont = 0.0
                for y in range(model.n_y):
                    cont += value(t + 1, ys + (y,), us + (u,), pred * Q[:, y])
                cand[u] = immediate[u] + cont
        u_star = int(argmin_lowest(cand))
        actions[(ys, us)] = u_star
        return float(cand[u_star])

    total = 0.0
    for y in range(model.n_y):
        total += value(0, (y,), (), model.initial.weights * Q[:, y])
    return ExhaustiveResult(HistoryPolicy(actions), total)


@dataclass(frozen=True)
class ContinuityRow:
    n: int
    delta: float
    J_n: float
    J_limit: float
    gap: float
    bound: float
    holds: bool


def uniform_tv_continuity_experiment(
    model: MultistageModel, seq: ChannelSequence, n_values: Sequence[int], tol: float = 1e-9
) -> list[ContinuityRow]:
    """Optimal-cost gap against ``||c||_inf * delta * T(T+1)/2`` along a channel sequence.

    ``delta`` is the uniform TV distance between ``Q_n`` and the model channel.
    The constant counts one ``delta`` for each of the ``t + 1`` channel uses that
    precede the stage-``t`` cost, summed over stages.
    """
    if not (seq.x_grid.same_as(model.channel.x_grid) and seq.y_grid.same_as(model.channel.y_grid)):
        raise GridMismatchError("incompatible grids")
    T = model.horizon
    j_limit = solve_exhaustive(model).cost
    rows = []
    for n in n_values:
        qn = seq(n)
        delta = uniform_tv(qn, model.channel)
        j_n = solve_exhaustive(model.with_channel(qn)).cost
        gap = abs(j_n - j_limit)
        bound = model.cost.sup_norm * delta * T * (T + 1) / 2
        rows.append(ContinuityRow(int(n), delta, j_n, j_limit, gap, bound, gap <= bound + tol))
    return rows

