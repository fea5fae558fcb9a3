"""Single-stage optimal control under an observation channel.

For a prior ``P``, channel ``Q`` and bounded cost ``c``, the optimal cost is
``J(P, Q) = inf_gamma sum_{x,y} P(x) Q(y|x) c(x, gamma(y))``. On finite grids the
infimum is attained by choosing, for every observation separately, the action that
minimises the posterior expected cost.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import Channel, GridMismatchError, join
from .measures import DiscreteMeasure, Grid, _frozen

# relative slack under which two candidate values count as tied
TIE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class CostSpec:
    x_grid: Grid
    u_grid: Grid
    values: np.ndarray

    def __init__(self, x_grid: Grid, u_grid: Grid, values):
        v = np.asarray(values, dtype=float)
        if v.shape != (len(x_grid), len(u_grid)):
            raise ValueError(f"cost shape {v.shape} does not match grids ({len(x_grid)}, {len(u_grid)})")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("cost must be finite and nonnegative")
        object.__setattr__(self, "x_grid", x_grid)
        object.__setattr__(self, "u_grid", u_grid)
        object.__setattr__(self, "values", _frozen(v))

    @property
    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    @classmethod
    def quadratic(cls, x_grid: Grid, u_grid: Grid) -> "CostSpec":
        """``c(x, u) = |x - u|^2``."""
        diff = x_grid.points[:, None, :] - u_grid.points[None, :, :]
        return cls(x_grid, u_grid, (diff**2).sum(axis=-1))


def make_action_grid(values, required=()) -> Grid:
    """Sorted 1-D action grid containing ``values`` and every point in ``required``."""
    u = np.unique(np.concatenate([np.asarray(values, dtype=float).ravel(), np.asarray(required, dtype=float)]))
    return Grid.atoms(u)


@dataclass(frozen=True)
class OptResult:
    policy: np.ndarray  # action index per observation
    cost: float
    per_y_value: np.ndarray  # posterior-expected cost of the chosen action; 0 on null observations
    y_mass: np.ndarray


def _check(P: DiscreteMeasure, Q: Channel, cost: CostSpec) -> None:
    if not P.grid.same_as(Q.x_grid) or not cost.x_grid.same_as(Q.x_grid):
        raise GridMismatchError("incompatible grids")


def argmin_lowest(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Argmin along ``axis``, taking the lowest index among near-ties."""
    values = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
    best = values.min(axis=-1, keepdims=True)
    slack = TIE_RTOL * np.maximum(np.abs(best), 1e-300)
    return np.argmax(values <= best + slack, axis=-1)


def optimal_policy(P: DiscreteMeasure, Q: Channel, cost: CostSpec) -> OptResult:
    _check(P, Q, cost)
    joint = join(P, Q).mass
    y_mass = joint.sum(axis=0)
    if not np.any(y_mass > 0):
        raise ValueError("degenerate observation distribution")
    # weighted[y, u] = sum_x PQ(x, y) c(x, u): unnormalised posterior risk
    weighted = joint.T @ cost.values
    policy = argmin_lowest(weighted, axis=1)
    chosen = weighted[np.arange(len(policy)), policy]
    positive = y_mass > 0
    policy = np.where(positive, policy, 0)
    per_y = np.zeros(len(y_mass))
    per_y[positive] = chosen[positive] / y_mass[positive]
    total = float(chosen[positive].sum())
    return OptResult(_frozen_int(policy), total, _frozen(per_y), _frozen(y_mass))


def _frozen_int(a) -> np.ndarray:
    a = np.array(a, dtype=int, copy=True)
    a.setflags(write=False)
    return a


def evaluate_policy(P: DiscreteMeasure, Q: Channel, cost: CostSpec, policy) -> float:
    """Expected cost of the deterministic policy ``y -> policy[y]``."""
    _check(P, Q, cost)
    policy = np.asarray(policy, dtype=int)
    if policy.shape != (len(Q.y_grid),):
        raise ValueError("policy must give one action index per observation")
    joint = join(P, Q).mass
    return float((joint * cost.values[:, policy]).sum())


def optimal_cost(P: DiscreteMeasure, Q: Channel, cost: CostSpec) -> float:
    return optimal_policy(P, Q, cost).cost


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool


def continuity_bound_check(P: DiscreteMeasure, Q1: Channel, Q2: Channel, cost: CostSpec, tol: float = 1e-9) -> BoundCheck:
    """``|J(P,Q1) - J(P,Q2)| <= ||c||_inf ||PQ1 - PQ2||_TV``."""
    lhs = abs(optimal_cost(P, Q1, cost) - optimal_cost(P, Q2, cost))
    rhs = cost.sup_norm * float(np.abs(join(P, Q1).mass - join(P, Q2).mass).sum())
    return BoundCheck(lhs, rhs, lhs <= rhs + tol)


@dataclass(frozen=True)
class BestWorst:
    best_index: int
    best_cost: float
    worst_index: int
    worst_cost: float
    costs: tuple


def best_worst_channel(P: DiscreteMeasure, family: Sequence[Channel], cost: CostSpec) -> BestWorst:
    if len(family) == 0:
        raise ValueError("empty channel family")
    costs = np.array([optimal_cost(P, q, cost) for q in family])
    b, w = int(np.argmin(costs)), int(np.argmax(costs))
    return BestWorst(b, float(costs[b]), w, float(costs[w]), tuple(costs.tolist()))


def conditional_mean_policy(P: DiscreteMeasure, Q: Channel) -> np.ndarray:
    """Posterior mean of a 1-D state for every observation; NaN where the observation is null."""
    if P.grid.dim != 1:
        raise ValueError("conditional mean needs a 1-D state grid")
    joint = join(P, Q).mass
    y_mass = joint.sum(axis=0)
    num = P.grid.coords @ joint
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(y_mass > 0, num / np.where(y_mass > 0, y_mass, 1.0), np.nan)
    return out

