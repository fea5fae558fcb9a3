"""Brute-force reference computations.

These deliberately take the long way round (enumeration of policies, threshold
placements, action sequences or sample paths) and share no search logic with the
solvers they are used to check.
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

from .channels import Channel
from .control import CostSpec
from .measures import DiscreteMeasure


def enumerate_policy_cost(P: DiscreteMeasure, Q: Channel, cost: CostSpec, limit: int = 10**6, chunk: int = 20000) -> float:
    """Minimum expected cost over all ``|U|^|Y|`` maps from observations to actions."""
    ny, nu = Q.kernel.shape[1], cost.values.shape[1]
    if nu**ny > limit:
        raise ValueError(f"{nu}^{ny} policies exceed the enumeration limit {limit}")
    joint = P.weights[:, None] * Q.kernel
    # contrib[y, u] = sum_x PQ(x, y) c(x, u), summed elementwise
    contrib = (joint[:, :, None] * cost.values[:, None, :]).sum(axis=0)
    best = np.inf
    it = itertools.product(range(nu), repeat=ny)
    ys = np.arange(ny)
    while True:
        block = np.fromiter(itertools.chain.from_iterable(itertools.islice(it, chunk)), dtype=int)
        if block.size == 0:
            break
        pols = block.reshape(-1, ny)
        best = min(best, float(contrib[ys, pols].sum(axis=1).min()))
    return best


def _cell_cost_table(P: DiscreteMeasure, cost: CostSpec) -> np.ndarray:
    """``W[i, j]``: cost of the cell ``x_i..x_{j-1}`` under its best single action.

    Sums are accumulated one state at a time from the left edge of the cell.
    """
    N = len(P.weights)
    pc = P.weights[:, None] * cost.values
    W = np.full((N + 1, N + 1), np.inf)
    for i in range(N):
        s = np.zeros(pc.shape[1])
        for j in range(i, N):
            s = s + pc[j]
            W[i, j + 1] = s.min()
    return W


def enumerate_interval_cost(P: DiscreteMeasure, cost: CostSpec, M: int, limit: int = 10**6) -> tuple[float, tuple]:
    """Best interval quantizer by trying every placement of ``M - 1`` cuts between grid points.

    Returns the cost and the first minimising cut tuple (lexicographic order).
    """
    N = len(P.weights)
    if comb(N - 1, M - 1) > limit:
        raise ValueError("too many threshold placements to enumerate")
    W = _cell_cost_table(P, cost)
    if M == 1:
        return float(W[0, N]), ()
    cuts = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(1, N), M - 1)), dtype=int
    ).reshape(-1, M - 1)
    bounds = np.column_stack([np.zeros(len(cuts), dtype=int), cuts, np.full(len(cuts), N)])
    total = np.zeros(len(cuts))
    for m in range(M):
        total = total + W[bounds[:, m], bounds[:, m + 1]]
    k = int(np.argmin(total))
    return float(total[k]), tuple(int(c) for c in cuts[k])


def enumerate_quantizer_cost(P: DiscreteMeasure, cost: CostSpec, M: int, limit: int = 10**6) -> tuple[float, float]:
    """Best and worst optimal cost over every deterministic M-cell assignment of the states."""
    N = len(P.weights)
    if M**N > limit:
        raise ValueError("too many quantizers to enumerate")
    best, worst = np.inf, -np.inf
    for cells in itertools.product(range(M), repeat=N):
        cells = np.asarray(cells)
        total = 0.0
        for i in range(M):
            members = cells == i
            if members.any():
                total += float((P.weights[members, None] * cost.values[members]).sum(axis=0).min())
        best, worst = min(best, total), max(worst, total)
    return best, worst


def open_loop_value(initial, transition, cost_values, horizon: int) -> float:
    """Best fixed action sequence, found by trying all of them."""
    nu = cost_values.shape[1]
    best = np.inf
    for seq in itertools.product(range(nu), repeat=horizon):
        p = np.asarray(initial, dtype=float)
        total = 0.0
        for u in seq:
            total += float(p @ cost_values[:, u])
            p = p @ transition[:, u, :]
        best = min(best, total)
    return best


def fully_observed_value(initial, transition, cost_values, horizon: int) -> float:
    """Backward induction on the state itself (perfect observation)."""
    v = np.zeros(cost_values.shape[0])
    for _ in range(horizon):
        v = (cost_values + transition @ v).min(axis=1)
    return float(np.asarray(initial) @ v)


def path_sum_value(initial, transition, channel, cost_values, horizon: int, policy) -> float:
    """Expected cost of a history policy by summing over every state/observation path.

    ``policy(ys, us)`` returns an action index.
    """
    nx, ny = channel.shape
    total = 0.0
    for xs in itertools.product(range(nx), repeat=horizon):
        for ys in itertools.product(range(ny), repeat=horizon):
            prob = initial[xs[0]] * channel[xs[0], ys[0]]
            us = []
            path_cost = 0.0
            for t in range(horizon):
                if t > 0:
                    prob *= transition[xs[t - 1], us[-1], xs[t]] * channel[xs[t], ys[t]]
                if prob == 0:
                    break
                u = policy(tuple(ys[: t + 1]), tuple(us))
                path_cost += cost_values[xs[t], u]
                us.append(u)
            else:
                total += prob * path_cost
    return total
