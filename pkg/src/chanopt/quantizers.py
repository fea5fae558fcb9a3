"""Quantizers viewed as channels into ``{0, ..., M-1}``.

Cells are 0-based throughout: cell ``i`` here is cell ``i + 1`` in the usual
1-based notation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import Channel, join
from .control import CostSpec, argmin_lowest
from .measures import NORM_TOL, DiscreteMeasure, Grid, GridMismatchError, _frozen


def cell_grid(M: int) -> Grid:
    """Observation alphabet of an M-cell quantizer: the atoms 0..M-1."""
    return Grid.atoms(range(M))


@dataclass(frozen=True, eq=False)
class Quantizer:
    x_grid: Grid
    cell_of: np.ndarray
    M: int

    def __init__(self, x_grid: Grid, cell_of, M: int):
        cells = np.asarray(cell_of, dtype=int)
        if cells.shape != (len(x_grid),):
            raise ValueError("need one cell index per grid point")
        if M < 1 or np.any(cells < 0) or np.any(cells >= M):
            raise ValueError(f"cell indices must lie in 0..{M - 1}")
        cells = cells.copy()
        cells.setflags(write=False)
        object.__setattr__(self, "x_grid", x_grid)
        object.__setattr__(self, "cell_of", cells)
        object.__setattr__(self, "M", int(M))

    def cell(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.cell_of == i)


@dataclass(frozen=True, eq=False)
class RandomQuantizer:
    x_grid: Grid
    kernel: np.ndarray

    def __init__(self, x_grid: Grid, kernel):
        k = np.asarray(kernel, dtype=float)
        if k.ndim != 2 or k.shape[0] != len(x_grid):
            raise ValueError("kernel must have one row per grid point")
        if np.any(k < 0) or np.any(np.abs(k.sum(axis=1) - 1.0) > NORM_TOL):
            raise ValueError("random quantizer rows must be probability vectors")
        object.__setattr__(self, "x_grid", x_grid)
        object.__setattr__(self, "kernel", _frozen(k))

    @property
    def M(self) -> int:
        return self.kernel.shape[1]

    def as_channel(self) -> Channel:
        return Channel(self.x_grid, cell_grid(self.M), self.kernel)


@dataclass(frozen=True)
class FRQ:
    """Finitely randomized quantizer: convex combination of deterministic quantizers."""

    weights: tuple
    quantizers: tuple

    def __post_init__(self):
        if not self.quantizers or len(self.weights) != len(self.quantizers):
            raise ValueError("need matching, non-empty weights and quantizers")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or np.any(w > 1) or abs(w.sum() - 1.0) > NORM_TOL:
            raise ValueError("weights must lie in [0, 1] and sum to 1")
        q0 = self.quantizers[0]
        for q in self.quantizers[1:]:
            if q.M != q0.M or not q.x_grid.same_as(q0.x_grid):
                raise ValueError("all components must share M and the state grid")


@dataclass(frozen=True)
class IntervalQuantizer:
    """Quantizer of a 1-D state with ``M - 1`` increasing thresholds; cell i is
    ``[t_{i-1}, t_i)`` with ``t_{-1} = -inf`` and ``t_{M-1} = +inf``."""

    thresholds: tuple

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise ValueError("thresholds must be strictly increasing")

    @property
    def M(self) -> int:
        return len(self.thresholds) + 1

    def to_quantizer(self, x_grid: Grid) -> Quantizer:
        cells = np.searchsorted(np.asarray(self.thresholds, dtype=float), x_grid.coords, side="right")
        return Quantizer(x_grid, cells, self.M)


def as_channel(q: Quantizer) -> Channel:
    return Channel.deterministic(q.x_grid, cell_grid(q.M), q.cell_of)


def policy_to_quantizer(policy: Sequence[int], cost: CostSpec) -> Quantizer:
    """Nearest-action partition for a fixed reconstruction policy.

    ``policy[i]`` is the action index used on cell ``i``; each state goes to the
    cell whose action is cheapest for it, ties to the lowest cell. Under that
    policy this quantizer is at least as good as any channel into the same cells.
    """
    policy = np.asarray(policy, dtype=int)
    per_cell = cost.values[:, policy]  # (x, M)
    cells = argmin_lowest(per_cell, axis=1)
    return Quantizer(cost.x_grid, cells, len(policy))


def round_to_simplex_grid(z, n: int) -> np.ndarray:
    """Largest-remainder rounding of probability vector(s) to multiples of ``1/n``.

    Returns integer counts summing to ``n`` per row; every entry is within ``1/n``
    of the input (strictly so below the top). Fractional ties go to the lowest index.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    z = np.atleast_2d(np.asarray(z, dtype=float))
    scaled = z * n
    base = np.floor(scaled + 1e-9).astype(int)
    base = np.minimum(base, n)
    frac = scaled - base
    counts = base.copy()
    for r in range(len(z)):
        short = n - int(base[r].sum())
        if short > 0:
            # stable sort on -frac keeps lower indices first among equal remainders
            order = np.argsort(-frac[r], kind="stable")
            counts[r, order[:short]] += 1
        elif short < 0:
            raise ArithmeticError("row does not sum to 1")
    return counts


def decompose_random_quantizer(rq: RandomQuantizer, n: int) -> FRQ:
    """Write a rounded version of ``rq`` exactly as an average of ``n`` quantizers.

    Each row, rounded to counts summing to ``n``, is spelled out as ``n`` cell
    labels in increasing order; quantizer ``k`` sends every state to its ``k``-th
    label. The recombination equals the rounded kernel exactly, so its sup-norm
    distance to ``rq`` is at most ``1/n``.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    counts = round_to_simplex_grid(rq.kernel, n)
    labels = np.stack([np.repeat(np.arange(rq.M), c) for c in counts])  # (x, n)
    quantizers = tuple(Quantizer(rq.x_grid, labels[:, k], rq.M) for k in range(n))
    return FRQ(tuple([1.0 / n] * n), quantizers)


def recombine(frq: FRQ) -> RandomQuantizer:
    q0 = frq.quantizers[0]
    k = np.zeros((len(q0.x_grid), q0.M))
    rows = np.arange(len(q0.x_grid))
    for w, q in zip(frq.weights, frq.quantizers):
        np.add.at(k, (rows, q.cell_of), w)
    return RandomQuantizer(q0.x_grid, k)


@dataclass(frozen=True)
class SetwiseTVBound:
    tv: float
    cell_sym_diff_sum: float
    holds: bool


def setwise_to_tv_bound(P: DiscreteMeasure, qn: Quantizer, q: Quantizer, tol: float = 1e-12) -> SetwiseTVBound:
    """Compare ``||PQ_n - PQ||_TV`` with ``sum_i P(B^n_i symdiff B_i)``."""
    if qn.M != q.M:
        raise ValueError("quantizers have different cell counts")
    if not qn.x_grid.same_as(q.x_grid):
        raise GridMismatchError("incompatible grids")
    tv = float(np.abs(join(P, as_channel(qn)).mass - join(P, as_channel(q)).mass).sum())
    sym = 0.0
    for i in range(q.M):
        sym += float(P.weights[(qn.cell_of == i) != (q.cell_of == i)].sum())
    return SetwiseTVBound(tv, sym, tv <= sym + tol)


@dataclass(frozen=True)
class IntervalResult:
    quantizer: IntervalQuantizer
    policy: np.ndarray  # action index per cell
    cost_value: float
    cuts: tuple  # grid index where each cell after the first starts


def interval_cell_costs(P: DiscreteMeasure, cost: CostSpec) -> tuple[np.ndarray, np.ndarray]:
    """``W[i, j]`` = best single-action cost of cell ``x_i..x_{j-1}`` and the action achieving it.

    Cell sums accumulate left to right from ``x_i``, so every entry is the plain
    sequential float sum of ``P(x) c(x, u)`` over the cell.
    """
    N = len(P.grid)
    pc = P.weights[:, None] * cost.values
    W = np.full((N + 1, N + 1), np.inf)
    A = np.zeros((N + 1, N + 1), dtype=int)
    for i in range(N):
        sums = np.cumsum(pc[i:], axis=0)  # row r covers x_i..x_{i+r}
        best = np.argmin(sums, axis=1)
        W[i, i + 1:] = sums[np.arange(len(sums)), best]
        A[i, i + 1:] = best
    return W, A


def optimize_interval_quantizer(P: DiscreteMeasure, cost: CostSpec, M: int) -> IntervalResult:
    """Best M-cell interval quantizer jointly with its per-cell actions.

    Dynamic program over prefixes: ``best[m][j]`` is the least cost of covering
    ``x_0..x_{j-1}`` with ``m`` non-empty consecutive cells. Totals are built by
    adding cells left to right, matching exhaustive enumeration bit for bit.
    """
    if P.grid.dim != 1:
        raise ValueError("interval quantizers need a 1-D state grid")
    x = P.grid.coords
    N = len(x)
    if np.any(np.diff(x) <= 0):
        raise ValueError("state grid must be sorted ascending")
    if M < 1 or M > N:
        raise ValueError(f"M must lie in 1..{N}")
    if not cost.x_grid.same_as(P.grid):
        raise GridMismatchError("incompatible grids")
    W, A = interval_cell_costs(P, cost)
    best = np.full((M + 1, N + 1), np.inf)
    back = np.zeros((M + 1, N + 1), dtype=int)
    best[0, 0] = 0.0
    for m in range(1, M + 1):
        for j in range(m, N - (M - m) + 1):
            cand = best[m - 1, :j] + W[:j, j]
            i = int(np.argmin(cand))  # first minimiser
            best[m, j] = cand[i]
            back[m, j] = i
    starts = []
    j = N
    for m in range(M, 0, -1):
        i = back[m, j]
        starts.append((i, j))
        j = i
    starts.reverse()
    policy = np.array([A[i, j] for i, j in starts], dtype=int)
    cuts = tuple(int(i) for i, _ in starts[1:])
    thresholds = tuple(float(0.5 * (x[c - 1] + x[c])) for c in cuts)
    return IntervalResult(IntervalQuantizer(thresholds), policy, float(best[M, N]), cuts)


def cellwise_setwise_gap(P: DiscreteMeasure, a: Channel, b: Channel) -> float:
    """``max |int_A a(i|x) P(dx) - int_A b(i|x) P(dx)|`` over every state subset ``A`` and cell ``i``.

    For a fixed cell the best ``A`` collects either all positive or all negative
    differences, so the supremum over the full family is available in closed form.
    """
    if not a.compatible(b):
        raise GridMismatchError("incompatible grids")
    diff = P.weights[:, None] * (a.kernel - b.kernel)
    pos = np.clip(diff, 0, None).sum(axis=0)
    neg = np.clip(-diff, 0, None).sum(axis=0)
    return float(np.maximum(pos, neg).max())
