"""Estimating measures and channels from samples.

All randomness flows through ``make_rng`` (numpy's PCG64), so a seed pins every
table produced here.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .channels import Channel, JointMeasure, join
from .control import CostSpec, optimal_cost
from .measures import DiscreteMeasure, Grid, _frozen

RNG_NAME = "PCG64"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Scalar samples (shape ``(n,)``) or pairs (shape ``(n, 2)``) with the seed that produced them."""

    values: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size == 0:
            raise ValueError("empty sample set")
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def is_pairs(self) -> bool:
        return self.values.ndim == 2 and self.values.shape[1] == 2

    @classmethod
    def from_csv(cls, path, seed: int | None = None) -> "SampleSet":
        """One value or one ``x,y`` pair per line; blank lines and ``#`` comments are skipped."""
        rows = []
        with open(Path(path), newline="") as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0].strip().startswith("#"):
                    continue
                rows.append([float(v) for v in rec])
        widths = {len(r) for r in rows}
        if len(widths) > 1:
            raise ValueError(f"{path}: mixed row widths {sorted(widths)}")
        arr = np.asarray(rows, dtype=float)
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        return cls(arr, seed)


def bin_index(grid: Grid, values) -> np.ndarray:
    """Index of the nearest grid point for each value of a 1-D grid (clamped at the ends)."""
    x = grid.coords
    order = np.argsort(x)
    xs = x[order]
    mids = 0.5 * (xs[1:] + xs[:-1])
    return order[np.searchsorted(mids, np.asarray(values, dtype=float), side="right")]


def bin_edges(grid: Grid) -> np.ndarray:
    x = grid.coords
    mids = 0.5 * (x[1:] + x[:-1])
    return np.concatenate([[x[0] - grid.cell_width[0] / 2], mids, [x[-1] + grid.cell_width[-1] / 2]])


@dataclass(frozen=True, eq=False)
class HistogramDensity:
    grid: Grid
    masses: np.ndarray
    overflow: int = 0  # samples clipped into an edge bin

    @property
    def edges(self) -> np.ndarray:
        return bin_edges(self.grid)

    def as_measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.grid, self.masses)

    def density(self) -> np.ndarray:
        return self.masses / self.grid.cell_width


def fit_histogram_density(samples: SampleSet, grid: Grid) -> HistogramDensity:
    """Fraction of samples per cell; samples outside the grid are counted in the nearest edge cell."""
    if len(samples) == 0:
        raise ValueError("empty sample set")
    v = samples.values
    idx = bin_index(grid, v)
    edges = bin_edges(grid)
    overflow = int(np.sum((v < edges[0]) | (v > edges[-1])))
    counts = np.bincount(idx, minlength=len(grid))
    return HistogramDensity(grid, _frozen(counts / counts.sum()), overflow)


def additive_channel(noise: HistogramDensity, x_grid: Grid, y_grid: Grid) -> Channel:
    """Channel of ``Y = X + V`` with ``V`` distributed as the noise histogram.

    Each noise atom, shifted by ``x``, lands in the nearest observation cell.
    ``y_grid`` must cover every shifted atom up to half a cell.
    """
    v = noise.grid.coords
    x = x_grid.coords
    edges = bin_edges(y_grid)
    lo = x.min() + v[noise.masses > 0].min()
    hi = x.max() + v[noise.masses > 0].max()
    slack = 1e-9 * max(1.0, abs(edges[0]), abs(edges[-1]))
    if lo < edges[0] - slack or hi > edges[-1] + slack:
        raise ValueError(f"observation grid [{edges[0]}, {edges[-1]}] does not cover shifted noise [{lo}, {hi}]")
    k = np.zeros((len(x), len(y_grid)))
    for i, xi in enumerate(x):
        np.add.at(k[i], bin_index(y_grid, xi + v), noise.masses)
    k = k / k.sum(axis=1, keepdims=True)
    return Channel(x_grid, y_grid, k)


def sample_pairs(P: DiscreteMeasure, Q: Channel, n: int, seed: int) -> SampleSet:
    """``n`` i.i.d. draws ``(x, y)`` from ``PQ``, returned as coordinates of 1-D grids."""
    rng = make_rng(seed)
    flat = join(P, Q).mass.ravel()
    cells = rng.choice(flat.size, size=n, p=flat / flat.sum())
    ix, iy = np.divmod(cells, len(Q.y_grid))
    return SampleSet(np.column_stack([Q.x_grid.coords[ix], Q.y_grid.coords[iy]]), seed)


def empirical_counts(samples: SampleSet, x_grid: Grid, y_grid: Grid) -> np.ndarray:
    if not samples.is_pairs:
        raise ValueError("empirical joint needs (x, y) pairs")
    ix = bin_index(x_grid, samples.values[:, 0])
    iy = bin_index(y_grid, samples.values[:, 1])
    counts = np.zeros((len(x_grid), len(y_grid)), dtype=np.int64)
    np.add.at(counts, (ix, iy), 1)
    return counts


def empirical_joint(samples: SampleSet, x_grid: Grid, y_grid: Grid) -> JointMeasure:
    counts = empirical_counts(samples, x_grid, y_grid)
    return JointMeasure(x_grid, y_grid, counts / counts.sum())


def estimate_channel(joint) -> Channel:
    """Row-normalised joint (counts or a ``JointMeasure``); empty rows fall back to uniform."""
    if isinstance(joint, JointMeasure):
        mass, xg, yg = joint.mass, joint.x_grid, joint.y_grid
    else:
        mass, xg, yg = joint
        mass = np.asarray(mass, dtype=float)
    rows = mass.sum(axis=1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(rows > 0, mass / np.where(rows > 0, rows, 1.0), 1.0 / mass.shape[1])
    return Channel(xg, yg, k)


@dataclass(frozen=True)
class ConsistencyRow:
    n: int
    seed: int
    tv: float
    J_hat: float
    J_true: float
    cost_gap: float
    bound: float
    holds: bool


def consistency_curve(
    P: DiscreteMeasure, Q: Channel, cost: CostSpec, sample_sizes: Sequence[int], seed: int, tol: float = 1e-9
) -> list[ConsistencyRow]:
    """Plug-in channel estimates from ``n`` samples of ``PQ`` and the resulting optimal-cost error.

    Row ``i`` draws with seed ``seed + i``. The channel estimate is evaluated at the
    true prior ``P``, so ``cost_gap <= ||c||_inf * tv`` must hold on every row.
    """
    if not P.grid.same_as(Q.x_grid):
        raise ValueError("invalid truth: prior and channel live on different grids")
    j_true = optimal_cost(P, Q, cost)
    pq = join(P, Q).mass
    rows = []
    for i, n in enumerate(sample_sizes):
        s = seed + i
        counts = empirical_counts(sample_pairs(P, Q, int(n), s), Q.x_grid, Q.y_grid)
        q_hat = estimate_channel((counts, Q.x_grid, Q.y_grid))
        tv = float(np.abs(join(P, q_hat).mass - pq).sum())
        j_hat = optimal_cost(P, q_hat, cost)
        gap = abs(j_hat - j_true)
        bound = cost.sup_norm * tv
        rows.append(ConsistencyRow(int(n), s, tv, j_hat, j_true, gap, bound, gap <= bound + tol))
    return rows


class NonLipschitzCostError(ValueError):
    pass


def _interp_cost(cost: CostSpec, net: np.ndarray) -> np.ndarray:
    """Cost at off-grid actions by linear interpolation in ``u``; shape (X, len(net))."""
    u = cost.u_grid.coords
    return np.stack([np.interp(net, u, row) for row in cost.values])


def cost_lipschitz_in_u(cost: CostSpec) -> float:
    u = cost.u_grid.coords
    if len(u) < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(cost.values, axis=1)) / np.diff(u)))


def action_net(cost: CostSpec, net_resolution: float) -> np.ndarray:
    u = cost.u_grid.coords
    lo, hi = float(u.min()), float(u.max())
    if net_resolution <= 0:
        raise ValueError("net resolution must be positive")
    k = int(np.floor((hi - lo) / net_resolution + 1e-9))
    return lo + np.arange(k + 1) * net_resolution


def lipschitz_uniform_gap(
    mu: JointMeasure,
    nu: JointMeasure,
    cost: CostSpec,
    lipschitz_bound: float,
    net_resolution: float,
    cost_lipschitz: float | None = None,
) -> float:
    """Largest ``|int c(x, g(y)) d(mu - nu)|`` over a net of Lipschitz policies ``g``.

    Policies are piecewise linear with knots at the observation points, take values
    on an action net of spacing ``net_resolution`` and move by at most
    ``lipschitz_bound * dy`` between neighbouring knots. The objective separates
    across observations, so the maximum (and minimum) over the whole net is found
    by a chain dynamic program rather than enumeration. This is a lower bound on
    the supremum over all Lipschitz policies.
    """
    if not mu.same_grids(nu) or not mu.x_grid.same_as(cost.x_grid):
        raise ValueError("incompatible grids")
    if mu.y_grid.dim != 1 or cost.u_grid.dim != 1:
        raise ValueError("observation and action grids must be 1-D")
    if cost_lipschitz is not None and cost_lipschitz_in_u(cost) > cost_lipschitz * (1 + 1e-12):
        raise NonLipschitzCostError(
            f"cost has slope {cost_lipschitz_in_u(cost)} in u, above the declared {cost_lipschitz}"
        )
    net = action_net(cost, net_resolution)
    y = mu.y_grid.coords
    order = np.argsort(y)
    diff = (mu.mass - nu.mass)[:, order]
    g = diff.T @ _interp_cost(cost, net)  # g[y, v]: contribution of observation y when playing net[v]
    steps = np.diff(y[order])
    far = np.abs(net[:, None] - net[None, :])
    hi = g[0].copy()
    lo = g[0].copy()
    for k, dy in enumerate(steps, start=1):
        allowed = far <= lipschitz_bound * dy + 1e-12 * max(1.0, net_resolution)
        hi = g[k] + np.where(allowed, hi[:, None], -np.inf).max(axis=0)
        lo = g[k] + np.where(allowed, lo[:, None], np.inf).min(axis=0)
    return float(max(hi.max(), -lo.min(), 0.0))
