"""Finite measures on gridded Euclidean spaces and the distances between them.

Three functionals stand in for the three convergence modes:

* ``tv_distance`` -- total variation, normalised as ``sup_{|f|<=1} |int f dmu - int f dnu|``,
  i.e. the L1 distance of the weight vectors (range [0, 2]);
* ``setwise_gap`` -- largest discrepancy over a finite family of test sets;
* ``bl_distance`` -- bounded-Lipschitz distance, solved exactly as a linear program.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

NORM_TOL = 1e-12
BL_MAX_SUPPORT = 512


class GridMismatchError(ValueError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Ordered, index-stable set of distinct points in R^d.

    ``cell_width`` is the quadrature weight carried by each point; use 1 for
    pure atom sets.
    """

    points: np.ndarray
    cell_width: np.ndarray

    def __init__(self, points, cell_width=1.0):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or len(pts) == 0:
            raise ValueError("grid needs a non-empty (n, d) array of points")
        width = np.broadcast_to(np.asarray(cell_width, dtype=float), (len(pts),))
        if np.any(width <= 0):
            raise ValueError("cell widths must be strictly positive")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ValueError("grid points must be distinct")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "cell_width", _frozen(width))

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def coords(self) -> np.ndarray:
        """Coordinates of a 1-D grid as a flat array."""
        if self.dim != 1:
            raise ValueError("coords is only defined for 1-D grids")
        return self.points[:, 0]

    @classmethod
    def uniform(cls, n: int, lo: float = 0.0, hi: float = 1.0) -> "Grid":
        """Midpoints of ``n`` equal cells on ``[lo, hi]``."""
        w = (hi - lo) / n
        return cls(lo + w * (np.arange(n) + 0.5), w)

    @classmethod
    def atoms(cls, values: Iterable[float]) -> "Grid":
        return cls(np.asarray(list(values), dtype=float), 1.0)

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            self.points.shape == other.points.shape
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.cell_width, other.cell_width)
        )

    def index_of(self, value) -> int:
        """Index of the grid point equal to ``value`` (exact match)."""
        v = np.atleast_1d(np.asarray(value, dtype=float))
        hits = np.flatnonzero(np.all(self.points == v, axis=1))
        if len(hits) == 0:
            raise KeyError(f"{value!r} is not a grid point")
        return int(hits[0])


def product_grid(gx: Grid, gy: Grid) -> Grid:
    """Row-major product grid: flat index ``i * len(gy) + j`` is point ``(x_i, y_j)``."""
    nx, ny = len(gx), len(gy)
    pts = np.hstack([np.repeat(gx.points, ny, axis=0), np.tile(gy.points, (nx, 1))])
    width = np.outer(gx.cell_width, gy.cell_width).ravel()
    return Grid(pts, width)


def _check_grids(a: Grid, b: Grid) -> None:
    if not a.same_as(b):
        raise GridMismatchError("incompatible grids")


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    grid: Grid
    weights: np.ndarray

    def __init__(self, grid: Grid, weights):
        w = np.asarray(weights, dtype=float).ravel()
        if w.shape != (len(grid),):
            raise ValueError(f"expected {len(grid)} weights, got {w.shape}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > NORM_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def dirac(cls, grid: Grid, index: int) -> "DiscreteMeasure":
        w = np.zeros(len(grid))
        w[index] = 1.0
        return cls(grid, w)

    @classmethod
    def uniform(cls, grid: Grid) -> "DiscreteMeasure":
        return cls(grid, np.full(len(grid), 1.0 / len(grid)))

    @classmethod
    def from_density(cls, grid: Grid, density: Callable[[np.ndarray], np.ndarray]) -> "DiscreteMeasure":
        """Cell masses ``density(point) * cell_width``; must already integrate to 1."""
        pts = grid.points[:, 0] if grid.dim == 1 else grid.points
        return cls(grid, np.asarray(density(pts), dtype=float) * grid.cell_width)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    def mass(self, index_set) -> float:
        return float(self.weights[np.asarray(index_set, dtype=int)].sum())


@dataclass(frozen=True, eq=False)
class TestSetFamily:
    """Finite family of index subsets of a grid; always contains the full space."""

    __test__ = False  # keep pytest from collecting this class

    size: int
    sets: tuple

    def __init__(self, size: int, sets: Iterable[Sequence[int]], include_full: bool = True):
        out = []
        seen = set()
        full = tuple(range(size))
        candidates = list(sets)
        if include_full:
            candidates.append(full)
        for s in candidates:
            key = tuple(sorted(set(int(i) for i in s)))
            if not key:
                raise ValueError("test sets must be non-empty")
            if key[0] < 0 or key[-1] >= size:
                raise IndexError(f"test set index out of range for grid of size {size}")
            if key not in seen:
                seen.add(key)
                out.append(key)
        if full not in seen:
            raise ValueError("family must include the full space")
        object.__setattr__(self, "size", int(size))
        object.__setattr__(self, "sets", tuple(out))

    def __len__(self) -> int:
        return len(self.sets)

    def indicator(self) -> np.ndarray:
        """(len(family), size) 0/1 matrix, one row per set."""
        m = np.zeros((len(self.sets), self.size))
        for r, s in enumerate(self.sets):
            m[r, list(s)] = 1.0
        return m

    @classmethod
    def singletons(cls, size: int) -> "TestSetFamily":
        return cls(size, [[i] for i in range(size)])

    @classmethod
    def all_subsets(cls, size: int) -> "TestSetFamily":
        """Every non-empty subset, i.e. the full Borel family of a finite grid."""
        if size > 16:
            raise ValueError("all_subsets is limited to 16 points")
        sets = [[i for i in range(size) if mask >> i & 1] for mask in range(1, 2**size)]
        return cls(size, sets)


def dyadic_family(grid: Grid, r: int, singletons: bool = False, lo: float = 0.0, hi: float = 1.0) -> TestSetFamily:
    """All dyadic sub-intervals of ``[lo, hi)`` at levels ``0..r`` of a 1-D grid.

    A point belongs to ``[lo + k h, lo + (k+1) h)`` with ``h = (hi - lo) / 2**level``;
    the right end ``hi`` itself is put in the last interval. Intervals containing
    no grid points are dropped.
    """
    x = grid.coords
    sets = []
    for level in range(r + 1):
        parts = 2**level
        k = np.floor((x - lo) / (hi - lo) * parts).astype(int)
        k = np.where(x == hi, parts - 1, k)
        for j in range(parts):
            members = np.flatnonzero(k == j)
            if len(members):
                sets.append(members)
    if singletons:
        sets.extend([i] for i in range(len(grid)))
    return TestSetFamily(len(grid), sets)


def tv_distance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    _check_grids(mu.grid, nu.grid)
    return float(np.abs(mu.weights - nu.weights).sum())


def setwise_gap(mu: DiscreteMeasure, nu: DiscreteMeasure, family: TestSetFamily) -> float:
    """``max_{A in family} |mu(A) - nu(A)|``."""
    _check_grids(mu.grid, nu.grid)
    if family.size != len(mu.grid):
        raise IndexError("test set family does not index this grid")
    return float(np.abs(family.indicator() @ (mu.weights - nu.weights)).max())


def _lipschitz_edges(dist: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pairs (i, j), i < j, whose Lipschitz constraint is not implied by a path through a third point."""
    k = len(dist)
    keep_i, keep_j = [], []
    scale = 1.0 + 1e-12
    for i in range(k - 1):
        # implied[j] is True when some m != i, j has dist[i, m] + dist[m, j] <= dist[i, j]
        via = dist[i][:, None] + dist  # via[m, j] = d(i, m) + d(m, j)
        via[i, :] = np.inf
        np.fill_diagonal(via, np.inf)
        implied = via.min(axis=0) <= dist[i] * scale
        js = np.flatnonzero(~implied[i + 1:]) + i + 1
        keep_i.extend([i] * len(js))
        keep_j.extend(js.tolist())
    return np.asarray(keep_i, dtype=int), np.asarray(keep_j, dtype=int)


def bl_distance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Bounded-Lipschitz distance ``sup {|int f d(mu - nu)| : |f| <= 1, Lip(f) <= 1}``.

    Only points charged by ``mu`` or ``nu`` enter the program: any feasible
    assignment there extends to the whole space (McShane extension, then clamping
    to [-1, 1]) without changing the objective.
    """
    _check_grids(mu.grid, nu.grid)
    diff = mu.weights - nu.weights
    idx = np.flatnonzero((mu.weights > 0) | (nu.weights > 0))
    if len(idx) > BL_MAX_SUPPORT:
        raise ValueError(f"bl_distance supports at most {BL_MAX_SUPPORT} charged points, got {len(idx)}")
    d = diff[idx]
    if len(idx) == 1 or not np.any(d):
        return float(abs(d.sum())) if len(idx) == 1 else 0.0
    dist = cdist(mu.grid.points[idx], mu.grid.points[idx])
    ei, ej = _lipschitz_edges(dist)
    m = len(ei)
    rows = np.concatenate([np.arange(m), np.arange(m), m + np.arange(m), m + np.arange(m)])
    cols = np.concatenate([ei, ej, ei, ej])
    vals = np.concatenate([np.ones(m), -np.ones(m), -np.ones(m), np.ones(m)])
    a_ub = sparse.csr_matrix((vals, (rows, cols)), shape=(2 * m, len(idx)))
    b_ub = np.concatenate([dist[ei, ej], dist[ei, ej]])
    res = linprog(-d, A_ub=a_ub, b_ub=b_ub, bounds=(-1.0, 1.0), method="highs")
    if res.status != 0:
        raise RuntimeError(f"bounded-Lipschitz LP failed: {res.message}")
    return float(max(-res.fun, 0.0))


def integrate(mu: DiscreteMeasure, f) -> float:
    """``int f dmu``; ``f`` is a callable on grid points or an array of values."""
    if callable(f):
        pts = mu.grid.points[:, 0] if mu.grid.dim == 1 else mu.grid.points
        vals = np.asarray(f(pts), dtype=float)
    else:
        vals = np.asarray(f, dtype=float)
    vals = np.broadcast_to(vals, mu.weights.shape)
    return float(mu.weights @ vals)
