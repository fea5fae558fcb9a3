"""Stochastic kernels between finite grids, induced joint measures, and
convergence diagnostics for channel sequences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .measures import (
    NORM_TOL,
    DiscreteMeasure,
    Grid,
    GridMismatchError,
    TestSetFamily,
    _frozen,
    bl_distance,
    product_grid,
)


@dataclass(frozen=True, eq=False)
class Channel:
    """Row-stochastic matrix ``kernel[x, y] = Q(y | x)``."""

    x_grid: Grid
    y_grid: Grid
    kernel: np.ndarray

    def __init__(self, x_grid: Grid, y_grid: Grid, kernel):
        k = np.asarray(kernel, dtype=float)
        if k.shape != (len(x_grid), len(y_grid)):
            raise ValueError(f"kernel shape {k.shape} does not match grids ({len(x_grid)}, {len(y_grid)})")
        if np.any(k < 0) or not np.all(np.isfinite(k)):
            raise ValueError("kernel entries must be finite and nonnegative")
        bad = np.abs(k.sum(axis=1) - 1.0) > NORM_TOL
        if np.any(bad):
            raise ValueError(f"kernel rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        object.__setattr__(self, "x_grid", x_grid)
        object.__setattr__(self, "y_grid", y_grid)
        object.__setattr__(self, "kernel", _frozen(k))

    @classmethod
    def identity(cls, grid: Grid) -> "Channel":
        return cls(grid, grid, np.eye(len(grid)))

    @classmethod
    def uninformative(cls, x_grid: Grid, y_grid: Grid, row=None) -> "Channel":
        """Channel whose output law does not depend on the input."""
        if row is None:
            row = np.full(len(y_grid), 1.0 / len(y_grid))
        return cls(x_grid, y_grid, np.tile(np.asarray(row, dtype=float), (len(x_grid), 1)))

    @classmethod
    def deterministic(cls, x_grid: Grid, y_grid: Grid, y_index) -> "Channel":
        y_index = np.asarray(y_index, dtype=int)
        k = np.zeros((len(x_grid), len(y_grid)))
        k[np.arange(len(x_grid)), y_index] = 1.0
        return cls(x_grid, y_grid, k)

    def row(self, i: int) -> DiscreteMeasure:
        return DiscreteMeasure(self.y_grid, self.kernel[i])

    def compatible(self, other: "Channel") -> bool:
        return self.x_grid.same_as(other.x_grid) and self.y_grid.same_as(other.y_grid)


def _check_channels(a: Channel, b: Channel) -> None:
    if not a.compatible(b):
        raise GridMismatchError("incompatible grids")


@dataclass(frozen=True, eq=False)
class JointMeasure:
    x_grid: Grid
    y_grid: Grid
    mass: np.ndarray

    def __init__(self, x_grid: Grid, y_grid: Grid, mass):
        m = np.asarray(mass, dtype=float)
        if m.shape != (len(x_grid), len(y_grid)):
            raise ValueError("mass matrix does not match grids")
        if np.any(m < 0) or abs(m.sum() - 1.0) > NORM_TOL:
            raise ValueError("joint mass must be nonnegative with total 1")
        object.__setattr__(self, "x_grid", x_grid)
        object.__setattr__(self, "y_grid", y_grid)
        object.__setattr__(self, "mass", _frozen(m))

    @property
    def x_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=1)

    @property
    def y_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=0)

    def as_measure(self) -> DiscreteMeasure:
        """Flatten onto the row-major product grid (cached per instance)."""
        cached = self.__dict__.get("_flat")
        if cached is None:
            cached = DiscreteMeasure(product_grid(self.x_grid, self.y_grid), self.mass.ravel())
            object.__setattr__(self, "_flat", cached)
        return cached

    def same_grids(self, other: "JointMeasure") -> bool:
        return self.x_grid.same_as(other.x_grid) and self.y_grid.same_as(other.y_grid)


def join(P: DiscreteMeasure, Q: Channel) -> JointMeasure:
    """Joint law ``PQ(x, y) = P(x) Q(y | x)``."""
    if not P.grid.same_as(Q.x_grid):
        raise GridMismatchError("incompatible grids")
    return JointMeasure(Q.x_grid, Q.y_grid, P.weights[:, None] * Q.kernel)


@dataclass(frozen=True)
class Posterior:
    """Conditional law of X given one observation; ``measure`` is None when the
    observation has zero probability (the conditional is only a.s. defined)."""

    y_index: int
    y_mass: float
    measure: DiscreteMeasure | None

    @property
    def defined(self) -> bool:
        return self.measure is not None


def conditional_x_given_y(J: JointMeasure) -> list[Posterior]:
    out = []
    marg = J.y_marginal
    for j, m in enumerate(marg):
        if m > 0:
            col = J.mass[:, j] / m
            col = col / col.sum()
            out.append(Posterior(j, float(m), DiscreteMeasure(J.x_grid, col)))
        else:
            out.append(Posterior(j, 0.0, None))
    return out


class ChannelSequence:
    """Lazily generated sequence ``n -> Q_n`` on fixed grids."""

    def __init__(self, generator: Callable[[int], Channel], x_grid: Grid, y_grid: Grid, description: str = ""):
        self._generator = generator
        self.x_grid = x_grid
        self.y_grid = y_grid
        self.description = description

    def __call__(self, n: int) -> Channel:
        q = self._generator(n)
        if not (q.x_grid.same_as(self.x_grid) and q.y_grid.same_as(self.y_grid)):
            raise GridMismatchError(f"generated channel for n={n} leaves the sequence grids")
        return q

    @classmethod
    def constant(cls, q: Channel, description: str = "constant") -> "ChannelSequence":
        return cls(lambda n: q, q.x_grid, q.y_grid, description)

    @classmethod
    def mixture_towards(cls, limit: Channel, other: Channel, description: str = "") -> "ChannelSequence":
        """``Q_n = (1 - 1/n) limit + (1/n) other``."""
        _check_channels(limit, other)
        return cls(
            lambda n: mixture([limit, other], [1.0 - 1.0 / n, 1.0 / n]),
            limit.x_grid,
            limit.y_grid,
            description or "mixture (1-1/n) Q + (1/n) Q'",
        )


def product_setwise_gap(a: JointMeasure, b: JointMeasure, x_family: TestSetFamily, y_family: TestSetFamily) -> float:
    """``max |a(A x B) - b(A x B)|`` over ``A`` in ``x_family`` and ``B`` in ``y_family``."""
    if not a.same_grids(b):
        raise GridMismatchError("incompatible grids")
    if x_family.size != len(a.x_grid) or y_family.size != len(a.y_grid):
        raise IndexError("test set family does not index the joint grids")
    diff = a.mass - b.mass
    return float(np.abs(x_family.indicator() @ diff @ y_family.indicator().T).max())


def uniform_tv(a: Channel, b: Channel) -> float:
    """``max_x ||a(.|x) - b(.|x)||_TV``."""
    _check_channels(a, b)
    return float(np.abs(a.kernel - b.kernel).sum(axis=1).max())


def joint_tv(a: JointMeasure, b: JointMeasure) -> float:
    if not a.same_grids(b):
        raise GridMismatchError("incompatible grids")
    return float(np.abs(a.mass - b.mass).sum())


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    tv: float
    setwise: float
    weak: float
    uniform: float


def convergence_report(
    P: DiscreteMeasure,
    seq: ChannelSequence,
    limit: Channel,
    n_values: Sequence[int],
    y_family: TestSetFamily | None = None,
    x_family: TestSetFamily | None = None,
    weak: bool = True,
) -> list[ConvergenceRow]:
    """Distances between ``PQ_n`` and ``PQ`` in each convergence mode.

    The setwise column is taken over product sets ``A x B``; each side defaults
    to singletons plus the full space. ``weak=False`` skips the LP and reports NaN.
    """
    if not (seq.x_grid.same_as(limit.x_grid) and seq.y_grid.same_as(limit.y_grid)):
        raise GridMismatchError("incompatible grids")
    x_family = x_family or TestSetFamily.singletons(len(limit.x_grid))
    y_family = y_family or TestSetFamily.singletons(len(limit.y_grid))
    pq = join(P, limit)
    rows = []
    for n in n_values:
        qn = seq(n)
        pqn = join(P, qn)
        rows.append(
            ConvergenceRow(
                n=int(n),
                tv=joint_tv(pqn, pq),
                setwise=product_setwise_gap(pqn, pq, x_family, y_family),
                weak=bl_distance(pqn.as_measure(), pq.as_measure()) if weak else float("nan"),
                uniform=uniform_tv(qn, limit),
            )
        )
    return rows


def majorization_check(P: DiscreteMeasure, Q: Channel, nu, tol: float = 1e-12) -> bool:
    """Whether ``PQ <= nu`` cellwise, equivalently on every subset of the finite product space."""
    nu = np.asarray(nu, dtype=float)
    if nu.shape != Q.kernel.shape:
        raise ValueError(f"dominating measure has shape {nu.shape}, expected {Q.kernel.shape}")
    return bool(np.all(join(P, Q).mass <= nu + tol))


def mixture(channels: Sequence[Channel], weights: Sequence[float]) -> Channel:
    if not channels:
        raise ValueError("mixture of no channels")
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(channels),) or np.any(w < 0) or abs(w.sum() - 1.0) > NORM_TOL:
        raise ValueError("mixture weights must be nonnegative and sum to 1")
    first = channels[0]
    for q in channels[1:]:
        _check_channels(first, q)
    k = sum(wi * q.kernel for wi, q in zip(w, channels))
    return Channel(first.x_grid, first.y_grid, k)
