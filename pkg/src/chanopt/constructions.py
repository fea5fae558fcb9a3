"""Concrete channel sequences on finite grids: the weak and setwise
discontinuity examples, and the alternating-interval quantizer sequence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import Channel, ChannelSequence
from .control import CostSpec, make_action_grid
from .measures import DiscreteMeasure, Grid
from .quantizers import Quantizer, RandomQuantizer, as_channel


@dataclass(frozen=True, eq=False)
class Scenario:
    """Prior, limit channel, sequence and cost bundled together."""

    P: DiscreteMeasure
    limit: Channel
    seq: ChannelSequence
    cost: CostSpec


def weak_counterexample(a: float, b: float, n_values) -> Scenario:
    """Two atoms at ``a`` and ``b``; ``Q_n`` reports ``a + 1/n`` for inputs at or above it, else ``a``.

    The observation grid holds ``a`` and every ``a + 1/n`` for the requested ``n``,
    so all channels of the sequence share it.
    """
    if not a < b:
        raise ValueError("need a < b")
    n_values = sorted({int(n) for n in n_values})
    if not n_values or n_values[0] < 1:
        raise ValueError("n values must be positive integers")
    x_grid = Grid.atoms([a, b])
    y_grid = Grid.atoms(sorted({a} | {a + 1.0 / n for n in n_values}))
    P = DiscreteMeasure(x_grid, [0.5, 0.5])
    ia = y_grid.index_of(a)
    limit = Channel.deterministic(x_grid, y_grid, [ia, ia])
    allowed = set(n_values)

    def gen(n: int) -> Channel:
        if n not in allowed:
            raise ValueError(f"n={n} was not declared when building the observation grid")
        shifted = a + 1.0 / n
        cols = [y_grid.index_of(shifted) if x >= shifted else ia for x in (a, b)]
        return Channel.deterministic(x_grid, y_grid, cols)

    u_grid = make_action_grid(np.linspace(a, b, 11), required=[a, b, (a + b) / 2])
    seq = ChannelSequence(gen, x_grid, y_grid, "output a + 1/n above the threshold, a below")
    return Scenario(P, limit, seq, CostSpec.quadratic(x_grid, u_grid))


def square_wave_masses(K: int, n: int) -> np.ndarray:
    """Cell masses of the density ``1 + h_n`` on ``K`` equal cells of [0, 1].

    ``h_n`` is +1 on the left half and -1 on the right half of each of the ``n``
    periods ``[(k-1)/n, k/n)``; ``K`` must be a multiple of ``2n`` so the wave is
    constant on every cell and the masses are exactly ``2/K`` or ``0``.
    """
    if n < 1 or K % (2 * n):
        raise ValueError(f"K={K} must be a positive multiple of 2n={2 * n}")
    half = K // (2 * n)
    left = (np.arange(K) // half) % 2 == 0
    return np.where(left, 2.0 / K, 0.0)


def left_cells(K: int, n: int) -> np.ndarray:
    return square_wave_masses(K, n) > 0


def setwise_counterexample(K: int) -> Scenario:
    """Atoms at 0 and 1; the limit channel is uniform on [0, 1] for both inputs and
    ``Q_n`` keeps input 0 uniform while input 1 follows the square-wave density."""
    x_grid = Grid.atoms([0.0, 1.0])
    y_grid = Grid.uniform(K)
    P = DiscreteMeasure(x_grid, [0.5, 0.5])
    uniform = np.full(K, 1.0 / K)
    limit = Channel(x_grid, y_grid, np.vstack([uniform, uniform]))

    def gen(n: int) -> Channel:
        return Channel(x_grid, y_grid, np.vstack([uniform, square_wave_masses(K, n)]))

    u_grid = make_action_grid(np.linspace(0.0, 1.0, 11), required=[0.0, 0.5, 2.0 / 3.0, 1.0])
    seq = ChannelSequence(gen, x_grid, y_grid, "input 1 follows the square-wave density 1 + h_n")
    return Scenario(P, limit, seq, CostSpec.quadratic(x_grid, u_grid))


def alternating_quantizer(grid_size: int, n: int) -> Quantizer:
    """Two-cell quantizer of the uniform grid on [0, 1]: cell 0 on the left halves of the n periods."""
    x_grid = Grid.uniform(grid_size)
    return Quantizer(x_grid, np.where(left_cells(grid_size, n), 0, 1), 2)


def alternating_quantizer_sequence(grid_size: int) -> tuple[DiscreteMeasure, RandomQuantizer, ChannelSequence]:
    """Uniform prior, the constant (1/2, 1/2) limit kernel, and the alternating quantizers as channels."""
    x_grid = Grid.uniform(grid_size)
    P = DiscreteMeasure.uniform(x_grid)
    limit = RandomQuantizer(x_grid, np.full((grid_size, 2), 0.5))
    limit_ch = limit.as_channel()

    def gen(n: int) -> Channel:
        q = Quantizer(x_grid, np.where(left_cells(grid_size, n), 0, 1), 2)
        return as_channel(q)

    return P, limit, ChannelSequence(gen, x_grid, limit_ch.y_grid, "cell 0 on the left half of each period")
