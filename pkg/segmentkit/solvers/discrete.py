from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.linalg

from segmentkit.errors import ArgumentError, RoutingError
from segmentkit.grid import DiscreteSignal, embed
from segmentkit.partitions import GridPartition, threshold_partition
from segmentkit.solvers.solution import PiecewiseSolution


@dataclass(frozen=True, eq=False)
class BlockSystem:
    """ (n^2 B(m) - mu^2 I) f = -mu^2 g_block for one block of m samples on a grid of n cells. """
    g_block: np.ndarray = field(repr=False)
    n: int
    mu: float

    def __post_init__(self):
        g_block = np.array(self.g_block, dtype=float)
        if g_block.ndim != 1 or len(g_block) == 0:
            raise ArgumentError("A block needs at least one sample")
        if len(g_block) > self.n:
            raise ArgumentError(f"Block of {len(g_block)} samples does not fit a grid of {self.n} cells")
        if self.mu < 0 or not np.isfinite(self.mu):
            raise ArgumentError(f"mu must be a finite nonnegative number, got {self.mu}")
        g_block.flags.writeable = False
        object.__setattr__(self, 'g_block', g_block)

    @property
    def m(self) -> int:
        return len(self.g_block)

    def banded(self) -> np.ndarray:
        """ The system matrix in scipy's (1, 1) banded layout. """
        n2 = float(self.n) ** 2
        ab = np.zeros((3, self.m))
        degree = np.full(self.m, 2.0)
        degree[0] = degree[-1] = 1.0
        if self.m == 1:
            degree[0] = 0.0
        ab[1] = -n2 * degree - self.mu ** 2
        ab[0, 1:] = n2
        ab[2, :-1] = n2
        return ab

    def matrix(self) -> np.ndarray:
        return float(self.n) ** 2 * block_matrix(self.m) - self.mu ** 2 * np.eye(self.m)

    def rhs(self) -> np.ndarray:
        return -self.mu ** 2 * self.g_block


def block_matrix(m: int) -> np.ndarray:
    """ Dense Neumann matrix B(m): 1 off the diagonal, -1/-2/.../-2/-1 on it (zero for m = 1). """
    if m < 1:
        raise ArgumentError(f"Block length must be positive, got {m}")
    matrix = np.diag(np.ones(m - 1), 1) + np.diag(np.ones(m - 1), -1)
    matrix -= np.diag(matrix.sum(axis=1))
    return matrix


def block_eigenvalues(m: int) -> np.ndarray:
    """ Eigenvalues 2(cos(pi s/m) - 1), s = 0..m-1, of B(m), descending from 0.

    >>> np.round(block_eigenvalues(2), 12).tolist()
    [0.0, -2.0]
    """
    if m < 1:
        raise ArgumentError(f"Block length must be positive, got {m}")
    return 2.0 * (np.cos(np.pi * np.arange(m) / m) - 1.0)


def spectral_gap(m: int, n: int) -> float:
    """ |n^2 lambda_1| for a block of m samples, 0 for single samples. """
    if m < 2:
        return 0.0
    return float(n) ** 2 * 2.0 * (1.0 - np.cos(np.pi / m))


def solve_block_discrete(system: BlockSystem) -> np.ndarray:
    """ Tridiagonal elimination of the block system; mu = 0 belongs to solve_block_mean. """
    if system.mu <= 0:
        raise RoutingError(f"mu = {system.mu} must be routed to solve_block_mean")
    g = system.g_block
    if np.all(g == g[0]):
        return np.full(system.m, g[0])
    # The block mean passes through unchanged, so only the centred part goes through
    # the nearly singular system. Its exact solution has zero mean.
    mean = float(np.mean(g))
    centred = scipy.linalg.solve_banded((1, 1), system.banded(), -system.mu ** 2 * (g - mean), check_finite=False)
    return centred - np.mean(centred) + mean


def solve_block_spectral(system: BlockSystem) -> np.ndarray:
    """ Same solution through the DCT-II eigenbasis of B(m); used to cross-check elimination. """
    if system.mu <= 0:
        raise RoutingError(f"mu = {system.mu} must be routed to solve_block_mean")
    coefficients = scipy.fft.dct(system.g_block, type=2, norm='ortho')
    mu2 = system.mu ** 2
    coefficients *= mu2 / (mu2 - float(system.n) ** 2 * block_eigenvalues(system.m))
    return scipy.fft.idct(coefficients, type=2, norm='ortho')


def solve_block_mean(g_block: np.ndarray) -> np.ndarray:
    g_block = np.asarray(g_block, dtype=float)
    if len(g_block) == 0:
        raise ArgumentError("Cannot average an empty block")
    return np.full(len(g_block), np.mean(g_block))


class DiscreteSolution(PiecewiseSolution):
    """ Partition solver output on a grid: one sample per cell, blocks per partition. """

    def __init__(self, partition: GridPartition, mu: float, signal: DiscreteSignal, values: np.ndarray):
        self.partition = partition
        self.mu = mu
        self.signal = signal
        values = np.asarray(values, dtype=float)
        values.flags.writeable = False
        self._values = values

        n = signal.n
        starts = np.asarray(partition.indices[:-1])
        self._block_inner = np.add.reduceat(signal.values * values, starts) / n
        self._block_signal_norm2 = np.add.reduceat(signal.values ** 2, starts) / n

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n(self) -> int:
        return self.signal.n

    @property
    def block_inner(self) -> np.ndarray:
        return self._block_inner

    @property
    def block_signal_norm2(self) -> np.ndarray:
        return self._block_signal_norm2

    def as_signal(self) -> DiscreteSignal:
        return DiscreteSignal(self.signal.grid, self._values)

    def blocks(self) -> list[np.ndarray]:
        return [self._values[j:k] for j, k in self.partition.blocks()]

    def norm2(self) -> float:
        return float(np.dot(self._values, self._values)) / self.n

    def evaluate(self, x: np.ndarray | float) -> np.ndarray:
        return self._values[self.signal.grid.cell_of(x)]

    def jump_partition(self) -> GridPartition:
        cuts = [k for k in self.partition.indices[1:-1] if self._values[k - 1] != self._values[k]]
        return GridPartition(self.partition.grid, (0, *cuts, self.n))

    def associated_partition(self, threshold: float = 0.0) -> GridPartition:
        return threshold_partition(self.as_signal(), threshold)

    def embedded(self):
        return embed(self.as_signal())

    def to_json(self) -> dict:
        return {'kind': 'samples', 'values': self._values.tolist()}

    def __repr__(self):
        return f"DiscreteSolution(n={self.n}, mu={self.mu}, blocks={self.block_count})"


def partition_solver_discrete(g: DiscreteSignal, p: GridPartition, mu: float) -> DiscreteSolution:
    """ Blockwise minimizer of the fixed-partition objective; block means when mu = 0. """
    if p.grid != g.grid:
        raise ArgumentError(f"Partition on {p.n} cells does not match a signal on {g.n} cells")
    if mu < 0 or not np.isfinite(mu):
        raise ArgumentError(f"mu must be a finite nonnegative number, got {mu}")

    values = np.empty(g.n)
    for j, k in p.blocks():
        if mu == 0:
            values[j:k] = solve_block_mean(g.values[j:k])
        else:
            values[j:k] = solve_block_discrete(BlockSystem(g.values[j:k], g.n, mu))
    return DiscreteSolution(p, mu, g, values)
