from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from segmentkit.errors import ArgumentError, StructuralError
from segmentkit.grid.continuous import ContinuousSignal


@dataclass(frozen=True)
class Grid:
    """ Equidistant grid of n cells on [0, 1]; the last cell is closed.

    >>> Grid(4).cell(3)
    (0.75, 1.0)
    """
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ArgumentError(f"Grid size must be a positive integer, got {self.n!r}")
        object.__setattr__(self, 'n', int(self.n))

    @property
    def width(self) -> float:
        return 1.0 / self.n

    @property
    def edges(self) -> np.ndarray:
        """ The n + 1 grid points k/n, with edges[-1] == 1.0 exactly. """
        return np.arange(self.n + 1) / self.n

    def cell(self, index: int) -> tuple[float, float]:
        if not 0 <= index < self.n:
            raise ArgumentError(f"Cell {index} outside grid of {self.n} cells")
        return index / self.n, (index + 1) / self.n

    def cell_of(self, x: np.ndarray | float) -> np.ndarray:
        """ Index of the cell containing x; x = 1 belongs to the last cell. """
        return np.clip(np.floor(np.asarray(x, dtype=float) * self.n).astype(int), 0, self.n - 1)


@dataclass(frozen=True, eq=False)
class DiscreteSignal:
    """ Cell averages of a signal on a grid; read-only after construction. """
    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or len(values) != self.grid.n:
            raise StructuralError(f"Expected {self.grid.n} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise StructuralError(f"Sample {bad} is not finite: {values[bad]}")
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_values(cls, values: Sequence[float] | np.ndarray) -> DiscreteSignal:
        try:
            values = np.asarray(values, dtype=float)
        except (TypeError, ValueError) as e:
            raise StructuralError(f"Samples must be numbers: {e}") from e
        if values.ndim != 1 or len(values) == 0:
            raise StructuralError("A discrete signal needs at least one sample")
        return cls(Grid(len(values)), values)

    @property
    def n(self) -> int:
        return self.grid.n

    def __len__(self) -> int:
        return self.grid.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DiscreteSignal):
            return NotImplemented
        return self.grid == other.grid and bool(np.array_equal(self.values, other.values))

    __hash__ = None  # type: ignore[assignment]

    def norm2(self) -> float:
        """ (1/n)-weighted squared norm, equal to the L2 norm of the embedded step function. """
        return float(np.dot(self.values, self.values)) / self.n

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def inner(self, other: DiscreteSignal) -> float:
        check_same_grid(self, other)
        return float(np.dot(self.values, other.values)) / self.n

    def __repr__(self):
        return f"DiscreteSignal(n={self.n})"


@dataclass(frozen=True, eq=False)
class PrefixTable:
    """ Cumulative sums (and sums of squares) over sample indices 0..n. """
    sums: np.ndarray
    squares: np.ndarray

    @property
    def n(self) -> int:
        return len(self.sums) - 1

    def range_sum(self, j: int | np.ndarray, k: int | np.ndarray) -> np.ndarray:
        return self.sums[k] - self.sums[j]

    def range_squares(self, j: int | np.ndarray, k: int | np.ndarray) -> np.ndarray:
        return self.squares[k] - self.squares[j]


def check_same_grid(f: DiscreteSignal, g: DiscreteSignal):
    if f.grid != g.grid:
        raise ArgumentError(f"Signals live on different grids (n={f.n} and n={g.n})")


def discretize(g: ContinuousSignal, n: int) -> DiscreteSignal:
    """ Cell averages n * integral of g over each cell, from exact antiderivatives. """
    grid = Grid(n)
    return DiscreteSignal(grid, grid.n * g.cell_integrals(grid.edges))


def embed(d: DiscreteSignal) -> ContinuousSignal:
    """ Step function taking sample k on cell k, right-continuous, constant on the closed last cell. """
    return ContinuousSignal.step(d.grid.edges, d.values)


def coarsen(d: DiscreteSignal, m: int) -> DiscreteSignal:
    if m < 1 or d.n % m != 0:
        raise ArgumentError(f"Coarse grid size {m} does not divide {d.n}")
    return DiscreteSignal(Grid(m), d.values.reshape(m, d.n // m).mean(axis=1))


def refine(d: DiscreteSignal, k: int) -> DiscreteSignal:
    """ Repeat every sample k times; coarsen(refine(d, k), d.n) == d. """
    if k < 1:
        raise ArgumentError(f"Refinement factor must be positive, got {k}")
    return DiscreteSignal(Grid(d.n * k), np.repeat(d.values, k))


def _compensated_cumsum(values: np.ndarray) -> np.ndarray:
    """ Running sums corrected by the exact rounding error of every addition (vectorised two-sum). """
    values = np.asarray(values, dtype=float)
    result = np.zeros(len(values) + 1)
    sums = np.add.accumulate(values)
    previous = np.concatenate(([0.0], sums[:-1]))
    added = sums - previous
    errors = (previous - (sums - added)) + (values - added)
    result[1:] = sums + np.add.accumulate(errors)
    return result


def build_prefix(d: DiscreteSignal) -> PrefixTable:
    """
    >>> table = build_prefix(DiscreteSignal.from_values([1.0, 2.0, 3.0]))
    >>> table.sums.tolist(), table.squares.tolist()
    ([0.0, 1.0, 3.0, 6.0], [0.0, 1.0, 5.0, 14.0])
    """
    sums = _compensated_cumsum(d.values)
    squares = _compensated_cumsum(d.values * d.values)
    sums.flags.writeable = False
    squares.flags.writeable = False
    return PrefixTable(sums, squares)


def projection_error(g: ContinuousSignal, n: int) -> float:
    """ ||g - embed(discretize(g, n))|| via the projection identity ||g||^2 - ||g_n||^2. """
    return float(np.sqrt(max(g.norm2() - discretize(g, n).norm2(), 0.0)))
