from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from segmentkit.errors import ArgumentError, StructuralError
from segmentkit.grid import DiscreteSignal, Grid
from segmentkit.settings import settings

settings.register('partitions.tolerance', 1e-12, "Tolerance for comparing real partition points", minimum=0.0)


@dataclass(frozen=True, eq=False)
class Partition:
    """ Sorted breakpoints in [0, 1] containing 0 and 1.

    >>> Partition((0.0, 0.3, 1.0)).jumps
    1
    """
    points: tuple[float, ...]

    def __post_init__(self):
        points = tuple(float(x) for x in self.points)
        tolerance = settings['partitions.tolerance']

        if len(points) < 2:
            raise StructuralError(f"A partition needs at least the points 0 and 1, got {points}")
        if not all(np.isfinite(points)):
            raise StructuralError(f"Partition points must be finite, got {points}")
        if abs(points[0]) > tolerance or abs(points[-1] - 1.0) > tolerance:
            raise StructuralError(f"A partition must start at 0 and end at 1, got {points}")
        points = (0.0, *points[1:-1], 1.0)
        if any(b <= a for a, b in zip(points, points[1:])):
            raise StructuralError(f"Partition points must be strictly increasing, got {points}")

        object.__setattr__(self, 'points', points)

    @property
    def jumps(self) -> int:
        return len(self.points) - 2

    @property
    def interior(self) -> tuple[float, ...]:
        return self.points[1:-1]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[float]:
        return iter(self.points)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        tolerance = settings['partitions.tolerance']
        return len(self.points) == len(other.points) and all(
            abs(a - b) <= tolerance for a, b in zip(self.points, other.points))

    __hash__ = None  # type: ignore[assignment]

    def to_json(self) -> list[float]:
        return list(self.points)


@dataclass(frozen=True)
class GridPartition:
    """ Partition whose points are grid indices 0 = k_0 < ... < k_r = n. """
    grid: Grid
    indices: tuple[int, ...]

    def __post_init__(self):
        indices = tuple(int(k) for k in self.indices)
        n = self.grid.n
        if len(indices) < 2 or indices[0] != 0 or indices[-1] != n:
            raise StructuralError(f"Grid partition indices must start at 0 and end at {n}, got {indices}")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise StructuralError(f"Grid partition indices must be strictly increasing, got {indices}")
        object.__setattr__(self, 'indices', indices)

    @classmethod
    def trivial(cls, n: int) -> GridPartition:
        return cls(Grid(n), (0, n))

    @classmethod
    def full(cls, n: int) -> GridPartition:
        return cls(Grid(n), tuple(range(n + 1)))

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def jumps(self) -> int:
        return len(self.indices) - 2

    @property
    def points(self) -> tuple[float, ...]:
        return tuple(k / self.grid.n for k in self.indices)

    def blocks(self) -> Iterator[tuple[int, int]]:
        """ Consecutive index pairs (j, k); block samples are j..k-1. """
        return zip(self.indices[:-1], self.indices[1:])

    def block_lengths(self) -> np.ndarray:
        return np.diff(self.indices)

    def to_partition(self) -> Partition:
        return Partition(self.points)

    def __len__(self) -> int:
        return len(self.indices)

    def to_json(self) -> dict:
        return {'n': self.grid.n, 'indices': list(self.indices), 'points': list(self.points)}


@dataclass(frozen=True)
class IntervalDecomposition:
    """ Open intervals between consecutive partition points, in order. """
    intervals: tuple[tuple[float, float], ...]

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(self.intervals)

    def __getitem__(self, index: int) -> tuple[float, float]:
        return self.intervals[index]


class _NotInRegime:
    """ Marker returned by match_intervals when the partitions are still too far apart. """
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NOT_IN_REGIME"

    def __bool__(self):
        return False


NOT_IN_REGIME = _NotInRegime()


def _as_partition(p: Partition | GridPartition) -> Partition:
    return p.to_partition() if isinstance(p, GridPartition) else p


def partition_of(points: Iterable[float]) -> Partition:
    return Partition(tuple(sorted(float(x) for x in points)))


def grid_partition_of(p: Partition, n: int) -> GridPartition:
    """ The grid partition of S(n) with the same points; each point must be a multiple of 1/n. """
    scaled = np.asarray(p.points) * n
    indices = np.rint(scaled).astype(int)
    off_grid = np.abs(scaled - indices) > 1e-9 * max(n, 1)
    if np.any(off_grid):
        bad = p.points[int(np.flatnonzero(off_grid)[0])]
        raise ArgumentError(f"Partition point {bad} is not on the grid of {n} cells")
    return GridPartition(Grid(n), tuple(indices.tolist()))


def hausdorff_distance(p: Partition | GridPartition, q: Partition | GridPartition) -> float:
    """ Max of the two directed max-min distances between the point sets.

    >>> round(hausdorff_distance(Partition((0, 0.3, 1)), Partition((0, 0.4, 1))), 12)
    0.1
    """
    a = np.asarray(_as_partition(p).points)
    b = np.asarray(_as_partition(q).points)
    return max(_directed_distance(a, b), _directed_distance(b, a))


def _directed_distance(a: np.ndarray, b: np.ndarray) -> float:
    """ max over x in a of the distance to the nearest point of sorted b. """
    right = np.clip(np.searchsorted(b, a), 0, len(b) - 1)
    left = np.clip(right - 1, 0, len(b) - 1)
    nearest = np.minimum(np.abs(a - b[left]), np.abs(a - b[right]))
    return float(nearest.max())


def intervals(p: Partition | GridPartition) -> IntervalDecomposition:
    points = _as_partition(p).points
    return IntervalDecomposition(tuple(zip(points[:-1], points[1:])))


def jump_count(p: Partition | GridPartition) -> int:
    return len(p) - 2


def threshold_partition(f: DiscreteSignal, threshold: float) -> GridPartition:
    """ Grid partition with a breakpoint at k + 1 wherever |f[k+1] - f[k]| > threshold.

    >>> threshold_partition(DiscreteSignal.from_values([0.0, 0.05, 1.0]), 0.5).indices
    (0, 2, 3)
    """
    if threshold < 0:
        raise ArgumentError(f"Threshold must be nonnegative, got {threshold}")
    jumps = np.flatnonzero(np.abs(np.diff(f.values)) > threshold) + 1
    return GridPartition(f.grid, (0, *jumps.tolist(), f.n))


def jump_partition(f: DiscreteSignal) -> GridPartition:
    """ Breakpoints wherever consecutive samples differ at all. """
    return threshold_partition(f, 0.0)


def default_threshold(gamma: float, mu: float, n: int) -> float:
    """ mu * sqrt(gamma / n): the jump size at which a bond's penalty saturates. """
    return mu * float(np.sqrt(gamma / n))


def refines(p: Partition | GridPartition, q: Partition | GridPartition) -> bool:
    """ True if every point of q is a point of p. """
    if isinstance(p, GridPartition) and isinstance(q, GridPartition) and p.grid == q.grid:
        return set(q.indices) <= set(p.indices)
    p, q = _as_partition(p), _as_partition(q)
    tolerance = settings['partitions.tolerance']
    mine = np.asarray(p.points)
    return all(np.min(np.abs(mine - x)) <= tolerance for x in q.points)


def union(p: Partition | GridPartition, q: Partition | GridPartition) -> Partition | GridPartition:
    if isinstance(p, GridPartition) and isinstance(q, GridPartition):
        if p.grid != q.grid:
            raise ArgumentError(f"Cannot join grid partitions of {p.n} and {q.n} cells")
        return GridPartition(p.grid, tuple(sorted(set(p.indices) | set(q.indices))))

    merged = sorted(set(_as_partition(p).points) | set(_as_partition(q).points))
    tolerance = settings['partitions.tolerance']
    points = [merged[0]]
    for x in merged[1:]:
        if x - points[-1] > tolerance:
            points.append(x)
    points[-1] = 1.0
    return Partition(tuple(points))


def partition_to_edges(p: GridPartition) -> np.ndarray:
    """ Edge vector e in {0,1}^(n-1): e[k] = 1 iff the bond between samples k and k+1 is cut. """
    edges = np.zeros(max(p.n - 1, 0), dtype=int)
    edges[np.asarray(p.indices[1:-1], dtype=int) - 1] = 1
    return edges


def edges_to_partition(edges: Sequence[int] | np.ndarray, n: int | None = None) -> GridPartition:
    edges = np.asarray(edges, dtype=int)
    n = len(edges) + 1 if n is None else n
    if len(edges) != n - 1:
        raise ArgumentError(f"A grid of {n} cells has {n - 1} bonds, got {len(edges)} edge values")
    if np.any((edges != 0) & (edges != 1)):
        raise ArgumentError("Edge values must be 0 or 1")
    return GridPartition(Grid(n), (0, *(np.flatnonzero(edges) + 1).tolist(), n))


@dataclass(frozen=True)
class IntervalMatch:
    limit: tuple[float, float]
    matched: tuple[float, float] | _NotInRegime


def match_intervals(p_approx: Partition | GridPartition, p_limit: Partition | GridPartition) -> list[IntervalMatch]:
    """ Pair every limit interval (a, b) with (max{x <= a + d}, min{x >= b - d}) from p_approx.

    d is a third of the smallest gap of p_limit. When the partitions are at least d apart in
    the Hausdorff metric the construction is not defined and every match is NOT_IN_REGIME.
    """
    approx = np.asarray(_as_partition(p_approx).points)
    limit = _as_partition(p_limit)
    delta = float(np.min(np.diff(limit.points))) / 3.0

    if hausdorff_distance(p_approx, limit) >= delta:
        return [IntervalMatch(interval, NOT_IN_REGIME) for interval in intervals(limit)]

    matches = []
    for a, b in intervals(limit):
        lo = float(approx[approx <= a + delta].max())
        hi = float(approx[approx >= b - delta].min())
        matches.append(IntervalMatch((a, b), (lo, hi)))
    return matches
