"""Direct evaluation of the functionals indexed by the parameter cube (gamma, mu, t).

t = 1/n selects the discrete members (Blake-Zisserman, Potts, distance on the grid of n
cells, all with (1/n)-weighted fidelity), t = 0 the continuous ones (Mumford-Shah, continuous
Potts, L2 distance). gamma = 0 rows are pure distances, mu = 0 rows are Potts models.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from segmentkit.errors import ArgumentError, RoutingError
from segmentkit.grid import ContinuousSignal, DiscreteSignal, check_same_grid, discretize, embed
from segmentkit.partitions import GridPartition, Partition, partition_to_edges
from segmentkit.solvers import (
    BlockSystem,
    DiscreteSolution,
    SpectralSolution,
    partition_solver_continuous,
    solve_block_discrete,
    solve_block_mean,
)

DiscreteLike = DiscreteSignal | DiscreteSolution
ContinuousLike = ContinuousSignal | SpectralSolution


@dataclass(frozen=True)
class ParameterPoint:
    """ A point (gamma, mu, t) of the cube; n is None for t = 0, else t = 1/n. """
    gamma: float
    mu: float
    n: int | None = None

    def __post_init__(self):
        for name in ('gamma', 'mu'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise ArgumentError(f"{name} must be a number, got {value!r}")
            if not math.isfinite(value) or value < 0:
                raise ArgumentError(f"{name} must be finite and nonnegative, got {value}")
            object.__setattr__(self, name, float(value))
        if self.n is not None:
            if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
                raise ArgumentError(f"n must be a positive integer, got {self.n!r}")
            object.__setattr__(self, 'n', int(self.n))

    @classmethod
    def discrete(cls, gamma: float, mu: float, n: int) -> ParameterPoint:
        return cls(gamma, mu, n)

    @classmethod
    def continuous(cls, gamma: float, mu: float) -> ParameterPoint:
        return cls(gamma, mu, None)

    @classmethod
    def from_t(cls, gamma: float, mu: float, t: float) -> ParameterPoint:
        if t == 0:
            return cls(gamma, mu, None)
        if t < 0 or t > 1:
            raise ArgumentError(f"t must be 0 or 1/n, got {t}")
        n = round(1.0 / t)
        if abs(1.0 / n - t) > 1e-12:
            raise ArgumentError(f"t = {t} is not of the form 1/n")
        return cls(gamma, mu, n)

    @property
    def t(self) -> float:
        return 0.0 if self.n is None else 1.0 / self.n

    @property
    def is_discrete(self) -> bool:
        return self.n is not None

    @property
    def model(self) -> str:
        if self.gamma == 0:
            return 'distance'
        if self.mu == 0:
            return 'potts' if self.is_discrete else 'potts-continuous'
        return 'bz' if self.is_discrete else 'ms'

    def to_json(self) -> dict:
        return {'gamma': self.gamma, 'mu': self.mu, 't': self.t, 'n': self.n}


@dataclass(frozen=True)
class ObjectiveBreakdown:
    jump_term: float
    smooth_term: float
    fidelity_term: float
    total: float
    jumps: int = 0
    partition_size: int | None = None

    @classmethod
    def of(cls, jump_term: float, smooth_term: float, fidelity_term: float,
           jumps: int = 0, partition_size: int | None = None) -> ObjectiveBreakdown:
        total = math.fsum((jump_term, smooth_term, fidelity_term))
        return cls(float(jump_term), float(smooth_term), float(fidelity_term), total, int(jumps), partition_size)

    def to_json(self) -> dict:
        return {
            'jump_term': self.jump_term,
            'smooth_term': self.smooth_term,
            'fidelity_term': self.fidelity_term,
            'total': self.total,
            'jumps': self.jumps,
            'partition_size': self.partition_size,
        }


def _as_discrete(f: DiscreteLike) -> DiscreteSignal:
    if isinstance(f, DiscreteSolution):
        return f.as_signal()
    if isinstance(f, DiscreteSignal):
        return f
    raise ArgumentError(f"Expected samples on a grid, got {type(f).__name__}")


def _partition_size(f: object) -> int | None:
    return len(f.partition) if isinstance(f, (DiscreteSolution, SpectralSolution)) else None


def _match_signal(g: DiscreteSignal | ContinuousSignal, n: int) -> DiscreteSignal:
    if isinstance(g, ContinuousSignal):
        return discretize(g, n)
    if g.n != n:
        raise ArgumentError(f"Signal on {g.n} cells does not match a grid of {n} cells")
    return g


def _fidelity(f: DiscreteSignal, g: DiscreteSignal) -> float:
    check_same_grid(f, g)
    difference = f.values - g.values
    return float(np.dot(difference, difference)) / f.n


def bond_penalties(f: DiscreteSignal, mu: float) -> np.ndarray:
    """ (n/mu^2) (f[k+1] - f[k])^2 for every bond. """
    return f.n / mu ** 2 * np.diff(f.values) ** 2


def eval_bz(f: DiscreteLike, g: DiscreteSignal, gamma: float, mu: float, n: int | None = None) -> ObjectiveBreakdown:
    """ sum over bonds of min{(n/mu^2) diff^2, gamma} plus (1/n) sum (f - g)^2.

    Bonds where gamma is the smaller term count as jumps.
    """
    if mu == 0:
        raise RoutingError("mu = 0 is the Potts model, use eval_potts_discrete")
    size = _partition_size(f)
    f = _as_discrete(f)
    if n is not None and n != f.n:
        raise ArgumentError(f"n = {n} does not match a signal on {f.n} cells")

    penalties = bond_penalties(f, mu)
    active = penalties > gamma
    jumps = int(np.count_nonzero(active))
    return ObjectiveBreakdown.of(gamma * jumps, float(np.sum(penalties[~active])), _fidelity(f, g), jumps, size)


def eval_potts_discrete(f: DiscreteLike, g: DiscreteSignal, gamma: float) -> ObjectiveBreakdown:
    """ gamma * #{k : f[k+1] != f[k]} + (1/n) sum (f - g)^2, with exact comparison of samples.

    Solutions keep block values bit-identical inside blocks, so the count is the number of
    partition points where adjacent blocks really differ; partition_size reports the rest.
    """
    size = _partition_size(f)
    f = _as_discrete(f)
    jumps = int(np.count_nonzero(np.diff(f.values) != 0))
    return ObjectiveBreakdown.of(gamma * jumps, 0.0, _fidelity(f, g), jumps, size)


def eval_ms(f: ContinuousLike, g: ContinuousSignal, gamma: float, mu: float) -> ObjectiveBreakdown:
    """ gamma j(f) + mu^-2 integral |f'|^2 + ||f - g||^2 for a cosine-series solution or a piecewise polynomial. """
    if isinstance(f, SpectralSolution):
        if mu == 0 and not f.is_piecewise_constant():
            raise ArgumentError("With mu = 0 the functional is finite only for piecewise constant f")
        jumps = f.partition.jumps
        smooth = 0.0 if mu == 0 else f.derivative_energy() / mu ** 2
        inner = f.signal_inner() if f.signal is g else f.inner_with(g)
        fidelity = g.norm2() - 2.0 * inner + f.norm2()
        return ObjectiveBreakdown.of(gamma * jumps, smooth, fidelity, jumps, len(f.partition))

    if isinstance(f, ContinuousSignal):
        jumps = len(f.discontinuities())
        if mu == 0:
            if not f.is_piecewise_constant():
                raise ArgumentError("With mu = 0 the functional is finite only for piecewise constant f")
            smooth = 0.0
        else:
            smooth = f.derivative_energy() / mu ** 2
        return ObjectiveBreakdown.of(gamma * jumps, smooth, (f - g).norm2(), jumps)

    raise ArgumentError(f"Expected a continuous function, got {type(f).__name__}")


def eval_potts_continuous(f: ContinuousLike, g: ContinuousSignal, gamma: float) -> ObjectiveBreakdown:
    return eval_ms(f, g, gamma, 0.0)


def l2_distance2(first: object, second: object) -> float:
    """ Squared L2 distance between any two of: samples (embedded as steps), polynomial signals, cosine solutions. """
    first, second = _as_function(first), _as_function(second)
    if isinstance(first, ContinuousSignal) and isinstance(second, ContinuousSignal):
        return (first - second).norm2()
    if isinstance(first, ContinuousSignal):
        first, second = second, first
    if isinstance(second, ContinuousSignal):
        value = first.norm2() - 2.0 * first.inner_with(second) + second.norm2()
    elif first.partition == second.partition:
        value = 0.0
        for mine, theirs in zip(first.blocks, second.blocks):
            size = max(len(mine.coefficients), len(theirs.coefficients))
            difference = np.zeros(size)
            difference[:len(mine.coefficients)] += mine.coefficients
            difference[:len(theirs.coefficients)] -= theirs.coefficients
            value += float(np.dot(difference, difference))
    else:
        value = first.norm2() - 2.0 * first.inner_spectral(second) + second.norm2()
    return max(value, 0.0)


def l2_distance(first: object, second: object) -> float:
    return math.sqrt(l2_distance2(first, second))


def _as_function(f: object) -> ContinuousSignal | SpectralSolution:
    if isinstance(f, DiscreteSolution):
        return f.embedded()
    if isinstance(f, DiscreteSignal):
        return embed(f)
    if isinstance(f, SpectralSolution) and f.is_piecewise_constant():
        return f.to_signal()
    if isinstance(f, (ContinuousSignal, SpectralSolution)):
        return f
    raise ArgumentError(f"Cannot measure the L2 distance of {type(f).__name__}")


def eval_distance(f: object, g: DiscreteSignal | ContinuousSignal, t: float) -> float:
    """ (1/n) sum (f - g_n)^2 for t = 1/n, integral of (f - g)^2 for t = 0. """
    if t == 0:
        if isinstance(f, (DiscreteSignal, DiscreteSolution)) or not isinstance(g, ContinuousSignal):
            raise ArgumentError("The continuous distance needs continuous f and g")
        return l2_distance2(f, g)

    f = _as_discrete(f)
    if abs(t * f.n - 1.0) > 1e-12:
        raise ArgumentError(f"t = {t} does not match a signal on {f.n} cells")
    return _fidelity(f, _match_signal(g, f.n))


def discrete_block_cost(g: DiscreteSignal, j: int, k: int, mu: float) -> float:
    """ (1/n)(sum g^2 - sum g f) on samples j..k-1, f the block solution. """
    block = g.values[j:k]
    if mu == 0:
        solution = solve_block_mean(block)
    else:
        solution = solve_block_discrete(BlockSystem(block, g.n, mu))
    return float(np.dot(block, block) - np.dot(block, solution)) / g.n


def reduced_bz(p: GridPartition, g: DiscreteSignal, gamma: float, mu: float,
               cache: dict[tuple[int, int], float] | None = None) -> float:
    """ gamma j(p) - <g, f*(p)> + ||g||^2, summed block by block.

    Pass a dict as cache to share block costs between calls on the same signal and mu.
    """
    if p.grid != g.grid:
        raise ArgumentError(f"Partition on {p.n} cells does not match a signal on {g.n} cells")
    total = gamma * p.jumps
    for block in p.blocks():
        if cache is None:
            total += discrete_block_cost(g, *block, mu)
            continue
        if block not in cache:
            cache[block] = discrete_block_cost(g, *block, mu)
        total += cache[block]
    return total


def reduced_ms(p: Partition, g: ContinuousSignal, gamma: float, mu: float, modes: int | None = None) -> float:
    solution = partition_solver_continuous(g, p, mu, modes)
    return gamma * p.jumps + g.norm2() - solution.signal_inner()


def fixed_partition_objective(f: DiscreteLike, g: DiscreteSignal, p: GridPartition, mu: float) -> float:
    """ Smoothness over the bonds inside blocks of p plus fidelity; +inf when mu = 0 and f varies in a block. """
    f = _as_discrete(f)
    if p.grid != f.grid:
        raise ArgumentError(f"Partition on {p.n} cells does not match a signal on {f.n} cells")
    inside = partition_to_edges(p) == 0
    if mu == 0:
        if np.any(np.diff(f.values)[inside] != 0):
            return math.inf
        return _fidelity(f, g)
    return float(np.sum(bond_penalties(f, mu)[inside])) + _fidelity(f, g)


def eval_edge_functional(edges: np.ndarray, f: DiscreteLike, g: DiscreteSignal, gamma: float, mu: float) -> float:
    """ Edge-variable form: sum (n/mu^2) diff^2 (1 - e) + gamma e over bonds, plus fidelity. """
    if mu == 0:
        raise RoutingError("The edge-variable form needs mu > 0")
    f = _as_discrete(f)
    edges = np.asarray(edges, dtype=float)
    if len(edges) != f.n - 1:
        raise ArgumentError(f"A grid of {f.n} cells has {f.n - 1} bonds, got {len(edges)} edge values")
    penalties = bond_penalties(f, mu)
    return float(np.sum(penalties * (1.0 - edges) + gamma * edges)) + _fidelity(f, g)


def family_eval(q: ParameterPoint, f: object, g: DiscreteSignal | ContinuousSignal) -> ObjectiveBreakdown:
    """ Evaluate the member of the family selected by q; representations must match q.t. """
    if q.is_discrete:
        if not isinstance(f, (DiscreteSignal, DiscreteSolution)):
            raise ArgumentError(f"t = 1/{q.n} needs samples on the grid, got {type(f).__name__}")
        if _as_discrete(f).n != q.n:
            raise ArgumentError(f"The functional is infinite off the grid of {q.n} cells (f has {_as_discrete(f).n})")
        g = _match_signal(g, q.n)
        if q.gamma == 0:
            distance = eval_distance(f, g, q.t)
            return ObjectiveBreakdown.of(0.0, 0.0, distance, 0, _partition_size(f))
        if q.mu == 0:
            return eval_potts_discrete(f, g, q.gamma)
        return eval_bz(f, g, q.gamma, q.mu)

    if not isinstance(f, (ContinuousSignal, SpectralSolution)) or not isinstance(g, ContinuousSignal):
        raise ArgumentError("t = 0 needs a continuous function and a continuous signal")
    if q.gamma == 0:
        return ObjectiveBreakdown.of(0.0, 0.0, eval_distance(f, g, 0.0), 0, _partition_size(f))
    if q.mu == 0:
        return eval_potts_continuous(f, g, q.gamma)
    return eval_ms(f, g, q.gamma, q.mu)
