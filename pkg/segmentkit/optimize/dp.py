from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from segmentkit.errors import ArgumentError, ResourceError
from segmentkit.events import SegmentationFinishedEvent, event_manager
from segmentkit.functionals import ObjectiveBreakdown, ParameterPoint, family_eval, reduced_bz
from segmentkit.grid import ContinuousSignal, DiscreteSignal, Grid
from segmentkit.logger import log
from segmentkit.optimize.cost_table import ContinuousCostTable, IntervalCostTable, build_cost_table
from segmentkit.partitions import GridPartition, Partition, edges_to_partition
from segmentkit.settings import settings
from segmentkit.solvers import PiecewiseSolution, partition_solver_continuous, partition_solver_discrete

settings.register('optimize.cap.brute_force', 16, "Largest n enumerated by the brute-force oracle", minimum=1)
settings.register('optimize.tie_tolerance', 1e-12, "Relative tolerance under which objective values tie", minimum=0.0)


class CostColumns(Protocol):
    n: int

    def column(self, k: int, starts: np.ndarray | None = None) -> np.ndarray:
        ...


@dataclass
class SegmentationResult:
    partition: GridPartition | Partition
    solution: PiecewiseSolution
    objective: ObjectiveBreakdown
    parameters: ParameterPoint
    diagnostics: dict = field(default_factory=dict)

    @property
    def jumps(self) -> int:
        return len(self.partition) - 2

    def __repr__(self):
        return (f"SegmentationResult(model={self.parameters.model}, jumps={self.jumps}, "
                f"objective={self.objective.total:.6g})")


def _check_parameters(gamma: float, mu: float):
    for name, value in (('gamma', gamma), ('mu', mu)):
        if not np.isfinite(value) or value < 0:
            raise ArgumentError(f"{name} must be finite and nonnegative, got {value}")


def _sweep(table: CostColumns, gamma: float) -> tuple[tuple[int, ...], float, int]:
    """ m(k) = min over j of m(j) + gamma [j > 0] + c(j, k), with deterministic ties.

    Among values within the tie tolerance the fewest jumps win, then the leftmost j. Starts
    whose lower bound m(j) + gamma [j > 0] already exceeds the value of the last-sample block are
    skipped; costs are nonnegative, so they cannot be within tolerance of the minimum.
    """
    n = table.n
    tolerance = settings['optimize.tie_tolerance']
    best = np.zeros(n + 1)
    jumps = np.zeros(n + 1, dtype=int)
    previous = np.zeros(n + 1, dtype=int)
    pruned = 0

    for k in range(1, n + 1):
        starts = np.arange(k)
        lower = best[:k] + np.where(starts > 0, gamma, 0.0)
        bound = lower[k - 1] + float(table.column(k, np.array([k - 1]))[0])
        survivors = starts[lower <= bound + tolerance * (1.0 + abs(bound))]
        pruned += k - len(survivors)

        costs = table.column(k, survivors)
        values = lower[survivors] + costs
        minimum = values.min()
        candidates = values <= minimum + tolerance * (1.0 + abs(minimum))
        candidate_starts = survivors[candidates]
        candidate_jumps = jumps[candidate_starts] + (candidate_starts > 0)
        choice = int(np.flatnonzero(candidates)[np.argmin(candidate_jumps)])

        start = int(survivors[choice])
        best[k] = values[choice]
        jumps[k] = jumps[start] + (start > 0)
        previous[k] = start

    indices = [n]
    while indices[-1] > 0:
        indices.append(int(previous[indices[-1]]))
    return tuple(reversed(indices)), float(best[n]), pruned


def minimize_dp(g: DiscreteSignal, gamma: float, mu: float, cap: int | None = None,
                table: IntervalCostTable | None = None) -> SegmentationResult:
    """ Exact global minimizer over all grid partitions by dynamic programming on block costs. """
    _check_parameters(gamma, mu)
    started = time.perf_counter()
    if table is None:
        table = build_cost_table(g, mu, cap)
    elif table.signal is not g or table.mu != mu:
        raise ArgumentError("Cost table was built for a different signal or mu")

    indices, value, pruned = _sweep(table, gamma)
    partition = GridPartition(g.grid, indices)
    solution = partition_solver_discrete(g, partition, mu)
    parameters = ParameterPoint.discrete(gamma, mu, g.n)
    objective = family_eval(parameters, solution, g)
    runtime = time.perf_counter() - started

    log.debug(f"DP over n={g.n}: {table.size} block costs, {pruned} starts pruned")
    event_manager.publish(SegmentationFinishedEvent(parameters.model, g.n, partition.jumps, objective.total, runtime))
    return SegmentationResult(partition, solution, objective, parameters, {
        'table_size': table.size,
        'pruned': pruned,
        'dp_value': value,
        'runtime_seconds': runtime,
    })


def brute_force_min(g: DiscreteSignal, gamma: float, mu: float) -> SegmentationResult:
    """ Enumerate all 2^(n-1) grid partitions; ties resolved exactly like minimize_dp. """
    _check_parameters(gamma, mu)
    cap = settings['optimize.cap.brute_force']
    if g.n > cap:
        raise ResourceError(f"Brute force over n = {g.n} exceeds the cap of {cap}")

    tolerance = settings['optimize.tie_tolerance']
    cache: dict[tuple[int, int], float] = {}
    best_value = np.inf
    best_key: tuple | None = None
    best_partition: GridPartition | None = None

    for edges in itertools.product((0, 1), repeat=g.n - 1):
        partition = edges_to_partition(edges, g.n)
        value = reduced_bz(partition, g, gamma, mu, cache)
        key = (partition.jumps, tuple(reversed(partition.indices[1:-1])))
        slack = tolerance * (1.0 + abs(best_value)) if np.isfinite(best_value) else 0.0
        if best_key is None or value < best_value - slack or (value <= best_value + slack and key < best_key):
            best_value, best_key, best_partition = min(value, best_value), key, partition

    solution = partition_solver_discrete(g, best_partition, mu)
    parameters = ParameterPoint.discrete(gamma, mu, g.n)
    return SegmentationResult(best_partition, solution, family_eval(parameters, solution, g), parameters, {
        'enumerated': 2 ** (g.n - 1),
        'reduced_value': float(best_value),
    })


def minimize_ms_grid(g: ContinuousSignal, gamma: float, mu: float, nref: int = 256,
                     modes: int | None = None, cap: int | None = None) -> SegmentationResult:
    """ Minimize the reduced continuous functional over partitions with points on the grid of nref cells. """
    _check_parameters(gamma, mu)
    modes = settings['solvers.spectral.modes'] if modes is None else modes
    if nref < 1:
        raise ArgumentError(f"Candidate grid size must be positive, got {nref}")
    started = time.perf_counter()

    table = ContinuousCostTable(g, mu, nref, modes, cap)
    indices, value, pruned = _sweep(table, gamma)
    partition = GridPartition(Grid(nref), indices).to_partition()
    solution = partition_solver_continuous(g, partition, mu, modes)
    parameters = ParameterPoint.continuous(gamma, mu)
    objective = family_eval(parameters, solution, g)
    runtime = time.perf_counter() - started

    log.debug(f"Grid-restricted minimization on {nref} candidates: {pruned} starts pruned")
    event_manager.publish(SegmentationFinishedEvent(parameters.model, None, partition.jumps, objective.total, runtime))
    return SegmentationResult(partition, solution, objective, parameters, {
        'nref': nref,
        'modes': modes,
        'table_size': table.size,
        'pruned': pruned,
        'dp_value': value,
        'truncation_bound': solution.truncation_bound,
        'runtime_seconds': runtime,
    })


@dataclass(frozen=True)
class JumpBudgetEntry:
    jumps: int
    cost: float
    partition: GridPartition


def minimize_with_jump_budget(g: DiscreteSignal, max_jumps: int, mu: float,
                              table: IntervalCostTable | None = None) -> list[JumpBudgetEntry]:
    """ For every j <= max_jumps the best fixed-partition cost among partitions with exactly j jumps. """
    if max_jumps < 0:
        raise ArgumentError(f"Jump budget must be nonnegative, got {max_jumps}")
    table = build_cost_table(g, mu) if table is None else table
    n = g.n
    budget = min(max_jumps, n - 1)

    costs = np.full((budget + 1, n + 1), np.inf)
    previous = np.zeros((budget + 1, n + 1), dtype=int)
    for k in range(1, n + 1):
        costs[0, k] = table.cost(0, k)
    for r in range(1, budget + 1):
        for k in range(r + 1, n + 1):
            starts = np.arange(r, k)
            values = costs[r - 1, starts] + table.column(k, starts)
            choice = int(np.argmin(values))
            costs[r, k] = values[choice]
            previous[r, k] = starts[choice]

    entries = []
    for r in range(budget + 1):
        indices = [n]
        for level in range(r, 0, -1):
            indices.append(int(previous[level, indices[-1]]))
        indices.append(0)
        entries.append(JumpBudgetEntry(r, float(costs[r, n]), GridPartition(g.grid, tuple(reversed(indices)))))
    return entries


def gamma_path(g: DiscreteSignal, mu: float, gammas: Sequence[float]) -> list[SegmentationResult]:
    """ minimize_dp over a list of gamma values sharing one cost table. """
    table = build_cost_table(g, mu)
    return [minimize_dp(g, gamma, mu, table=table) for gamma in gammas]
