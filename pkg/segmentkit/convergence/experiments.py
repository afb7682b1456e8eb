from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from segmentkit.errors import ArgumentError
from segmentkit.events import SweepFinishedEvent, TrajectoryStepEvent, event_manager
from segmentkit.functionals import ParameterPoint, bond_penalties, eval_distance, l2_distance
from segmentkit.grid import ContinuousSignal, discretize, heaviside, projection_error
from segmentkit.logger import log
from segmentkit.optimize import SegmentationResult, minimize_dp, minimize_ms_grid
from segmentkit.partitions import GridPartition, Partition, edges_to_partition, grid_partition_of, hausdorff_distance
from segmentkit.settings import settings
from segmentkit.solvers import (
    continuous_lipschitz_limit,
    partition_solver_continuous,
    partition_solver_discrete,
    solver_lipschitz_bound,
)
from segmentkit.convergence.trajectory import ConvergenceReport, LimitConfig, Trajectory, Verdict, tail_verdict


def minimize_at(g: ContinuousSignal, q: ParameterPoint, config: LimitConfig, nref: int | None = None) -> SegmentationResult:
    """ Global minimizer of the functional selected by q: DP on the grid or grid-restricted continuous DP. """
    if q.is_discrete:
        return minimize_dp(discretize(g, q.n), q.gamma, q.mu)
    return minimize_ms_grid(g, q.gamma, q.mu, config.nref if nref is None else nref, config.modes)


def run_trajectory(g: ContinuousSignal, trajectory: Trajectory, config: LimitConfig | None = None) -> ConvergenceReport:
    """ Minimize at every step and measure L2 and Hausdorff distances to the limit minimizer. """
    config = LimitConfig.from_settings() if config is None else config
    limit = minimize_at(g, trajectory.limit, config)

    metadata = {
        'trajectory': trajectory.to_json(),
        'limit_partition': limit.partition.to_json(),
        'limit_objective': limit.objective.total,
        'signal_norm': g.norm(),
    }
    if not trajectory.limit.is_discrete:
        check = minimize_at(g, trajectory.limit, config, nref=config.nref_check)
        stable = hausdorff_distance(check.partition, limit.partition) <= 1.0 / config.nref_check + 1e-12
        metadata.update({'nref': config.nref, 'nref_check': config.nref_check, 'limit_stable': stable})
        if not stable:
            log.warning(f"Limit partition of '{trajectory.name}' changes between candidate grids "
                        f"{config.nref_check} and {config.nref}")

    with ThreadPoolExecutor(max_workers=config.workers, thread_name_prefix="trajectory") as executor:
        results = list(executor.map(lambda q: minimize_at(g, q, config), trajectory.steps))

    records = []
    for index, (q, result) in enumerate(zip(trajectory.steps, results)):
        distance = l2_distance(result.solution, limit.solution)
        hausdorff = hausdorff_distance(result.partition, limit.partition)
        records.append({
            'index': index,
            'n': q.n,
            'parameters': q.to_json(),
            'objective': result.objective.total,
            'partition': list(result.partition.points),
            'norm': result.solution.norm(),
            'distance': distance,
            'hausdorff': hausdorff,
        })
        log.debug(f"{trajectory.name}[{index}]: distance {distance:.3g}, hausdorff {hausdorff:.3g}")
        event_manager.publish(TrajectoryStepEvent(index, q.gamma, q.mu, q.t, distance, hausdorff))

    verdict = tail_verdict([r['distance'] for r in records], config.tolerance, config.tail_slack, config.tail_length)
    if records[-1]['hausdorff'] >= config.hausdorff_tolerance:
        verdict.passed = False
        verdict.reasons.append(f"final partition distance {records[-1]['hausdorff']:.3g} "
                               f"not below {config.hausdorff_tolerance:.3g}")
    bound = g.norm() + 1e-9
    if any(r['norm'] > bound for r in records):
        verdict.passed = False
        verdict.reasons.append(f"a minimizer norm exceeds ||g|| = {g.norm():.6g}")
    verdict.tolerances['hausdorff'] = config.hausdorff_tolerance

    log.info(f"Trajectory '{trajectory.name}': {'passed' if verdict.passed else 'FAILED'} "
             f"(final distance {verdict.final_distance:.3g})")
    event_manager.publish(SweepFinishedEvent(trajectory.name, verdict.passed, verdict.final_distance))
    return ConvergenceReport(trajectory.name, records, verdict, metadata)


def _decreasing_verdict(values: Sequence[float], tolerance: float, floor: float = 1e-12) -> Verdict:
    """ Strictly decreasing (values already below floor count as settled) and final below tolerance. """
    reasons = []
    for before, after in zip(values, values[1:]):
        if not (after < before or after <= floor):
            reasons.append(f"no decrease from {before:.3g} to {after:.3g}")
    if values[-1] >= tolerance:
        reasons.append(f"final value {values[-1]:.3g} not below {tolerance}")
    return Verdict(not reasons, reasons, float(values[-1]), {'tolerance': tolerance})


def solver_convergence(g: ContinuousSignal, p: Partition, mu: float, n_list: Sequence[int],
                       modes: int | None = None, tolerance: float | None = None) -> ConvergenceReport:
    """ ||embed(f*_n) - f*|| between discrete partition solutions and the continuous one. """
    tolerance = settings['convergence.tolerance'] if tolerance is None else tolerance
    grid_partitions = [grid_partition_of(p, n) for n in n_list]
    limit = partition_solver_continuous(g, p, mu, modes)

    records = []
    for n, grid_partition in zip(n_list, grid_partitions):
        solution = partition_solver_discrete(discretize(g, n), grid_partition, mu)
        records.append({'n': n, 'distance': l2_distance(solution, limit)})
        log.debug(f"Solver convergence n={n}: {records[-1]['distance']:.3g}")

    verdict = _decreasing_verdict([r['distance'] for r in records], tolerance)
    return ConvergenceReport('solver', records, verdict, {'partition': p.to_json(), 'mu': mu})


def _per_n(value: float | Sequence[float], count: int, name: str) -> list[float]:
    if np.isscalar(value):
        return [float(value)] * count
    values = [float(v) for v in value]
    if len(values) != count:
        raise ArgumentError(f"{name} needs one value per n ({count}), got {len(values)}")
    return values


def penalty_value(f: ContinuousSignal, gamma: float, mu: float, n: int) -> float:
    """ Sum over bonds of min{(n/mu^2) diff^2, gamma} at the cell averages of f. """
    samples = discretize(f, n)
    if mu == 0:
        return gamma * float(np.count_nonzero(np.diff(samples.values)))
    return float(np.sum(np.minimum(bond_penalties(samples, mu), gamma)))


def penalty_limit(f: ContinuousSignal, gamma: float, mu: float) -> float:
    """ gamma j(f) + mu^-2 integral |f'|^2; infinite for mu = 0 unless f is piecewise constant. """
    jumps = len(f.discontinuities())
    if mu == 0:
        return gamma * jumps if f.is_piecewise_constant() else float('inf')
    return gamma * jumps + f.derivative_energy() / mu ** 2


def penalty_gamma_check(f: ContinuousSignal, gamma: float | Sequence[float], mu: float | Sequence[float],
                        n_list: Sequence[int], relative_tolerance: float = 0.05,
                        gamma_limit: float | None = None, mu_limit: float | None = None) -> ConvergenceReport:
    """ Penalty of the cell averages against gamma j(f) + mu^-2 integral |f'|^2, from above and below.

    Jumps of f should sit on grid points of every n used (dyadic n for jumps at dyadic positions);
    a jump inside a cell is split over two bonds and is charged twice.
    """
    gammas = _per_n(gamma, len(n_list), 'gamma')
    mus = _per_n(mu, len(n_list), 'mu')
    gamma_limit = gammas[-1] if gamma_limit is None else gamma_limit
    mu_limit = mus[-1] if mu_limit is None else mu_limit
    bound = penalty_limit(f, gamma_limit, mu_limit)

    records = [{'n': n, 'gamma': gamma_n, 'mu': mu_n, 'penalty': penalty_value(f, gamma_n, mu_n, n)}
               for n, gamma_n, mu_n in zip(n_list, gammas, mus)]

    final = records[-1]['penalty']
    reasons = []
    if final > bound * (1.0 + relative_tolerance) + 1e-12:
        reasons.append(f"penalty {final:.6g} exceeds the limit {bound:.6g}")
    if final < bound * (1.0 - relative_tolerance) - 1e-12:
        reasons.append(f"penalty {final:.6g} falls short of the limit {bound:.6g}")
    verdict = Verdict(not reasons, reasons, abs(final - bound), {'relative': relative_tolerance})
    return ConvergenceReport('penalty', records, verdict, {'limit': bound})


def lipschitz_sweep(g: ContinuousSignal, partitions: Sequence[GridPartition | Partition],
                    mu_grid: Sequence[float]) -> ConvergenceReport:
    """ Observed ||f*(mu) - f*(mu')|| against bound * |mu^2 - mu'^2| for every pair of mu values. """
    records = []
    for p in partitions:
        if isinstance(p, GridPartition):
            samples = discretize(g, p.n)
            solutions = [partition_solver_discrete(samples, p, mu) for mu in mu_grid]
            longest = float(np.max(p.block_lengths())) / p.n
        else:
            solutions = [partition_solver_continuous(g, p, mu) for mu in mu_grid]
            longest = float(np.max(np.diff(p.points)))

        bound = solver_lipschitz_bound(p, g)
        worst = 0.0
        for (i, first), (j, second) in itertools.combinations(enumerate(solutions), 2):
            distance = l2_distance(first, second)
            allowed = bound * abs(mu_grid[i] ** 2 - mu_grid[j] ** 2)
            if allowed > 0:
                worst = max(worst, distance / allowed)
            elif distance > 1e-12:
                worst = float('inf')
        records.append({
            'n': p.n if isinstance(p, GridPartition) else None,
            'bound': bound,
            'limit_bound': continuous_lipschitz_limit(g, longest),
            'max_ratio': worst,
        })

    reasons = [f"ratio {r['max_ratio']:.6g} above 1 for n={r['n']}" for r in records if r['max_ratio'] > 1.0 + 1e-9]
    for record in records:
        if record['n'] is not None and record['limit_bound'] > 0:
            factor = record['bound'] / record['limit_bound']
            if not 0.5 <= factor <= 2.0:
                reasons.append(f"bound for n={record['n']} is {factor:.3g} times the continuous limit")
    worst_ratio = max((r['max_ratio'] for r in records), default=0.0)
    return ConvergenceReport('lipschitz', records, Verdict(not reasons, reasons, worst_ratio), {'mu_grid': list(mu_grid)})


def distance_convergence(f: ContinuousSignal, g: ContinuousSignal, n_list: Sequence[int],
                         tolerance: float | None = None) -> ConvergenceReport:
    """ Discrete distances of cell averages against the continuous distance. """
    tolerance = settings['convergence.tolerance'] if tolerance is None else tolerance
    exact = (f - g).norm2()
    records = []
    for n in n_list:
        value = eval_distance(discretize(f, n), discretize(g, n), 1.0 / n)
        records.append({'n': n, 'distance': value, 'error': abs(value - exact)})

    errors = [r['error'] for r in records]
    reasons = [f"error grows from {a:.3g} to {b:.3g}" for a, b in zip(errors, errors[1:]) if b > a + 1e-15]
    if errors[-1] >= tolerance:
        reasons.append(f"final error {errors[-1]:.3g} not below {tolerance}")
    return ConvergenceReport('distance', records, Verdict(not reasons, reasons, errors[-1]), {'exact': exact})


def random_grid_partition(rng: np.random.Generator, n: int) -> GridPartition:
    density = rng.uniform(0.0, 1.0)
    return edges_to_partition((rng.uniform(size=n - 1) < density).astype(int), n)


def heaviside_structure(a_values: Sequence[float], n_list: Sequence[int], trials: int = 100,
                        seed: int = 0, max_points: int = 6) -> ConvergenceReport:
    """ Jump points of partition solutions for step signals over random partitions and mu. """
    rng = np.random.default_rng(seed)
    records = []
    for a in a_values:
        signal = heaviside(a)
        for n in n_list:
            samples = discretize(signal, n)
            largest = 0
            for _ in range(trials):
                p = random_grid_partition(rng, n)
                mu = 0.0 if rng.uniform() < 0.2 else float(rng.uniform(0.1, 10.0))
                solution = partition_solver_discrete(samples, p, mu)
                largest = max(largest, len(solution.jump_partition()))
            records.append({'a': a, 'n': n, 'max_points': largest})

    reasons = [f"{r['max_points']} points for a={r['a']}, n={r['n']}" for r in records if r['max_points'] > max_points]
    return ConvergenceReport('heaviside', records, Verdict(not reasons, reasons),
                             {'trials': trials, 'seed': seed})


def projection_convergence(g: ContinuousSignal, exponents: Sequence[int],
                           tolerance: float | None = None) -> ConvergenceReport:
    """ ||g - embed(discretize(g, 2^j))|| along j. """
    tolerance = settings['convergence.tolerance'] if tolerance is None else tolerance
    records = [{'n': 2 ** j, 'error': projection_error(g, 2 ** j)} for j in exponents]
    errors = [r['error'] for r in records]
    reasons = [f"error grows from {a:.3g} to {b:.3g}" for a, b in zip(errors, errors[1:]) if b > a + 1e-12]
    if errors[-1] >= tolerance:
        reasons.append(f"final error {errors[-1]:.3g} not below {tolerance}")
    return ConvergenceReport('projection', records, Verdict(not reasons, reasons, errors[-1]))


def bundled_signal() -> ContinuousSignal:
    """ Ramp, jump, falling ramp, jump, plateau. """
    return ContinuousSignal.from_pieces([
        [0.0, 0.375, 0.2, 0.5],
        [0.375, 0.75, 1.0, -0.3],
        [0.75, 1.0, 0.1],
    ])


def bundled_trajectories() -> dict[str, tuple[ContinuousSignal, Trajectory]]:
    """ gamma_s -> gamma and mu_s -> mu on a fixed grid, and t_s = 2^-s -> 0 for a step signal. """
    n, gamma, mu = 64, 0.02, 2.0
    signal = bundled_signal()
    return {
        'gamma': (signal, Trajectory(
            tuple(ParameterPoint(gamma * (1.0 + 4.0 ** -s), mu, n) for s in range(1, 11)),
            ParameterPoint(gamma, mu, n), 'gamma')),
        'mu': (signal, Trajectory(
            tuple(ParameterPoint(gamma, mu + 2.0 ** -s, n) for s in range(1, 11)),
            ParameterPoint(gamma, mu, n), 'mu')),
        't': (heaviside(0.5), Trajectory(
            tuple(ParameterPoint(0.1, 0.0, 2 ** s) for s in range(1, 11)),
            ParameterPoint(0.1, 0.0), 't')),
    }
