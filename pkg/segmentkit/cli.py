"""Command-line surface.

Exit codes: 0 success, 2 argument error, 3 resource cap, 4 convergence verdict failed,
5 dynamic program and brute force disagree.

Sample files hold one cell average per line (optional header "value"): the n lines are read
as the averages of the signal over the n cells of [0, 1], not as point evaluations.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from segmentkit.errors import ArgumentError, ResourceError, RoutingError, StructuralError
from segmentkit.logger import log
import segmentkit.persistent_storage as persistent_storage

EXIT_OK = 0
EXIT_ARGUMENT = 2
EXIT_RESOURCE = 3
EXIT_VERDICT = 4
EXIT_MISMATCH = 5

MODELS = ('auto', 'bz', 'potts', 'ms')
ORACLE_GAMMAS = (0.0, 0.01, 0.1, 1.0, 10.0)
ORACLE_MUS = (0.0, 0.5, 1.0, 5.0)


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None = None
    gamma: float | None = None
    mu: float | None = None
    n: int | None = None
    t: float | None = None
    model: str = 'auto'
    output: str | None = None
    nref: int | None = None
    modes: int | None = None
    seed: int = 0
    cap: int | None = None
    partition: str | None = None
    instances: int = 200
    trajectory: str | None = None
    tolerance: float | None = None
    host: str = '127.0.0.1'
    port: int = 5000

    def __post_init__(self):
        for name in ('gamma', 'mu', 't', 'tolerance'):
            value = getattr(self, name)
            if value is not None and (not math.isfinite(value) or value < 0):
                raise ArgumentError(f"--{name} must be finite and nonnegative, got {value}")
        for name in ('n', 'nref', 'modes', 'cap', 'instances'):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ArgumentError(f"--{name} must be a positive integer, got {value}")
        if self.model not in MODELS:
            raise ArgumentError(f"--model must be one of {', '.join(MODELS)}, got {self.model!r}")
        if self.n is not None and self.t is not None and self.t != 0 and abs(self.t * self.n - 1.0) > 1e-12:
            raise ArgumentError(f"--n {self.n} contradicts --t {self.t}")
        if self.t is not None and self.t != 0 and self.t > 1:
            raise ArgumentError(f"--t must be 0 or 1/n, got {self.t}")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        fields = cls.__dataclass_fields__
        return cls(**{key: value for key, value in vars(args).items() if key in fields and value is not None})

    @property
    def grid_size(self) -> int | None:
        """ n from --n or --t = 1/n; None for t = 0 or when neither is given. """
        if self.n is not None:
            return self.n
        if self.t:
            n = round(1.0 / self.t)
            if abs(n * self.t - 1.0) > 1e-12:
                raise ArgumentError(f"--t {self.t} is not of the form 1/n")
            return n
        return None


# -- input -----------------------------------------------------------------------------


def read_samples(path: str):
    """ One sample per line; blank lines are skipped and a first line 'value' is a header. """
    from segmentkit.grid import DiscreteSignal

    values = []
    try:
        with open(path, 'r') as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise ArgumentError(f"Cannot read {path}: {e.strerror}") from e

    for number, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            continue
        if not values and text.lower() in ('value', '"value"'):
            continue
        try:
            value = float(text)
        except ValueError:
            raise StructuralError(f"{path}:{number}: not a number: {text!r}") from None
        if not math.isfinite(value):
            raise StructuralError(f"{path}:{number}: sample is not finite: {text!r}")
        values.append(value)

    if not values:
        raise StructuralError(f"{path} contains no samples")
    return DiscreteSignal.from_values(values)


def read_signal(path: str | None):
    """ A piecewise polynomial from a .json document, samples from anything else. """
    from segmentkit.grid import ContinuousSignal

    if path is None:
        raise ArgumentError("--input is required")
    if not path.endswith('.json'):
        return read_samples(path)
    try:
        with open(path, 'r') as f:
            document = json.load(f)
    except OSError as e:
        raise ArgumentError(f"Cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise StructuralError(f"{path}:{e.lineno}: {e.msg}") from e
    if not isinstance(document, dict):
        raise StructuralError(f"{path}: expected a JSON object, got {type(document).__name__}")
    if document.get('format', 1) != 1:
        raise StructuralError(f"{path}: unsupported format {document.get('format')!r}")
    return ContinuousSignal.from_json(document)


def parse_partition(text: str | None, n: int | None):
    """ Comma-separated grid indices (integers ending at n) or real points in [0, 1]. """
    from segmentkit.grid import Grid
    from segmentkit.partitions import GridPartition, grid_partition_of, partition_of

    if not text:
        raise ArgumentError("--partition is required")
    tokens = [token.strip() for token in text.split(',') if token.strip()]
    try:
        numbers = [float(token) for token in tokens]
    except ValueError as e:
        raise ArgumentError(f"--partition must be comma-separated numbers, got {text!r}") from e

    integral = all(token.lstrip('+-').isdigit() for token in tokens)
    if n is not None and integral and numbers and int(numbers[-1]) == n:
        return GridPartition(Grid(n), tuple(int(x) for x in numbers))
    points = partition_of(numbers)
    return points if n is None else grid_partition_of(points, n)


# -- commands --------------------------------------------------------------------------


def _require_gamma(cfg: RunConfig) -> float:
    if cfg.gamma is None:
        raise ArgumentError("--gamma is required")
    return cfg.gamma


def _check_model(cfg: RunConfig, mu: float, continuous: bool):
    if cfg.model == 'bz' and mu == 0:
        raise RoutingError("--model bz needs mu > 0; mu = 0 is the Potts model")
    if cfg.model == 'potts' and mu != 0:
        raise ArgumentError(f"--model potts needs mu = 0, got {mu}")
    if cfg.model == 'ms' and not continuous:
        raise ArgumentError("--model ms needs a piecewise input with t = 0")
    if cfg.model in ('bz', 'potts') and continuous:
        raise ArgumentError(f"--model {cfg.model} needs a grid: give --n or --t 1/n")


def _grid_signal(signal, n: int | None):
    """ Samples on the requested grid: piecewise inputs are averaged, sample inputs coarsened. """
    from segmentkit.grid import ContinuousSignal, coarsen, discretize

    if isinstance(signal, ContinuousSignal):
        return discretize(signal, n)
    if n is None or n == signal.n:
        return signal
    return coarsen(signal, n)


def segment_document(signal, cfg: RunConfig) -> dict:
    """ Global minimizer of the selected functional as a result document. """
    from segmentkit import documents
    from segmentkit.grid import ContinuousSignal
    from segmentkit.optimize import minimize_dp, minimize_ms_grid
    from segmentkit.settings import settings

    gamma = _require_gamma(cfg)
    mu = 0.0 if cfg.mu is None else cfg.mu
    if cfg.t == 0 and not isinstance(signal, ContinuousSignal):
        raise ArgumentError("t = 0 needs a piecewise input")
    n = cfg.grid_size
    continuous = isinstance(signal, ContinuousSignal) and n is None
    _check_model(cfg, mu, continuous)

    started = time.perf_counter()
    if continuous:
        nref = settings['convergence.limit_nref'] if cfg.nref is None else cfg.nref
        result = minimize_ms_grid(signal, gamma, mu, nref, cfg.modes, cap=cfg.cap)
    else:
        result = minimize_dp(_grid_signal(signal, n), gamma, mu, cap=cfg.cap)
    runtime = time.perf_counter() - started

    log.info(f"Segmented with {result.parameters.model}: {result.jumps} jumps, objective {result.objective.total:.6g}")
    payload = documents.solution_payload('segment', signal, result.solution, result.parameters,
                                         result.objective, result.diagnostics)
    return documents.document(payload, runtime)


def solve_partition_document(signal, cfg: RunConfig) -> dict:
    """ Partition solver output for a given partition as a result document. """
    from segmentkit import documents
    from segmentkit.functionals import ParameterPoint, family_eval, fixed_partition_objective
    from segmentkit.grid import ContinuousSignal
    from segmentkit.solvers import partition_solver_continuous, partition_solver_discrete

    gamma = 0.0 if cfg.gamma is None else cfg.gamma
    mu = 0.0 if cfg.mu is None else cfg.mu
    n = cfg.grid_size
    continuous = isinstance(signal, ContinuousSignal) and n is None

    started = time.perf_counter()
    if continuous:
        p = parse_partition(cfg.partition, None)
        solution = partition_solver_continuous(signal, p, mu, cfg.modes)
        parameters = ParameterPoint.continuous(gamma, mu)
        objective = family_eval(parameters, solution, signal)
        diagnostics = {'reduced_cost': solution.reduced_cost(), 'truncation_bound': solution.truncation_bound,
                       'modes': solution.modes}
    else:
        samples = _grid_signal(signal, n)
        p = parse_partition(cfg.partition, samples.n)
        solution = partition_solver_discrete(samples, p, mu)
        parameters = ParameterPoint.discrete(gamma, mu, samples.n)
        objective = family_eval(parameters, solution, samples)
        diagnostics = {'reduced_cost': solution.reduced_cost(),
                       'fixed_partition_objective': fixed_partition_objective(solution, samples, p, mu)}
    runtime = time.perf_counter() - started

    payload = documents.solution_payload('solve-partition', signal, solution, parameters, objective, diagnostics)
    return documents.document(payload, runtime)


def oracle_instances(cfg: RunConfig) -> list[tuple]:
    """ (signal, gamma, mu) triples: the given input, or seeded random instances. """
    from segmentkit.grid import DiscreteSignal
    from segmentkit.settings import settings

    cap = settings['optimize.cap.brute_force'] if cfg.cap is None else cfg.cap
    if cfg.input is not None:
        signal = read_samples(cfg.input)
        if signal.n > cap:
            raise ArgumentError(f"The oracle enumerates at most n = {cap}, got {signal.n}")
        return [(signal, _require_gamma(cfg), 0.0 if cfg.mu is None else cfg.mu)]
    if cfg.n is not None and cfg.n > cap:
        raise ArgumentError(f"The oracle enumerates at most n = {cap}, got {cfg.n}")

    rng = np.random.default_rng(cfg.seed)
    instances = []
    for _ in range(cfg.instances):
        n = cfg.n if cfg.n is not None else int(rng.integers(4, 13))
        levels = rng.integers(0, 3, size=n).astype(float)
        values = np.round(levels + 0.2 * rng.standard_normal(n), 6)
        gamma = cfg.gamma if cfg.gamma is not None else float(rng.choice(ORACLE_GAMMAS))
        mu = cfg.mu if cfg.mu is not None else float(rng.choice(ORACLE_MUS))
        instances.append((DiscreteSignal.from_values(values), gamma, mu))
    return instances


def oracle_document(cfg: RunConfig) -> dict:
    """ Dynamic program against brute-force enumeration on every instance. """
    from segmentkit import documents
    from segmentkit.events import OracleMismatchEvent, event_manager
    from segmentkit.optimize import brute_force_min, minimize_dp
    from segmentkit.settings import settings

    started = time.perf_counter()
    instances = oracle_instances(cfg)
    cap = max(settings['optimize.cap.brute_force'], max(signal.n for signal, _, _ in instances))
    mismatches = []
    with settings.override(optimize__cap__brute_force=cap):
        for index, (signal, gamma, mu) in enumerate(instances):
            fast = minimize_dp(signal, gamma, mu)
            slow = brute_force_min(signal, gamma, mu)
            scale = 1e-9 * (1.0 + abs(slow.objective.total))
            if fast.partition.indices == slow.partition.indices and \
                    abs(fast.objective.total - slow.objective.total) <= scale:
                continue
            instance = {
                'index': index,
                'samples': signal.values.tolist(),
                'gamma': gamma,
                'mu': mu,
                'dp': {'indices': list(fast.partition.indices), 'objective': fast.objective.total},
                'brute_force': {'indices': list(slow.partition.indices), 'objective': slow.objective.total},
            }
            log.error(f"Oracle mismatch on instance {index}: dp {fast.partition.indices} "
                      f"vs brute force {slow.partition.indices}")
            event_manager.publish(OracleMismatchEvent(instance))
            mismatches.append(instance)

    log.info(f"Oracle: {len(instances) - len(mismatches)} of {len(instances)} instances agree")
    payload = {
        'command': 'oracle',
        'seed': cfg.seed,
        'instances': len(instances),
        'agreed': len(instances) - len(mismatches),
        'mismatches': mismatches,
    }
    return documents.document(payload, time.perf_counter() - started)


def sweep_report(cfg: RunConfig):
    """ Run a bundled trajectory ('gamma', 'mu', 't'), the bundled solver check ('solver') or a trajectory file. """
    from segmentkit.convergence import (
        LimitConfig,
        bundled_trajectories,
        load_trajectory,
        run_trajectory,
        solver_convergence,
    )
    from segmentkit.grid import ContinuousSignal
    from segmentkit.partitions import Partition

    name = cfg.trajectory or cfg.input
    if name is None:
        raise ArgumentError("--trajectory is required")

    if name == 'solver':
        n_list = [8 * 2 ** k for k in range(8)]
        tolerance = 1e-3 if cfg.tolerance is None else cfg.tolerance
        return solver_convergence(ContinuousSignal.polynomial([0.0, 1.0]), Partition((0.0, 1.0)),
                                  2.0 if cfg.mu is None else cfg.mu, n_list, cfg.modes, tolerance)

    bundled = bundled_trajectories()
    if name in bundled:
        signal, trajectory = bundled[name]
    else:
        try:
            with open(name, 'r') as f:
                document = json.load(f)
        except OSError as e:
            raise ArgumentError(f"'{name}' is neither a bundled trajectory nor a readable file: {e.strerror}") from e
        except json.JSONDecodeError as e:
            raise StructuralError(f"{name}:{e.lineno}: {e.msg}") from e
        signal, trajectory = load_trajectory(document)

    config = LimitConfig.from_settings(nref=cfg.nref, modes=cfg.modes, tolerance=cfg.tolerance)
    return run_trajectory(signal, trajectory, config)


def report_rows(doc: dict) -> tuple[str, list[tuple[float, float]]]:
    """ ('trace', step-function trace) for results, ('curve', (n, distance)) for sweeps. """
    from segmentkit import documents
    from segmentkit.solvers import DiscreteSolution

    payload = doc['payload']
    command = payload.get('command')
    if command == 'sweep':
        # continuous steps (n is None) sit at n = inf
        records = payload['report']['records']
        return 'curve', [(math.inf if record['n'] is None else record['n'], record['distance'])
                         for record in records]

    if command not in ('segment', 'solve-partition'):
        raise StructuralError(f"No report for a {command!r} document")
    solution = documents.solution_from_payload(payload)
    rows = []
    if isinstance(solution, DiscreteSolution):
        for k, value in enumerate(solution.values.tolist()):
            rows.append((k / solution.n, value))
            rows.append(((k + 1) / solution.n, value))
    else:
        for block in solution.blocks:
            xs = np.linspace(block.a, block.b, 65)
            rows.extend(zip(xs.tolist(), block.evaluate(xs).tolist()))
    return 'trace', rows


def report_paths(doc_path: str, output: str | None, kind: str) -> str:
    stem = output if output is not None else os.path.splitext(doc_path)[0]
    return f"{stem}.{kind}.tsv"


# -- command handlers ------------------------------------------------------------------


def cmd_segment(cfg: RunConfig) -> int:
    from segmentkit import documents
    documents.write(segment_document(read_signal(cfg.input), cfg), cfg.output)
    return EXIT_OK


def cmd_solve_partition(cfg: RunConfig) -> int:
    from segmentkit import documents
    documents.write(solve_partition_document(read_signal(cfg.input), cfg), cfg.output)
    return EXIT_OK


def cmd_oracle(cfg: RunConfig) -> int:
    from segmentkit import documents
    doc = oracle_document(cfg)
    documents.write(doc, cfg.output)
    return EXIT_OK if not doc['payload']['mismatches'] else EXIT_MISMATCH


def cmd_sweep(cfg: RunConfig) -> int:
    from segmentkit import documents
    from segmentkit.events import TrajectoryStepEvent, event_manager

    def progress(event: TrajectoryStepEvent):
        log.info(f"Step {event.index}: distance {event.distance:.3g}, hausdorff {event.hausdorff:.3g}")

    event_manager.subscribe(TrajectoryStepEvent, progress)
    started = time.perf_counter()
    try:
        report = sweep_report(cfg)
    finally:
        event_manager.flush()
        event_manager.unsubscribe(TrajectoryStepEvent, progress)

    doc = documents.document({'command': 'sweep', 'report': report.to_json()}, time.perf_counter() - started)
    documents.write(doc, cfg.output)
    if not report.passed:
        log.error(f"Sweep '{report.name}' failed: {'; '.join(report.verdict.reasons)}")
        return EXIT_VERDICT
    return EXIT_OK


def cmd_report(cfg: RunConfig) -> int:
    from segmentkit import documents

    if cfg.input is None:
        raise ArgumentError("--input is required")
    try:
        kind, rows = report_rows(documents.load_result(cfg.input))
    except (KeyError, TypeError) as e:
        raise StructuralError(f"{cfg.input} is not a complete result document: {e}") from e
    path = report_paths(cfg.input, cfg.output, kind)
    header = "x\tvalue" if kind == 'trace' else "n\tdistance"
    with open(path, 'w') as f:
        f.write(header + "\n")
        f.writelines(f"{x!r}\t{y!r}\n" for x, y in rows)
    log.info(f"Wrote {len(rows)} rows to {path}")
    return EXIT_OK


def cmd_serve(cfg: RunConfig) -> int:
    from segmentkit.api.api import app
    app.run(host=cfg.host, port=cfg.port, debug=False)
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    'segment': cmd_segment,
    'sweep': cmd_sweep,
    'oracle': cmd_oracle,
    'solve-partition': cmd_solve_partition,
    'report': cmd_report,
    'serve': cmd_serve,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--debug', action='store_true', default=None, help='Enable debug logging')
    common.add_argument('--persistent-storage-dir', type=str, default=None,
                        help='Directory holding settings.json and default outputs')

    parameters = argparse.ArgumentParser(add_help=False)
    parameters.add_argument('--input', type=str, help='Sample file (one value per line) or piecewise .json')
    parameters.add_argument('--gamma', type=float, help='Jump penalty')
    parameters.add_argument('--mu', type=float, help='Smoothness scale; 0 selects the Potts model')
    parameters.add_argument('--n', type=int, help='Grid size')
    parameters.add_argument('--t', type=float, help='Grid parameter: 0 for the continuous model, else 1/n')
    parameters.add_argument('--model', choices=MODELS, help='Functional to minimize')
    parameters.add_argument('--output', type=str, help='Output path (stdout when omitted)')
    parameters.add_argument('--nref', type=int, help='Candidate grid for continuous minimization')
    parameters.add_argument('--modes', type=int, help='Cosine modes per block')
    parameters.add_argument('--cap', type=int, help='Override the size cap')

    parser = argparse.ArgumentParser(prog="segmentkit", description="Exact 1D signal segmentation")
    commands = parser.add_subparsers(dest='command', required=True)

    commands.add_parser('segment', parents=[common, parameters], help='Globally minimize a functional')

    sweep = commands.add_parser('sweep', parents=[common, parameters], help='Run a convergence sweep')
    sweep.add_argument('--trajectory', type=str, help="Bundled name (gamma, mu, t, solver) or trajectory .json")
    sweep.add_argument('--tolerance', type=float, help='Final distance tolerance')

    oracle = commands.add_parser('oracle', parents=[common, parameters], help='Cross-check DP against brute force')
    oracle.add_argument('--seed', type=int, help='Seed for random instances')
    oracle.add_argument('--instances', type=int, help='Number of random instances')

    solve = commands.add_parser('solve-partition', parents=[common, parameters], help='Solve on a fixed partition')
    solve.add_argument('--partition', type=str, help='Comma-separated grid indices or real points')

    commands.add_parser('report', parents=[common, parameters], help='Write TSV traces from a result document')

    serve = commands.add_parser('serve', parents=[common], help='Serve the JSON API')
    serve.add_argument('--host', type=str, help='Interface to bind')
    serve.add_argument('--port', type=int, help='Port to run the web server on')
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.debug:
        log.setLevel(logging.DEBUG)

    if args.persistent_storage_dir:
        persistent_storage.set_persistent_storage_dir(args.persistent_storage_dir)
        from segmentkit.settings import settings
        settings.reload()
        log.info(f"Persistent storage directory set to: {args.persistent_storage_dir}")

    try:
        cfg = RunConfig.from_args(args)
        return COMMANDS[cfg.command](cfg)
    except ArgumentError as e:
        log.error(str(e))
        return EXIT_ARGUMENT
    except ResourceError as e:
        log.error(str(e))
        return EXIT_RESOURCE
