"""Versioned JSON result documents.

Every document has a "header" with run-dependent facts (timestamp, runtime, host) and a
deterministic "payload"; identical inputs produce byte-identical payloads.
"""
from __future__ import annotations

import datetime
import hashlib
import json
import os
import platform
import sys
from typing import Any

import numpy as np
import psutil

from segmentkit.errors import ArgumentError, StructuralError
from segmentkit.functionals import ObjectiveBreakdown, ParameterPoint, family_eval
from segmentkit.grid import ContinuousSignal, DiscreteSignal, coarsen, discretize
from segmentkit.logger import log
from segmentkit.partitions import GridPartition, Partition
from segmentkit.solvers import DiscreteSolution, PiecewiseSolution, SpectralBlock, SpectralSolution, cosine_moments

FORMAT = 1


def _json_default(value: object) -> object:
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def dumps(document: dict) -> str:
    return json.dumps(document, indent=4, default=_json_default)


def payload_bytes(document: dict) -> bytes:
    """ The deterministic part of a document, serialized. """
    return dumps(document['payload']).encode()


def digest(signal: DiscreteSignal | ContinuousSignal) -> str:
    if isinstance(signal, DiscreteSignal):
        data = np.ascontiguousarray(signal.values, dtype='<f8').tobytes()
    else:
        data = np.ascontiguousarray(np.column_stack((signal.breaks[:-1], signal.breaks[1:], signal.coeffs)),
                                    dtype='<f8').tobytes()
    return hashlib.sha256(data).hexdigest()


def describe_input(signal: DiscreteSignal | ContinuousSignal) -> dict:
    if isinstance(signal, DiscreteSignal):
        return {'kind': 'samples', 'n': signal.n, 'digest': digest(signal), 'samples': signal.values.tolist()}
    return {'kind': 'piecewise', 'digest': digest(signal), 'pieces': signal.to_json()['pieces']}


def header(runtime_seconds: float | None = None) -> dict:
    memory = psutil.virtual_memory()
    return {
        'created': datetime.datetime.now(datetime.timezone.utc).isoformat(),
        'runtime_seconds': runtime_seconds,
        'host': {
            'hostname': platform.node(),
            'python': platform.python_version(),
            'cpu_count': psutil.cpu_count(),
            'memory_total': memory.total,
        },
    }


def document(payload: dict, runtime_seconds: float | None = None) -> dict:
    return {'format': FORMAT, 'header': header(runtime_seconds), 'payload': payload}


def solution_payload(command: str, signal: DiscreteSignal | ContinuousSignal, solution: PiecewiseSolution,
                     parameters: ParameterPoint, objective: ObjectiveBreakdown,
                     diagnostics: dict | None = None) -> dict:
    partition = solution.partition
    payload: dict[str, Any] = {
        'command': command,
        'input': describe_input(signal),
        'parameters': parameters.to_json(),
        'partition': {
            'indices': list(partition.indices) if isinstance(partition, GridPartition) else None,
            'points': list(partition.points),
        },
        'solution': solution.to_json(),
        'objective': objective.to_json(),
    }
    if diagnostics:
        payload['diagnostics'] = {key: value for key, value in diagnostics.items() if key != 'runtime_seconds'}
    return payload


def write(doc: dict, path: str | None = None):
    """ Write to path, or to stdout when path is None. """
    text = dumps(doc) + "\n"
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, 'w') as f:
        f.write(text)
    log.info(f"Wrote {doc['payload'].get('command', 'result')} document to {path}")


def load_result(path: str) -> dict:
    try:
        with open(path, 'r') as f:
            doc = json.load(f)
    except OSError as e:
        raise ArgumentError(f"Cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise StructuralError(f"{path} is not a JSON document: {e}") from e
    if not isinstance(doc, dict) or 'payload' not in doc:
        raise StructuralError(f"{path} has no 'payload'")
    if doc.get('format') != FORMAT:
        raise StructuralError(f"{path} has format {doc.get('format')!r}, expected {FORMAT}")
    return doc


def signal_from_payload(payload: dict) -> DiscreteSignal | ContinuousSignal:
    source = payload['input']
    if source['kind'] == 'samples':
        return DiscreteSignal.from_values(source['samples'])
    if source['kind'] == 'piecewise':
        return ContinuousSignal.from_pieces(source['pieces'])
    raise StructuralError(f"Unknown input kind {source['kind']!r}")


def _parameters_from_payload(payload: dict) -> ParameterPoint:
    parameters = payload['parameters']
    return ParameterPoint(parameters['gamma'], parameters['mu'], parameters['n'])


def solution_from_payload(payload: dict) -> PiecewiseSolution:
    """ Rebuild the stored solution against the stored input, without solving again. """
    signal = signal_from_payload(payload)
    stored = payload['solution']
    mu = payload['parameters']['mu']

    if stored['kind'] == 'samples':
        n = len(stored['values'])
        if isinstance(signal, ContinuousSignal):
            signal = discretize(signal, n)
        elif signal.n != n:
            signal = coarsen(signal, n)
        partition = GridPartition(signal.grid, tuple(payload['partition']['indices']))
        return DiscreteSolution(partition, mu, signal, np.asarray(stored['values']))

    if stored['kind'] == 'cosine':
        if not isinstance(signal, ContinuousSignal):
            raise StructuralError("A cosine-series solution needs a piecewise input")
        blocks = []
        for block in stored['blocks']:
            a, b = block['interval']
            coefficients = np.asarray(block['coefficients'], dtype=float)
            moments = cosine_moments(signal, a, b, len(coefficients) - 1)
            blocks.append(SpectralBlock(a, b, coefficients, moments, signal.norm2_on(a, b)))
        return SpectralSolution(Partition(tuple(payload['partition']['points'])), mu, signal, tuple(blocks))

    raise StructuralError(f"Unknown solution kind {stored['kind']!r}")


def reevaluate(doc: dict) -> ObjectiveBreakdown:
    """ Objective of the stored solution, recomputed from the stored input and parameters. """
    payload = doc['payload']
    try:
        solution = solution_from_payload(payload)
        parameters = _parameters_from_payload(payload)
    except KeyError as e:
        raise StructuralError(f"Result payload has no {e}") from e
    return family_eval(parameters, solution, solution.signal)
