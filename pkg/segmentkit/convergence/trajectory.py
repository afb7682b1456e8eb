from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from segmentkit.errors import ArgumentError, StructuralError
from segmentkit.functionals import ParameterPoint
from segmentkit.grid import ContinuousSignal
from segmentkit.settings import settings

settings.register('convergence.tolerance', 1e-2, "Final distances must fall below this", minimum=0.0)
settings.register('convergence.tail_slack', 0.10, "Allowed relative increase between tail distances", minimum=0.0)
settings.register('convergence.tail_length', 3, "Number of final steps checked by a verdict", minimum=1)
settings.register('convergence.hausdorff_tolerance', 1.0 / 64, "Final partition distance must fall below this",
                  minimum=0.0)
settings.register('convergence.limit_nref', 256, "Candidate grid for continuous limit minimizers", minimum=1)
settings.register('convergence.limit_nref_check', 128, "Coarser candidate grid used to check the limit", minimum=1)
settings.register('convergence.workers', 4, "Threads minimizing trajectory steps", minimum=1)


@dataclass(frozen=True)
class Trajectory:
    """ Parameter points q_s approaching a declared limit q. """
    steps: tuple[ParameterPoint, ...]
    limit: ParameterPoint
    name: str = "trajectory"

    def __post_init__(self):
        object.__setattr__(self, 'steps', tuple(self.steps))
        if not self.steps:
            raise ArgumentError(f"Trajectory '{self.name}' has no steps")

        for component in ('gamma', 'mu', 't'):
            target = getattr(self.limit, component)
            distances = np.array([abs(getattr(q, component) - target) for q in self.steps])
            if np.any(np.diff(distances) > 1e-15):
                raise ArgumentError(f"Trajectory '{self.name}': {component} does not approach {target} monotonically")
            if distances[-1] > 0 and distances[-1] >= distances[0]:
                raise ArgumentError(f"Trajectory '{self.name}': {component} stays {distances[-1]:.3g} away "
                                    f"from the declared limit {target}")

        if self.limit.is_discrete and self.steps[-1].n != self.limit.n:
            raise ArgumentError(f"Trajectory '{self.name}': a limit at t = 1/{self.limit.n} must be reached exactly")

    def __len__(self) -> int:
        return len(self.steps)

    def to_json(self) -> dict:
        return {
            'name': self.name,
            'steps': [[q.gamma, q.mu, q.n or 0] for q in self.steps],
            'limit': [self.limit.gamma, self.limit.mu, self.limit.n or 0],
        }


def _point(row: Sequence[float]) -> ParameterPoint:
    if len(row) != 3:
        raise StructuralError(f"Parameter point must be [gamma, mu, n_or_0], got {row}")
    gamma, mu, n = row
    return ParameterPoint(gamma, mu, None if n == 0 else n)


def load_trajectory(document: dict) -> tuple[ContinuousSignal, Trajectory]:
    """ Read {"signal": {...pieces...}, "steps": [[gamma, mu, n_or_0], ...], "limit": [...]}. """
    for key in ('signal', 'steps', 'limit'):
        if key not in document:
            raise StructuralError(f"Trajectory document has no '{key}'")
    signal = ContinuousSignal.from_json(document['signal'])
    steps = tuple(_point(row) for row in document['steps'])
    return signal, Trajectory(steps, _point(document['limit']), document.get('name', 'trajectory'))


@dataclass(frozen=True)
class LimitConfig:
    nref: int
    nref_check: int
    modes: int
    tolerance: float
    tail_slack: float
    tail_length: int
    hausdorff_tolerance: float
    workers: int

    @classmethod
    def from_settings(cls, **overrides) -> LimitConfig:
        values = {
            'nref': settings['convergence.limit_nref'],
            'nref_check': settings['convergence.limit_nref_check'],
            'modes': settings['solvers.spectral.modes'],
            'tolerance': settings['convergence.tolerance'],
            'tail_slack': settings['convergence.tail_slack'],
            'tail_length': settings['convergence.tail_length'],
            'hausdorff_tolerance': settings['convergence.hausdorff_tolerance'],
            'workers': settings['convergence.workers'],
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass
class Verdict:
    passed: bool
    reasons: list[str] = field(default_factory=list)
    final_distance: float | None = None
    tolerances: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            'passed': self.passed,
            'reasons': self.reasons,
            'final_distance': self.final_distance,
            'tolerances': self.tolerances,
        }


@dataclass
class ConvergenceReport:
    name: str
    records: list[dict]
    verdict: Verdict
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict.passed

    def column(self, key: str) -> list:
        return [record[key] for record in self.records]

    def to_json(self) -> dict:
        return {
            'name': self.name,
            'metadata': self.metadata,
            'records': self.records,
            'verdict': self.verdict.to_json(),
        }


def tail_verdict(distances: Sequence[float], tolerance: float, slack: float, length: int) -> Verdict:
    """ Pass when the last `length` distances are below tolerance and none grows by more than slack. """
    tail = list(distances[-length:])
    reasons = []
    if any(d >= tolerance for d in tail):
        reasons.append(f"final distances {['%.3g' % d for d in tail]} not below {tolerance}")
    for before, after in zip(tail, tail[1:]):
        if after > (1.0 + slack) * before + 1e-12:
            reasons.append(f"tail distance grows from {before:.3g} to {after:.3g}")
    return Verdict(not reasons, reasons, float(tail[-1]) if tail else None,
                   {'tolerance': tolerance, 'tail_slack': slack, 'tail_length': length})
