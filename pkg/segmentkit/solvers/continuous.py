from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from segmentkit.errors import ArgumentError, TruncationWarning
from segmentkit.grid import ContinuousSignal
from segmentkit.logger import log
from segmentkit.partitions import Partition, intervals
from segmentkit.settings import settings
from segmentkit.solvers.solution import PiecewiseSolution

settings.register('solvers.spectral.modes', 256, "Cosine modes per block in the continuous solver", minimum=1)
settings.register('solvers.spectral.tail_tolerance', 1e-14,
                  "Relative bound on the truncated solution energy before a warning", minimum=0.0)


def cosine_moments(g: ContinuousSignal, a: float, b: float, modes: int) -> np.ndarray:
    """ <g, phi_s> on (a, b) for s = 0..modes, with phi_0 = 1/sqrt(L), phi_s = sqrt(2/L) cos(s pi (x-a)/L).

    Integrals of polynomial times cosine are taken in closed form by repeated integration by parts.
    """
    length = b - a
    moments = np.zeros(modes + 1)

    value = g.constant_on(a, b)
    if value is not None:
        moments[0] = value * np.sqrt(length)
        return moments

    omega = np.arange(1, modes + 1) * np.pi / length
    rows, starts, ends = g.overlapping(a, b)
    for row, u, v in zip(rows, starts, ends):
        derivatives = [row]
        for _ in range(3):
            derivatives.append(P.polyder(derivatives[-1]) if len(derivatives[-1]) > 1 else np.zeros(1))
        at_u = [P.polyval(u, d) for d in derivatives]
        at_v = [P.polyval(v, d) for d in derivatives]

        def primitive(x: float, p: list[float]) -> np.ndarray:
            theta = omega * (x - a)
            sin, cos = np.sin(theta), np.cos(theta)
            return p[0] * sin / omega + p[1] * cos / omega ** 2 - p[2] * sin / omega ** 3 - p[3] * cos / omega ** 4

        moments[1:] += np.sqrt(2.0 / length) * (primitive(v, at_v) - primitive(u, at_u))
        antiderivative = P.polyint(row)
        moments[0] += (P.polyval(v, antiderivative) - P.polyval(u, antiderivative)) / np.sqrt(length)
    return moments


def filter_factors(mu: float, length: float, modes: int) -> np.ndarray:
    """ mu^2 / (mu^2 + (s pi / L)^2) for s = 0..modes. """
    wavenumbers = np.arange(modes + 1) * np.pi / length
    return mu ** 2 / (mu ** 2 + wavenumbers ** 2)


@dataclass(frozen=True, eq=False)
class SpectralBlock:
    """ Solution on one interval as a Neumann cosine series. """
    a: float
    b: float
    coefficients: np.ndarray = field(repr=False)
    signal_coefficients: np.ndarray = field(repr=False)
    signal_norm2: float
    truncation_bound: float = 0.0

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def modes(self) -> int:
        return len(self.coefficients) - 1

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.arange(self.modes + 1) * np.pi / self.length

    @property
    def inner(self) -> float:
        """ <g, f> on the block. """
        return float(np.dot(self.coefficients, self.signal_coefficients[:len(self.coefficients)]))

    def norm2(self) -> float:
        return float(np.dot(self.coefficients, self.coefficients))

    def derivative_energy(self) -> float:
        """ Integral of |f'|^2 over the block by Parseval. """
        return float(np.sum((self.wavenumbers * self.coefficients) ** 2))

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        basis = np.cos(np.outer(x - self.a, self.wavenumbers)) * np.sqrt(2.0 / self.length)
        basis[:, 0] = 1.0 / np.sqrt(self.length)
        return basis @ self.coefficients

    def left_value(self) -> float:
        return float(self.evaluate(np.array([self.a]))[0])

    def right_value(self) -> float:
        return float(self.evaluate(np.array([self.b]))[0])

    def cell_integrals(self, edges: np.ndarray) -> np.ndarray:
        """ Integrals of the block's series over [edges[k], edges[k+1]], edges inside the block. """
        edges = np.asarray(edges, dtype=float) - self.a
        wavenumbers = self.wavenumbers[1:]
        primitive = np.empty((len(edges), self.modes + 1))
        primitive[:, 0] = edges / np.sqrt(self.length)
        primitive[:, 1:] = np.sin(np.outer(edges, wavenumbers)) / wavenumbers * np.sqrt(2.0 / self.length)
        return np.diff(primitive @ self.coefficients)


class SpectralSolution(PiecewiseSolution):
    """ Continuous partition solver output: one cosine series per interval of the partition. """

    def __init__(self, partition: Partition, mu: float, signal: ContinuousSignal, blocks: tuple[SpectralBlock, ...]):
        if len(blocks) != len(partition) - 1:
            raise ArgumentError(f"{len(blocks)} blocks for a partition with {len(partition) - 1} intervals")
        self.partition = partition
        self.mu = mu
        self.signal = signal
        self.blocks = blocks

    @property
    def modes(self) -> int:
        return max(block.modes for block in self.blocks)

    @property
    def block_inner(self) -> np.ndarray:
        return np.array([block.inner for block in self.blocks])

    @property
    def block_signal_norm2(self) -> np.ndarray:
        return np.array([block.signal_norm2 for block in self.blocks])

    @property
    def truncation_bound(self) -> float:
        return float(sum(block.truncation_bound for block in self.blocks))

    def norm2(self) -> float:
        return float(sum(block.norm2() for block in self.blocks))

    def derivative_energy(self) -> float:
        return float(sum(block.derivative_energy() for block in self.blocks))

    def is_piecewise_constant(self) -> bool:
        return all(not np.any(block.coefficients[1:]) for block in self.blocks)

    def block_of(self, x: np.ndarray) -> np.ndarray:
        index = np.searchsorted(np.asarray(self.partition.points), x, side='right') - 1
        return np.clip(index, 0, len(self.blocks) - 1)

    def evaluate(self, x: np.ndarray | float) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        index = self.block_of(x)
        result = np.empty(len(x))
        for block_index in np.unique(index):
            mask = index == block_index
            result[mask] = self.blocks[block_index].evaluate(x[mask])
        return result

    def inner_with(self, other: ContinuousSignal) -> float:
        """ <other, f> for any piecewise polynomial signal. """
        total = 0.0
        for block in self.blocks:
            moments = cosine_moments(other, block.a, block.b, block.modes)
            total += float(np.dot(block.coefficients, moments))
        return total

    def inner_spectral(self, other: SpectralSolution) -> float:
        """ <f, h> for two cosine-series solutions, exact on every overlap of their intervals. """
        if self.partition == other.partition:
            return float(sum(np.dot(mine.coefficients[:other_block.modes + 1],
                                    other_block.coefficients[:mine.modes + 1])
                             for mine, other_block in zip(self.blocks, other.blocks)))

        breaks = np.union1d(self.partition.points, other.partition.points)
        total = 0.0
        for lo, hi in zip(breaks[:-1], breaks[1:]):
            middle = 0.5 * (lo + hi)
            mine = self.blocks[int(self.block_of(middle))]
            theirs = other.blocks[int(other.block_of(middle))]
            total += _cosine_product_integral(mine, theirs, lo, hi)
        return total

    def to_signal(self) -> ContinuousSignal:
        """ The solution as a step signal; only defined for piecewise constant solutions. """
        if not self.is_piecewise_constant():
            raise ArgumentError("Only piecewise constant solutions convert to a step signal")
        values = [block.coefficients[0] / np.sqrt(block.length) for block in self.blocks]
        return ContinuousSignal.step(self.partition.points, values)

    def jump_partition(self, tolerance: float = 1e-10) -> Partition:
        scale = tolerance * max(1.0, np.sqrt(self.signal_norm2()))
        cuts = [right.a for left, right in zip(self.blocks, self.blocks[1:])
                if abs(left.right_value() - right.left_value()) > scale]
        return Partition((0.0, *cuts, 1.0))

    def to_json(self) -> dict:
        return {
            'kind': 'cosine',
            'blocks': [{'interval': [block.a, block.b], 'coefficients': block.coefficients.tolist()}
                       for block in self.blocks],
        }

    def __repr__(self):
        return f"SpectralSolution(mu={self.mu}, blocks={len(self.blocks)}, modes={self.modes})"


def _cosine_product_integral(first: SpectralBlock, second: SpectralBlock, lo: float, hi: float) -> float:
    """ Integral over [lo, hi] of the product of two cosine series with their own origins. """
    def weights(block: SpectralBlock) -> np.ndarray:
        scale = np.full(block.modes + 1, np.sqrt(2.0 / block.length))
        scale[0] = 1.0 / np.sqrt(block.length)
        return scale * block.coefficients

    alpha = first.wavenumbers[:, None]
    beta = second.wavenumbers[None, :]
    total = np.zeros((len(first.coefficients), len(second.coefficients)))
    for sign in (1.0, -1.0):
        frequency = alpha + sign * beta
        phase = -alpha * first.a - sign * beta * second.a
        safe = np.where(np.abs(frequency) > 1e-12, frequency, 1.0)
        integral = np.where(
            np.abs(frequency) > 1e-12,
            (np.sin(frequency * hi + phase) - np.sin(frequency * lo + phase)) / safe,
            (hi - lo) * np.cos(phase),
        )
        total += 0.5 * integral
    return float(weights(first) @ total @ weights(second))


def partition_solver_continuous(g: ContinuousSignal, p: Partition, mu: float,
                                modes: int | None = None) -> SpectralSolution:
    """ Per interval, the Neumann resolvent mu^2 (mu^2 - d^2/dx^2)^-1 applied to g as a filtered cosine series.

    With mu = 0 only the mean survives. A TruncationWarning is issued when the certified bound on
    the energy the truncated modes would have carried exceeds the configured fraction of ||g||^2.
    """
    modes = settings['solvers.spectral.modes'] if modes is None else modes
    if modes < 1:
        raise ArgumentError(f"Truncation order must be at least 1, got {modes}")
    if mu < 0 or not np.isfinite(mu):
        raise ArgumentError(f"mu must be a finite nonnegative number, got {mu}")

    blocks = tuple(solve_interval(g, a, b, mu, modes) for a, b in intervals(p))
    solution = SpectralSolution(p, mu, g, blocks)

    bound = solution.truncation_bound
    limit = settings['solvers.spectral.tail_tolerance'] * g.norm2()
    if bound > limit:
        message = f"Cosine series truncated at {modes} modes: error bound {bound:.3g} exceeds {limit:.3g}"
        log.warning(message)
        warnings.warn(message, TruncationWarning, stacklevel=2)
    return solution


def solve_interval(g: ContinuousSignal, a: float, b: float, mu: float, modes: int) -> SpectralBlock:
    length = b - a
    moments = cosine_moments(g, a, b, modes)
    signal_norm2 = g.norm2_on(a, b)
    if mu == 0:
        return SpectralBlock(a, b, moments[:1].copy(), moments, signal_norm2)

    factors = filter_factors(mu, length, modes)
    tail = max(signal_norm2 - float(np.dot(moments, moments)), 0.0)
    next_factor = mu ** 2 / (mu ** 2 + ((modes + 1) * np.pi / length) ** 2)
    return SpectralBlock(a, b, factors * moments, moments, signal_norm2, next_factor ** 2 * tail)
