from __future__ import annotations

import numpy as np

from segmentkit.errors import ResourceError
from segmentkit.grid import ContinuousSignal, DiscreteSignal, build_prefix
from segmentkit.logger import log
from segmentkit.settings import settings
from segmentkit.solvers import solve_interval

settings.register('optimize.cap.potts', 20000, "Largest n for the Potts (mu = 0) dynamic program", minimum=1)
settings.register('optimize.cap.bz', 4000, "Largest n for the Blake-Zisserman (mu > 0) cost table", minimum=1)
settings.register('optimize.cap.ms_grid', 512, "Largest candidate grid for continuous minimization", minimum=1)


class IntervalCostTable:
    """ Block costs c(j, k) = (1/n)(sum g^2 - sum g f*) over samples j..k-1, 0 <= j < k <= n.

    mu = 0 costs come from prefix sums on demand. mu > 0 costs are stored densely; they are
    produced by one LDL^T sweep of the shifted Neumann matrices mu^2 I + n^2 L(m) run for all
    block starts at once. The pivots of that factorization depend on the block length only.
    """

    def __init__(self, g: DiscreteSignal, mu: float, cap: int | None = None):
        self.signal = g
        self.mu = float(mu)
        n = g.n

        if cap is None:
            cap = settings['optimize.cap.potts'] if mu == 0 else settings['optimize.cap.bz']
        if n > cap:
            model = "Potts" if mu == 0 else "Blake-Zisserman"
            raise ResourceError(f"{model} cost table for n = {n} exceeds the cap of {cap}; "
                                f"coarsen the signal or raise the cap")

        # Costs are shift invariant, centering reduces cancellation in the prefix differences
        centered = DiscreteSignal(g.grid, g.values - np.mean(g.values))
        self._prefix = build_prefix(centered)
        self._centered = centered.values
        self._dense = None if mu == 0 else self._sweep()
        log.debug(f"Cost table for n={n}, mu={mu}: {'dense' if self._dense is not None else 'prefix sums'}")

    @property
    def n(self) -> int:
        return self.signal.n

    @property
    def size(self) -> int:
        return self.n * (self.n + 1) // 2

    def _sweep(self) -> np.ndarray:
        n = self.n
        n2 = float(n) ** 2
        n4 = n2 * n2
        mu2 = self.mu ** 2
        g = self._centered
        squares = self._prefix.squares

        interior = np.empty(n + 1)  # interior[i]: pivot of row i (1-based) inside a block longer than i
        last = np.empty(n + 1)      # last[m]: pivot of the final row of a block of length m
        interior[1] = mu2 + n2
        for i in range(2, n + 1):
            interior[i] = mu2 + 2.0 * n2 - n4 / interior[i - 1]
            last[i] = mu2 + n2 - n4 / interior[i - 1]

        costs = np.zeros((n + 1, n + 1))
        y = g.copy()
        accumulated = y * y / interior[1]
        for i in range(2, n + 1):
            count = n - i + 1
            starts = np.arange(count)
            y = g[i - 1:] + (n2 / interior[i - 1]) * y[:count]
            quadratic = accumulated[:count] + y * y / last[i]
            block_squares = squares[starts + i] - squares[starts]
            costs[starts, starts + i] = np.maximum(block_squares - mu2 * quadratic, 0.0) / n
            accumulated = accumulated[:count] + y * y / interior[i]
        return costs

    def column(self, k: int, starts: np.ndarray | None = None) -> np.ndarray:
        """ c(j, k) for the given starts j < k (all of 0..k-1 by default). """
        starts = np.arange(k) if starts is None else np.asarray(starts, dtype=int)
        if self._dense is not None:
            return self._dense[starts, k]

        lengths = k - starts
        sums = self._prefix.sums[k] - self._prefix.sums[starts]
        squares = self._prefix.squares[k] - self._prefix.squares[starts]
        costs = np.maximum(squares - sums * sums / lengths, 0.0) / self.n
        costs[lengths == 1] = 0.0
        return costs

    def cost(self, j: int, k: int) -> float:
        return float(self.column(k, np.array([j]))[0])


class ContinuousCostTable:
    """ Block costs ||g||^2 - <g, f*> on intervals [j/N, k/N] of a candidate grid.

    mu = 0 uses cell integrals and squared-cell integrals; mu > 0 solves each interval
    spectrally on first use and caches the cost.
    """

    def __init__(self, g: ContinuousSignal, mu: float, nref: int, modes: int, cap: int | None = None):
        cap = settings['optimize.cap.ms_grid'] if cap is None else cap
        if nref > cap:
            raise ResourceError(f"Candidate grid of {nref} points exceeds the cap of {cap}")
        self.signal = g
        self.mu = float(mu)
        self.n = nref
        self.modes = modes
        self._edges = np.arange(nref + 1) / nref

        if mu == 0:
            self._integrals = np.concatenate(([0.0], np.cumsum(g.cell_integrals(self._edges))))
            square_cells = [g.norm2_on(lo, hi) for lo, hi in zip(self._edges[:-1], self._edges[1:])]
            self._squares = np.concatenate(([0.0], np.cumsum(square_cells)))
        else:
            self._cache: dict[tuple[int, int], float] = {}
        self.truncation_bound = 0.0

    @property
    def size(self) -> int:
        return self.n * (self.n + 1) // 2

    def _interval_cost(self, j: int, k: int) -> float:
        if (j, k) not in self._cache:
            block = solve_interval(self.signal, self._edges[j], self._edges[k], self.mu, self.modes)
            self.truncation_bound = max(self.truncation_bound, block.truncation_bound)
            self._cache[(j, k)] = max(block.signal_norm2 - block.inner, 0.0)
        return self._cache[(j, k)]

    def column(self, k: int, starts: np.ndarray | None = None) -> np.ndarray:
        starts = np.arange(k) if starts is None else np.asarray(starts, dtype=int)
        if self.mu == 0:
            lengths = (k - starts) / self.n
            integrals = self._integrals[k] - self._integrals[starts]
            squares = self._squares[k] - self._squares[starts]
            return np.maximum(squares - integrals * integrals / lengths, 0.0)
        return np.array([self._interval_cost(int(j), k) for j in starts])

    def cost(self, j: int, k: int) -> float:
        return float(self.column(k, np.array([j]))[0])


def build_cost_table(g: DiscreteSignal, mu: float, cap: int | None = None) -> IntervalCostTable:
    return IntervalCostTable(g, mu, cap)
