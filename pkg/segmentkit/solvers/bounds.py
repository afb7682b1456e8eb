import numpy as np

from segmentkit.errors import ArgumentError
from segmentkit.grid import ContinuousSignal, DiscreteSignal, discretize
from segmentkit.partitions import GridPartition, Partition
from segmentkit.solvers.discrete import spectral_gap


def solver_lipschitz_bound(p: GridPartition | Partition, g: DiscreteSignal | ContinuousSignal) -> float:
    """ max over blocks of ||g|| / |lambda_1|, bounding ||f*(mu) - f*(mu')|| / |mu^2 - mu'^2|.

    Grid partitions use the discrete gap n^2 * 2(1 - cos(pi/m)); real partitions the continuous
    gap (pi/L)^2. Single-sample blocks have no gap and are skipped.
    """
    if isinstance(p, GridPartition):
        if isinstance(g, ContinuousSignal):
            g = discretize(g, p.n)
        elif g.grid != p.grid:
            raise ArgumentError(f"Partition on {p.n} cells does not match a signal on {g.n} cells")
        gaps = [spectral_gap(int(m), p.n) for m in p.block_lengths() if m >= 2]
    else:
        if not isinstance(g, ContinuousSignal):
            raise ArgumentError("A real partition needs a continuous signal")
        gaps = [(np.pi / length) ** 2 for length in np.diff(p.points)]

    if not gaps:
        return 0.0
    return g.norm() / min(gaps)


def continuous_lipschitz_limit(g: ContinuousSignal | DiscreteSignal, longest_block: float) -> float:
    """ ||g|| L^2 / pi^2, the limit of the discrete bound for a block of relative length L. """
    return g.norm() * longest_block ** 2 / np.pi ** 2
