from __future__ import annotations

from abc import ABC, abstractmethod

import numpy as np

from segmentkit.partitions import GridPartition, Partition


class PiecewiseSolution(ABC):
    """ Minimizer of the quadratic part of the objective for one fixed partition.

    Implementations keep the per-block inner products with the signal they were solved
    for, so reduced objectives need no second pass over the signal.
    """

    partition: GridPartition | Partition
    mu: float

    @property
    def block_count(self) -> int:
        return len(self.partition) - 1

    @property
    @abstractmethod
    def block_inner(self) -> np.ndarray:
        """ <g, f> restricted to each block. """

    @property
    @abstractmethod
    def block_signal_norm2(self) -> np.ndarray:
        """ ||g||^2 restricted to each block. """

    def signal_inner(self) -> float:
        return float(np.sum(self.block_inner))

    def signal_norm2(self) -> float:
        return float(np.sum(self.block_signal_norm2))

    def reduced_cost(self) -> float:
        """ ||g||^2 - <g, f>: the quadratic objective at the solution. """
        return self.signal_norm2() - self.signal_inner()

    @abstractmethod
    def norm2(self) -> float:
        ...

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    @abstractmethod
    def evaluate(self, x: np.ndarray | float) -> np.ndarray:
        ...

    @abstractmethod
    def jump_partition(self) -> GridPartition | Partition:
        """ 0, 1 and the partition points where the solution actually jumps. """

    @abstractmethod
    def to_json(self) -> dict:
        ...
