from segmentkit.grid.continuous import ContinuousSignal, Piece, heaviside
from segmentkit.grid.grid import (
    DiscreteSignal,
    Grid,
    PrefixTable,
    build_prefix,
    check_same_grid,
    coarsen,
    discretize,
    embed,
    projection_error,
    refine,
)

__all__ = [
    'ContinuousSignal', 'Piece', 'heaviside',
    'DiscreteSignal', 'Grid', 'PrefixTable',
    'build_prefix', 'check_same_grid', 'coarsen', 'discretize', 'embed', 'projection_error', 'refine',
]
