from segmentkit.solvers.bounds import continuous_lipschitz_limit, solver_lipschitz_bound
from segmentkit.solvers.continuous import (
    SpectralBlock,
    SpectralSolution,
    cosine_moments,
    filter_factors,
    partition_solver_continuous,
    solve_interval,
)
from segmentkit.solvers.discrete import (
    BlockSystem,
    DiscreteSolution,
    block_eigenvalues,
    block_matrix,
    partition_solver_discrete,
    solve_block_discrete,
    solve_block_mean,
    solve_block_spectral,
    spectral_gap,
)
from segmentkit.solvers.solution import PiecewiseSolution

__all__ = [
    'BlockSystem', 'DiscreteSolution', 'PiecewiseSolution', 'SpectralBlock', 'SpectralSolution',
    'block_eigenvalues', 'block_matrix', 'continuous_lipschitz_limit', 'cosine_moments', 'filter_factors',
    'partition_solver_continuous', 'partition_solver_discrete', 'solve_block_discrete', 'solve_block_mean',
    'solve_block_spectral', 'solve_interval', 'solver_lipschitz_bound', 'spectral_gap',
]
