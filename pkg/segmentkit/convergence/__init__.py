from segmentkit.convergence.trajectory import (
    ConvergenceReport,
    LimitConfig,
    Trajectory,
    Verdict,
    load_trajectory,
    tail_verdict,
)
from segmentkit.convergence.experiments import (
    bundled_signal,
    bundled_trajectories,
    distance_convergence,
    heaviside_structure,
    lipschitz_sweep,
    minimize_at,
    penalty_gamma_check,
    penalty_limit,
    penalty_value,
    projection_convergence,
    run_trajectory,
    solver_convergence,
)

__all__ = [
    'ConvergenceReport', 'LimitConfig', 'Trajectory', 'Verdict', 'bundled_signal', 'bundled_trajectories',
    'distance_convergence', 'heaviside_structure', 'lipschitz_sweep', 'load_trajectory', 'minimize_at',
    'penalty_gamma_check', 'penalty_limit', 'penalty_value', 'projection_convergence', 'run_trajectory',
    'solver_convergence', 'tail_verdict',
]
