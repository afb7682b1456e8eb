from segmentkit.optimize.cost_table import ContinuousCostTable, IntervalCostTable, build_cost_table
from segmentkit.optimize.dp import (
    JumpBudgetEntry,
    SegmentationResult,
    brute_force_min,
    gamma_path,
    minimize_dp,
    minimize_ms_grid,
    minimize_with_jump_budget,
)

__all__ = [
    'ContinuousCostTable', 'IntervalCostTable', 'JumpBudgetEntry', 'SegmentationResult',
    'brute_force_min', 'build_cost_table', 'gamma_path', 'minimize_dp', 'minimize_ms_grid',
    'minimize_with_jump_budget',
]
