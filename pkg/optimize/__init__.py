"""
Optimization package: critical-point solvers, baselines, experiments and checks
"""

from .solvers import (BoundarySweepSolver, ComponentResult, CriticalPointSolver, KktSolver, Method,
                      SolveReport, solve, solve_boundary_sweep, solve_kkt)
from .baselines import brute_force, grid_divisions, projected_gradient
from .experiments import CSV_COLUMNS, BatchRow, batch_experiment, write_batch_csv
from .checks import CheckResult, run_checks

__all__ = ['BoundarySweepSolver', 'ComponentResult', 'CriticalPointSolver', 'KktSolver', 'Method',
           'SolveReport', 'solve', 'solve_boundary_sweep', 'solve_kkt',
           'brute_force', 'grid_divisions', 'projected_gradient',
           'CSV_COLUMNS', 'BatchRow', 'batch_experiment', 'write_batch_csv',
           'CheckResult', 'run_checks']
