"""
Configuration settings and constants for the state-aggregation POMDP solver
"""

import os

# Instance validation
STOCHASTIC_TOL = 1e-12  # column sums of alpha, pi and mu
FREQUENCY_SUM_TOL = 1e-10

# Conditioning / policy recovery
POSITIVITY_TOL = 1e-9
POSITIVITY_PROBES = 32

# Feasibility checks
FEASIBILITY_TOL = 1e-7
CLASSIFY_FEASIBILITY_TOL = 1e-6

# Endpoint classification
REAL_TOL = 1e-7
POSITIVE_TOL = 1e-8
KAPPA_TOL = 1e-8

# Path tracker defaults
INITIAL_STEP = 0.05
MIN_STEP = 1e-7
MAX_STEP = 0.2
CORRECTOR_TOL = 1e-10
MAX_CORRECTOR_ITERS = 5
ENDPOINT_TOL = 1e-14
MAX_PATH_STEPS = 10000
DIVERGENCE_THRESHOLD = 1e8
SINGULAR_TOL = 1e-11  # relative smallest singular value, also the pseudo-inverse cutoff of polishing
CONVERGED_RESIDUAL = 1e-8
POLISH_ITERS = 16
MULTIPLE_ROOT_RADIUS = 1e-4  # endpoints of one homotopy this close share a root
MULTIPLE_ROOT_TOL = 1e-6  # relative smallest singular value of a shared root counted as singular
ENDGAME_START = 0.95  # t beyond which steps are capped at ENDGAME_STEP
ENDGAME_STEP = 0.005
PATH_CHUNK = 4096  # paths tracked together in one lockstep batch
DEFAULT_GAMMA_SEED = 20220817
CONFIRM_GAMMA_OFFSET = 1  # confirmation re-run uses gamma_seed + offset

# Solution post-processing
DEDUPE_RADIUS = 1e-6
SORT_DECIMALS = 8
ALPHA_THRESHOLD = 0.1307
CONFIRM_TOL = 1e-8

# Homotopy budget (number of start paths)
DEFAULT_BEZOUT_BUDGET = 100000
BUDGET_ENV_VAR = "SAROP_BUDGET"

# Boundary enumeration
MAX_STATE_ACTIONS = 64

# Baselines
BRUTE_FORCE_MAX_DIM = 4
BRUTE_FORCE_CHUNK = 20000
PGD_STEPS = 500
PGD_LEARNING_RATE = 0.5
PGD_MAX_HALVINGS = 20

# Experiments
DEFAULT_TRIALS = 20

# Invariant suites of the check command
CHECK_INSTANCES = 20
CHECK_POLICIES = 50
CHECK_AGREEMENT_INSTANCES = 3
CHECK_FEASIBILITY_TOL = 1e-10
CHECK_GRADIENT_TOL = 1e-5
CHECK_AGREEMENT_TOL = 1e-7
FINITE_DIFFERENCE_STEP = 1e-6


def bezout_budget() -> int:
    """
    Get the Bezout path budget, honouring the SAROP_BUDGET override

    Returns:
        Maximum number of homotopy start paths a single solve may use
    """
    raw = os.environ.get(BUDGET_ENV_VAR)
    if raw is None or raw.strip() == "":
        return DEFAULT_BEZOUT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{BUDGET_ENV_VAR} must be an integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"{BUDGET_ENV_VAR} must be positive, got {value}")
    return value
