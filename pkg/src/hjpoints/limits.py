"""Resource budgets, overridable through environment variables."""

import os

MAX_CELLS_ENV = "HP_MAX_CELLS"
TRIAL_DIVISION_ENV = "HP_TRIAL_DIVISION_BOUND"

DEFAULT_MAX_CELLS = 10_000_000
DEFAULT_TRIAL_DIVISION_BOUND = 1_000_000

# Cells allowed in the backtracking search for line-free colorings; the
# search space is k**cells, so this stays deliberately small.
DEFAULT_BACKTRACK_CELLS = 64


def max_cells(override=None):
    """Grid-size budget: dense color tables and exclusion-set enumeration."""
    if override is not None:
        return override
    return int(os.environ.get(MAX_CELLS_ENV, DEFAULT_MAX_CELLS))


def trial_division_bound(override=None):
    """Largest prime tried when factoring by trial division."""
    if override is not None:
        return override
    return int(os.environ.get(TRIAL_DIVISION_ENV, DEFAULT_TRIAL_DIVISION_BOUND))
