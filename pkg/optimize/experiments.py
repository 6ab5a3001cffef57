"""
Batch experiments over random instances and their CSV rows
"""

import csv
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, TextIO

import numpy as np

from core.errors import BudgetExceededError, SolverError
from core.pomdp import random_pomdp
from homotopy.tracker import TrackerOptions
from optimize.solvers import Method, solve
from utils.helpers import format_partition

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["partition", "method", "complex_mean", "complex_sd", "real_mean", "real_sd",
               "positive_mean", "positive_sd", "value_agreement_max_gap"]

DEFAULT_METHODS = (Method.KKT, Method.LAGRANGE_ALL, Method.LAGRANGE_RELEVANT)


@dataclass
class TrialOutcome:
    trial: int
    seed: int
    n_complex: Optional[int] = None
    n_real: Optional[int] = None
    n_positive: Optional[int] = None
    best_value: Optional[float] = None
    failure: Optional[str] = None


@dataclass
class BatchRow:
    """Statistics of one method over all trials of a batch"""

    partition: str
    method: Method
    outcomes: List[TrialOutcome] = field(default_factory=list)
    skipped: bool = False
    value_agreement_max_gap: Optional[float] = None

    def _stat(self, name: str, reducer) -> Optional[float]:
        values = [getattr(o, name) for o in self.outcomes if getattr(o, name) is not None]
        return float(reducer(values)) if values else None

    def mean(self, name: str) -> Optional[float]:
        return self._stat(name, np.mean)

    def sd(self, name: str) -> Optional[float]:
        """Population standard deviation"""
        return self._stat(name, np.std)

    @property
    def n_failures(self) -> int:
        return sum(o.failure is not None for o in self.outcomes)

    def as_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {"partition": self.partition, "method": self.method.value}
        for name in ("complex", "real", "positive"):
            row[f"{name}_mean"] = self.mean(f"n_{name}")
            row[f"{name}_sd"] = self.sd(f"n_{name}")
        row["value_agreement_max_gap"] = self.value_agreement_max_gap
        return row

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.as_row(), skipped=self.skipped, n_trials=len(self.outcomes),
                    n_failures=self.n_failures)


def batch_experiment(n_states: int, n_actions: int, fiber_sizes: Sequence[int], n_trials: int,
                     seed: int, methods: Sequence[Method] = DEFAULT_METHODS,
                     options: Optional[TrackerOptions] = None) -> List[BatchRow]:
    """
    Run every method on the same random instances and collect statistics

    Instance t of the batch is random_pomdp(..., seed + t), so all methods
    see identical data. Best values are compared with the first method that
    was not skipped.

    Args:
        n_states: Number of states
        n_actions: Number of actions
        fiber_sizes: Fiber sizes d_o
        n_trials: Number of random instances
        seed: Base seed
        methods: Methods to compare
        options: Tracker options of the polynomial methods

    Returns:
        One BatchRow per method; no rows when n_trials is 0
    """
    if n_trials <= 0:
        return []
    partition = format_partition(fiber_sizes)
    rows = [BatchRow(partition, Method(m)) for m in methods]
    for trial in range(n_trials):
        instance_seed = seed + trial
        pomdp = random_pomdp(n_states, n_actions, fiber_sizes, instance_seed)
        for row in rows:
            if row.skipped:
                continue
            outcome = TrialOutcome(trial, instance_seed)
            try:
                report = solve(pomdp, row.method, options, confirm=False, seed=instance_seed)
            except BudgetExceededError as exc:
                logger.warning("%s %s: %s, row skipped", partition, row.method.value, exc)
                row.skipped = True
                row.outcomes = []
                continue
            except SolverError as exc:
                outcome.failure = str(exc)
                row.outcomes.append(outcome)
                continue
            if row.method.polynomial:
                outcome.n_complex = report.n_complex
                outcome.n_real = report.n_real
                outcome.n_positive = report.n_positive
            outcome.best_value = report.best_value
            outcome.failure = report.failure
            row.outcomes.append(outcome)
        logger.info("%s trial %d/%d done", partition, trial + 1, n_trials)

    reference = next((row for row in rows if not row.skipped), None)
    if reference is not None:
        values = {o.trial: o.best_value for o in reference.outcomes if o.best_value is not None}
        for row in rows:
            if row.skipped:
                continue
            gaps = [abs(o.best_value - values[o.trial]) for o in row.outcomes
                    if o.best_value is not None and o.trial in values]
            row.value_agreement_max_gap = max(gaps) if gaps else None
    return rows


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_batch_csv(rows: Sequence[BatchRow], stream: TextIO, header: bool = True):
    """
    Write batch rows as CSV

    Rows of methods refused by the path budget carry "skipped" in every
    statistics column.
    """
    writer = csv.writer(stream, lineterminator="\n")
    if header:
        writer.writerow(CSV_COLUMNS)
    for row in rows:
        if row.skipped:
            writer.writerow([row.partition, row.method.value] + ["skipped"] * (len(CSV_COLUMNS) - 2))
            continue
        data = row.as_row()
        writer.writerow([_format(data[column]) for column in CSV_COLUMNS])
