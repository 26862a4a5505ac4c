"""Failure-rate math, code planning, entropy accounting and debiasing.

The Monte Carlo validator lives in :mod:`pufkit.analytics.montecarlo` and
is imported from there.
"""

from .debias import debias_cvn, debias_hw, debias_pair_output_vn
from .entropy import EntropyReport, entropy_report
from .failure import (
    FailureBudget,
    block_failure,
    failure_budget,
    key_failure_L,
    key_failure_mrr,
    wilson_interval,
)
from .planner import CodePlan, plan_code

__all__ = [
    'block_failure', 'key_failure_L', 'key_failure_mrr', 'failure_budget',
    'FailureBudget', 'wilson_interval', 'plan_code', 'CodePlan',
    'entropy_report', 'EntropyReport', 'debias_cvn', 'debias_pair_output_vn',
    'debias_hw',
]
