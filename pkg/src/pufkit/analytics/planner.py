"""Choose the cheapest BCH block code meeting a key failure target."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

from ..bch.catalog import CodeParams, blocks_needed, decode_cost, encode_cost
from ..exceptions import ParameterError, PlanningError
from .failure import FailureBudget, failure_budget

logger = logging.getLogger(__name__)

BerProfile = Union[Sequence[float], Mapping[str, Sequence[float]]]


@dataclass
class CodePlan:
    """A feasible plan: code, block count, worst-condition budget and cost."""

    code: CodeParams
    L: int
    budget: FailureBudget
    cost: int

    @property
    def helper_bits(self) -> int:
        return self.L * (self.code.n - self.code.k)

    @property
    def response_bits(self) -> int:
        return self.L * self.code.n

    def to_dict(self) -> Dict[str, Any]:
        return {
            'code': list(self.code),
            'L': self.L,
            'encode_cost': self.cost,
            'helper_bits': self.helper_bits,
            'response_bits': self.response_bits,
            'budget': self.budget.to_dict(),
        }


def _profiles(per_reference_ber: BerProfile) -> Dict[str, List[float]]:
    if isinstance(per_reference_ber, Mapping):
        profiles = {str(label): [float(b) for b in bers] for label, bers in per_reference_ber.items()}
    else:
        profiles = {'': [float(b) for b in per_reference_ber]}
    if not profiles or any(not bers for bers in profiles.values()):
        raise ParameterError("BER profile must name at least one reference")
    return profiles


def worst_budget(code: CodeParams, key_bits: int, per_reference_ber: BerProfile) -> FailureBudget:
    """Budget of ``code`` at the evaluation condition with the highest P_fail."""
    L = blocks_needed(code.k, key_bits)
    budgets = [
        failure_budget(bers, tuple(code), L, condition=label)
        for label, bers in _profiles(per_reference_ber).items()
    ]
    return max(budgets, key=lambda budget: budget.p_fail)


def plan_code(
    target_pfail: float,
    key_bits: int,
    per_reference_ber: BerProfile,
    catalog: Sequence[CodeParams],
) -> CodePlan:
    """Cheapest catalog code whose key failure rate is below ``target_pfail``.

    Args:
        target_pfail: Required key failure rate, in (0, 1)
        key_bits: Key length; L = ceil(key_bits / k)
        per_reference_ber: BER of each of the J references, either one list
            or a mapping of evaluation condition to list (the plan must hold
            at every condition)
        catalog: Candidate codes

    Returns:
        CodePlan minimising L * n * (n - k); ties go to smaller n, then
        smaller t

    Raises:
        ParameterError: On an empty catalog or a target outside (0, 1)
        PlanningError: If no code is feasible; carries the best P_fail
    """
    if not catalog:
        raise ParameterError("catalog is empty")
    if not 0.0 < target_pfail < 1.0:
        raise ParameterError(f"target_pfail must lie in (0, 1), got {target_pfail}")

    best_plan: Optional[CodePlan] = None
    best_infeasible: Optional[FailureBudget] = None
    best_infeasible_code: Optional[CodeParams] = None

    for code in catalog:
        code = CodeParams(*code)
        budget = worst_budget(code, key_bits, per_reference_ber)
        if budget.p_fail >= target_pfail:
            if best_infeasible is None or budget.p_fail < best_infeasible.p_fail:
                best_infeasible, best_infeasible_code = budget, code
            continue
        cost = encode_cost(code.n, code.k, budget.L)
        plan = CodePlan(code, budget.L, budget, cost)
        if best_plan is None or (cost, code.n, code.t) < (best_plan.cost, best_plan.code.n, best_plan.code.t):
            best_plan = plan

    if best_plan is None:
        assert best_infeasible is not None and best_infeasible_code is not None
        logger.warning(
            f"No feasible code for target {target_pfail:g}; best is "
            f"{best_infeasible_code} at {best_infeasible.p_fail:.3g}"
        )
        raise PlanningError(
            f"no catalog code reaches P_fail < {target_pfail:g}; best achievable is "
            f"{best_infeasible.p_fail:.3g} with {best_infeasible_code}",
            best_p_fail=best_infeasible.p_fail,
            best_code=tuple(best_infeasible_code),
        )

    logger.info(
        f"Planned {best_plan.code} x {best_plan.L}, P_fail={best_plan.budget.p_fail:.3g}, "
        f"cost={best_plan.cost}"
    )
    return best_plan


def overhead_report(plan: CodePlan, baseline: Optional[CodePlan] = None) -> Dict[str, Any]:
    """Bit-operation comparison of token-side work.

    ``rfe_over_fe`` is the reverse-FE token cost (syndrome generation) over
    the classic-FE token cost (full decoding) for the same code. When a
    ``baseline`` (single-reference) plan is given, ``cost_ratio`` is this
    plan's encoding cost relative to it.
    """
    n, k, t = plan.code
    encode = encode_cost(n, k, plan.L)
    decode = decode_cost(n, k, t, plan.L)
    report: Dict[str, Any] = {
        'encode_cost': encode,
        'decode_cost': decode,
        'rfe_over_fe': encode / decode,
    }
    if baseline is not None:
        report['baseline_code'] = list(baseline.code)
        report['baseline_L'] = baseline.L
        report['baseline_cost'] = baseline.cost
        report['cost_ratio'] = plan.cost / baseline.cost
        report['cost_reduction'] = 1.0 - plan.cost / baseline.cost
    return report
