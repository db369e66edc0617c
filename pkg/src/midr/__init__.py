"""Truthful-in-expectation FPTAS for multi-unit auctions.

The mechanisms here maximize expected welfare exactly over a fixed range of
weighted allocations, so Clarke payments make them truthful in expectation
while the range is rich enough to be a (1 - epsilon)-approximation.
"""
from .distribution import Node, RangeDistribution, expected_welfare, sample
from .lowerbound import gen_lb_instance
from .mechanism import Mechanism, MechanismOutcome, expected_utility, run_midr, vcg_payments
from .meta_tree import build_tree, evaluate_bottom_up, extract_top_down, meta_optimize, meta_value
from .oracle import (
    brute_force_breakpoints, brute_force_range_opt, brute_force_structured_opt,
    truthfulness_audit, unweighted_opt,
)
from .range_core import (
    ApproxParams, candidate_set, find_breakpoints, make_params, neighborhood,
    r_weight, structure_exponent, weight,
)
from .structured import optimize_pair, restricted_optimize, warmup_optimize
from .valuations import (
    Instance, QueryCounter, Valuation, additive, build_valuation, capped_additive,
    query_count, single_minded, step_list, validate, zero,
)

__version__ = "0.1.0"
