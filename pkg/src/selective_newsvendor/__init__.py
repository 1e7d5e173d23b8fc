"""Exact solvers and experiment harness for selective newsvendor planning.

Models: an all-or-nothing variant (served customers buy exactly their
effort-scaled mean demand at the base price) and a price-linked variant
(joint selling price, order quantity, and customer assignment, with the
supplier lead time growing in the order quantity and unmet demand covered by
an emergency supplier).
"""
from .aon import AllOrNothingSolution, solve_all_or_nothing
from .assignment import CapacitatedMatcher, max_weight_capacitated_assignment
from .errors import (
    EnumerationSizeError,
    InfeasibleError,
    InstanceFormatError,
    InstanceValidationError,
    NegativeDemandError,
    SearchRangeError,
    SelectiveNewsvendorError,
)
from .experiments import (
    CompareResult,
    ExperimentConfig,
    ExperimentResult,
    compare_search_methods,
    emit_csv,
    run_sweep,
    run_table_experiment,
)
from .fixed_r import FixedPriceSolution, optimal_order_quantity, solve_fixed_price
from .generate import (
    GenSpec,
    generate_instance,
    instance_from_document,
    instance_to_document,
    load_instance,
    save_instance,
)
from .model import (
    Assignment,
    DemandVector,
    Instance,
    Metrics,
    ProfitBreakdown,
    compute_demands,
    compute_metrics,
    min_required_selection,
    order_cap_for_selection,
    order_cap_global,
    pair_demand,
    profit_all_or_nothing,
    profit_price_linked,
    validate_instance,
)
from .oracle import (
    OracleReport,
    oracle_all_or_nothing,
    oracle_fixed_price,
    oracle_joint,
)
from .search import (
    IterationRecord,
    JointSolution,
    SearchConfig,
    SearchTrace,
    price_upper_bound,
    run_grid_search,
    run_price_search,
    stationary_price,
)

__all__ = [
    "AllOrNothingSolution",
    "Assignment",
    "CapacitatedMatcher",
    "CompareResult",
    "DemandVector",
    "EnumerationSizeError",
    "ExperimentConfig",
    "ExperimentResult",
    "FixedPriceSolution",
    "GenSpec",
    "InfeasibleError",
    "Instance",
    "InstanceFormatError",
    "InstanceValidationError",
    "IterationRecord",
    "JointSolution",
    "Metrics",
    "NegativeDemandError",
    "OracleReport",
    "ProfitBreakdown",
    "SearchConfig",
    "SearchRangeError",
    "SearchTrace",
    "SelectiveNewsvendorError",
    "compare_search_methods",
    "compute_demands",
    "compute_metrics",
    "emit_csv",
    "generate_instance",
    "instance_from_document",
    "instance_to_document",
    "load_instance",
    "max_weight_capacitated_assignment",
    "min_required_selection",
    "optimal_order_quantity",
    "oracle_all_or_nothing",
    "oracle_fixed_price",
    "oracle_joint",
    "order_cap_for_selection",
    "order_cap_global",
    "pair_demand",
    "price_upper_bound",
    "profit_all_or_nothing",
    "profit_price_linked",
    "run_grid_search",
    "run_price_search",
    "run_sweep",
    "run_table_experiment",
    "save_instance",
    "solve_all_or_nothing",
    "solve_fixed_price",
    "stationary_price",
    "validate_instance",
]
