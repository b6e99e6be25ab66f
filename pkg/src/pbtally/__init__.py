"""Exact model counting for pseudo-Boolean (OPB) formulas.

The counter combines slack-based propagation with constraint learning,
splits residual formulas into variable-disjoint components, and caches
component counts under canonical keys. A brute-force enumerator is
included as an independent cross-check, along with seeded benchmark
generators.
"""

from .components import (Component, CountCache, decode_component,
                         encode_component, residual_components, saturate_gap)
from .counter import (CounterConfig, CountResult, MemoryBudgetExceeded,
                      ModelCounter, SearchStats, SolveTimeout,
                      compute_vcis_scores, count_models)
from .formula import (Assignment, CoefficientOverflowError, OpbParseError,
                      PBConstraint, PBFormula, build_formula, constraint_gap,
                      constraint_slack, emit_opb, parse_opb, parse_opb_file)
from .generators import gen_auction, gen_knapsack, gen_sensor
from .oracle import (OracleLimitError, OracleResult, brute_count,
                     brute_residual_count)

__version__ = "0.1.0"

__all__ = [
    "Assignment", "CoefficientOverflowError", "Component", "CountCache",
    "CountResult", "CounterConfig", "MemoryBudgetExceeded", "ModelCounter",
    "OpbParseError", "OracleLimitError", "OracleResult", "PBConstraint",
    "PBFormula", "SearchStats", "SolveTimeout", "brute_count",
    "brute_residual_count", "build_formula", "compute_vcis_scores",
    "constraint_gap", "constraint_slack", "count_models", "decode_component",
    "emit_opb", "encode_component", "gen_auction", "gen_knapsack",
    "gen_sensor", "parse_opb", "parse_opb_file", "residual_components",
    "saturate_gap",
    "__version__",
]
