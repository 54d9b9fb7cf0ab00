"""EF1 allocation solvers and brute-force fairness verifiers.

Covers Boolean, trilean and separable single-peaked valuations of
indivisible items whose marginal values may change sign.
"""
from .boolean import boolean_ef1_identical, neg_boolean_ef1
from .errors import (
    BudgetExceeded,
    FairDivError,
    InstanceFileError,
    InvalidRange,
    InvalidRegime,
    NotCommonThreshold,
    NotIdentical,
    NotTrilean,
    PreconditionFailed,
    StructuralError,
    UnexpectedViolation,
    WrongAgentCount,
)
from .kernels import BACKEND
from .ssp import (
    QuantityAllocation,
    SSPInstance,
    is_ef1_quantity,
    ssp3_ef1,
    ssp_common_threshold_ef1,
)
from .trilean import (
    SolverTrace,
    fix_ef1_violations_neg,
    fix_ef1_violations_pos,
    trilean_ef1,
    trilean_neg_ef1,
    trilean_pos_ef1,
)
from .valuation import (
    AgentClass,
    Allocation,
    Instance,
    SetValuation,
    TrileanKind,
    canonicalize_trilean,
    classify_bundle,
    detect_kind,
)
from .verify import (
    ViolationWitness,
    brute_force_find_ef1,
    brute_force_find_efxpm,
    class_violation_filter,
    is_ef1,
    is_efxpm,
    marginal_sets,
)

__version__ = "0.1.0"
