"""Exact compatibility analysis between EPR outcome vectors and imposed
marginal constraints, over explicit 256-entry couplings."""

from .scalars import (
    DEFAULT_TOLERANCE,
    SQRT2,
    Scalar,
    ScalarModeError,
    ScalarParseError,
    as_scalar,
    compare,
)
from .model import (
    ConnectionVector,
    CouplingTable,
    MarginalSpec,
    OutcomeVector,
    VariableId,
    connection_marginals,
    decode,
    full_table,
    index_of,
    outcome_marginals,
)
from .stats import (
    Compliance,
    CorrelationQuad,
    SPair,
    chsh_satisfied,
    compatible,
    enumerate_E0,
    noforcing_counterexample,
    qm_compliant,
    realize_s_pair,
    s_pair,
    s_pair_closed_form,
    tsirelson_satisfied,
)
from .lp import (
    ConflictingMarginalsError,
    ConstraintSystem,
    FeasibilityResult,
    InfeasibleSystemError,
    build_system,
    feasible,
    optimize,
)

__version__ = "0.1.0"

__all__ = [
    "Scalar",
    "ScalarModeError",
    "ScalarParseError",
    "as_scalar",
    "compare",
    "SQRT2",
    "DEFAULT_TOLERANCE",
    "VariableId",
    "OutcomeVector",
    "ConnectionVector",
    "CouplingTable",
    "MarginalSpec",
    "index_of",
    "decode",
    "full_table",
    "connection_marginals",
    "outcome_marginals",
    "Compliance",
    "CorrelationQuad",
    "SPair",
    "s_pair",
    "s_pair_closed_form",
    "chsh_satisfied",
    "tsirelson_satisfied",
    "qm_compliant",
    "compatible",
    "enumerate_E0",
    "realize_s_pair",
    "noforcing_counterexample",
    "ConstraintSystem",
    "ConflictingMarginalsError",
    "InfeasibleSystemError",
    "FeasibilityResult",
    "build_system",
    "feasible",
    "optimize",
    "__version__",
]
