"""Group-level counterfactual interventions for attrition classifiers.

Given a trained classifier and the set of employees it labels attrition,
this package finds one sparse intervention vector, applied uniformly to
everyone in the set, that flips as many predictions as possible at
minimal weighted 1-norm cost, then iterates with feature black-listing to
produce alternative interventions that touch disjoint features.
"""

from .data import (
    ATTRITION,
    DEFAULT_FEATURES,
    FeatureSchema,
    PreparedDataset,
    RETENTION,
    RawDataset,
    Standardizer,
    TrainTestSplit,
    build_schema,
    load_csv,
    prepare,
    train_test_split,
    undersample_majority,
)
from .diversity import (
    SUPPORT_TOL,
    Blacklist,
    DiverseGroupExplainer,
    ExplanationSet,
    diverse_explanations,
    make_lp_solver,
    make_penalized_solver,
    support,
)
from .errors import (
    AuditError,
    DataError,
    GroupCfError,
    NothingToExplainError,
    SolverError,
)
from .lp import GroupLpProblem, GroupLpStandardForm, build_group_lp, solve_group_lp
from .models import (
    ForestScorer,
    InstanceSet,
    LinearScorer,
    accuracy,
    logistic_loss_gradient,
    scorer_from_dict,
    scorer_to_dict,
    select_attrition_set,
)
from .penalized import (
    DEFAULT_COORD_GRID,
    PenalizedConfig,
    penalized_objective,
    solve_penalized,
)
from .report import (
    DeltaRecord,
    ExplanationReport,
    coverage,
    format_text,
    narrative,
    render_report,
)
from .solution import GroupDelta

__version__ = "0.1.0"

__all__ = [
    "ATTRITION",
    "AuditError",
    "Blacklist",
    "DEFAULT_COORD_GRID",
    "DEFAULT_FEATURES",
    "DataError",
    "DeltaRecord",
    "DiverseGroupExplainer",
    "ExplanationReport",
    "ExplanationSet",
    "FeatureSchema",
    "ForestScorer",
    "GroupCfError",
    "GroupDelta",
    "GroupLpProblem",
    "GroupLpStandardForm",
    "InstanceSet",
    "LinearScorer",
    "NothingToExplainError",
    "PenalizedConfig",
    "PreparedDataset",
    "RETENTION",
    "RawDataset",
    "SUPPORT_TOL",
    "SolverError",
    "Standardizer",
    "TrainTestSplit",
    "accuracy",
    "build_group_lp",
    "build_schema",
    "coverage",
    "diverse_explanations",
    "format_text",
    "load_csv",
    "logistic_loss_gradient",
    "make_lp_solver",
    "make_penalized_solver",
    "narrative",
    "penalized_objective",
    "prepare",
    "render_report",
    "scorer_from_dict",
    "scorer_to_dict",
    "select_attrition_set",
    "solve_group_lp",
    "solve_penalized",
    "support",
    "train_test_split",
    "undersample_majority",
]
