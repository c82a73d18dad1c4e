"""fairaudit: audit tabular decisions against group and individual fairness criteria."""

__version__ = "0.1.0"

from .criteria import (
    CriterionResult,
    CriterionSpec,
    evaluate,
    evaluate_ftu,
    get_criterion,
    list_criteria,
    situation_testing_evaluate,
)
from .dataset import (
    ColumnSchema,
    Dataset,
    load_dataset,
    load_schema_config,
    save_csv,
    stratify,
)
from .distance import DistanceSpec
from .lipschitz import LipschitzReport, audit_map, load_mapped_csv
from .measures import (
    MeasureValue,
    balanced_error_ratio,
    chi2_sf,
    chi_square,
    conditional_mutual_information,
    mutual_information,
)
from .neighborhood import (
    NeighborhoodSpec,
    SoftResult,
    build_index,
    soft_evaluate,
)
from .rng import CounterRng
from .scenarios import SCENARIO_NAMES, GroundTruth, ScenarioSpec, generate
from .tables import (
    ContingencyTable,
    JointTable,
    StratifiedTables,
    contingency,
    normalize,
    stratified_contingency,
)
from .report import AuditConfig, Report, canonical_json, parse_report, render, run_audit

__all__ = [
    "CriterionResult",
    "CriterionSpec",
    "evaluate",
    "evaluate_ftu",
    "get_criterion",
    "list_criteria",
    "situation_testing_evaluate",
    "ColumnSchema",
    "Dataset",
    "load_dataset",
    "load_schema_config",
    "save_csv",
    "stratify",
    "DistanceSpec",
    "LipschitzReport",
    "audit_map",
    "load_mapped_csv",
    "MeasureValue",
    "balanced_error_ratio",
    "chi2_sf",
    "chi_square",
    "conditional_mutual_information",
    "mutual_information",
    "NeighborhoodSpec",
    "SoftResult",
    "build_index",
    "soft_evaluate",
    "CounterRng",
    "SCENARIO_NAMES",
    "GroundTruth",
    "ScenarioSpec",
    "generate",
    "ContingencyTable",
    "JointTable",
    "StratifiedTables",
    "contingency",
    "normalize",
    "stratified_contingency",
    "AuditConfig",
    "Report",
    "canonical_json",
    "parse_report",
    "render",
    "run_audit",
    "__version__",
]
