"""Structural feature extraction and fast feature selection for event logs."""

from .errors import (
    BadOrderKey,
    DataConditionError,
    DegenerateSplit,
    EmptyField,
    EmptyKinds,
    EmptySelection,
    LengthMismatch,
    LogselectError,
    MissingColumn,
    MissingFeature,
    NoConvergence,
    NonTemporalOrderKey,
    SingleClassLabels,
    ValidationError,
)
from .eventlog import (
    CsvSchema,
    Case,
    END,
    EventLog,
    EventRecord,
    LabelVector,
    START,
    build_log,
    label_by_attribute,
    label_by_duration,
    load_event_log,
    parse_csv,
    parse_duration,
    write_canonical_csv,
)
from .features import (
    ALL_KINDS,
    DedupMap,
    FeatureDescriptor,
    FeatureKind,
    FeatureMatrix,
    KIND_ORDER,
    dedup,
    extract,
    feature_name,
    load_matrix,
    save_matrix,
)
from .mi import CoverageScorer, MiCoverage, mi_coverage, mutual_information
from .gbm import (
    EvalMetrics,
    GbmClassifier,
    GbmConfig,
    evaluate,
    permutation_importance,
    split_train_test,
)
from .selection import (
    ALGORITHMS,
    BaseSelector,
    ClusterFisherSelector,
    ClusterImportanceSelector,
    ClusterMrmrSelector,
    ClusterSelector,
    FisherSelector,
    LassoVoteSelector,
    MrmrSelector,
    RandomSelector,
    RecursiveSelector,
    SelectionResult,
    fisher_scores,
    make_selector,
    run_selection,
)
from .bench import (
    AlgorithmSpec,
    DatasetSpec,
    ExperimentConfig,
    Report,
    RunRecord,
    ScenarioSpec,
    SkippedCell,
    SyntheticSpec,
    bundled_synthetic_config,
    combo_from_tokens,
    combo_to_string,
    default_combos,
    generate_synthetic_log,
    run_experiment,
)

__version__ = "0.1.0"
