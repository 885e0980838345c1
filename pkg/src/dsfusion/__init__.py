"""Dempster-Shafer evidence combination with multi-signal anomaly-detection
benchmarks: a bitmask-backed evidence core, mass-assignment builders, three
fusion classifiers, and a cross-validation harness with a CLI."""

from .evidence import (
    BeliefInterval,
    EvidenceError,
    Frame,
    FrameMismatchError,
    HypothesisSet,
    MassFunction,
    TotalConflictError,
    argmax_focal,
    belief,
    belief_interval,
    combine,
    combine_all,
    conflict,
    make_frame,
    make_mass,
    plausibility,
    vacuous_mass,
)
from .bpa import (
    BINARY_FRAME,
    BoundaryModel,
    DistanceModel,
    ScaledSigmoidBpa,
    SigmoidBpa,
    TableBpa,
    boundary_mass,
    bpa_from_dict,
    bpa_to_dict,
    distance_mass,
    fit_boundaries,
    fsv,
    modified_median_threshold,
    scaled_sigmoid_mass,
    select_feature,
    sigmoid_mass,
    table_mass,
)
from .classify import (
    BinaryModel,
    EmailModel,
    Prediction,
    ThreeClassModel,
    classifier_from_dict,
    classifier_to_dict,
    classify_binary,
    classify_email,
    classify_three_class,
    email_model_default,
    train_binary,
    train_three_class,
)
from .data import (
    DataFormatError,
    EmailGenConfig,
    EvalReport,
    FoldPlan,
    Record,
    RecordSet,
    ablation,
    evaluate,
    generate_email,
    load_email,
    load_iris,
    load_report,
    load_wbcd,
    make_folds,
    repeated_cv,
    write_email_csv,
    write_report,
)

__version__ = "0.1.0"
