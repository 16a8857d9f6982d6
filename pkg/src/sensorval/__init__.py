"""Streaming validation for noisy telemetry.

Scores each reading with a Mamdani fuzzy system, cross-checks windowed
statistics against trip thresholds, reconstructs what it distrusts, and
summarizes sustained faults. The shipped rulebase targets ultrasonic
fill-level sensors but any three-input system in the portable ``.fis``
format drops in.
"""

from .detectors import (
    DegenerateDataError,
    DetectorVerdict,
    DimensionMismatchError,
    InsufficientDataError,
    PcaModel,
    Window,
    fit_from_csv,
    load_pca_model,
    pca_fit,
    save_pca_model,
    spe,
    spe_batch,
    spe_check,
    uncertainty_index,
    window_variance,
)
from .defaults import default_system
from .features import CrispInputs, Sample, ZeroIntervalError, extract, rate_of_change
from .fisfile import (
    Diagnostic,
    ParseResult,
    load_fis,
    parse_fis,
    save_fis,
    serialize_fis,
    validate_fis,
)
from .fuzzy import (
    AggregatedOutput,
    FuzzySystem,
    InferenceResult,
    LinguisticVariable,
    MembershipFunction,
    Rule,
    ZeroAreaError,
    control_surface,
    defuzzify_centroid,
    firing_strength,
    infer,
    infer_batch,
)
from .pipeline import (
    FLAG_NAMES,
    BatchResult,
    ConfigError,
    FaultReport,
    FaultTracker,
    PipelineConfig,
    SensorValidator,
    ValidationOutcome,
    Validator,
    flags_from_bits,
    run_batch,
)
from .simulate import (
    FAULT_KINDS,
    PROFILE_KINDS,
    FaultSpec,
    LabeledStream,
    SignalProfile,
    generate,
    inject,
    inject_all,
)

__version__ = "0.1.0"

__all__ = [
    "AggregatedOutput",
    "BatchResult",
    "ConfigError",
    "CrispInputs",
    "DegenerateDataError",
    "DetectorVerdict",
    "Diagnostic",
    "DimensionMismatchError",
    "FAULT_KINDS",
    "FLAG_NAMES",
    "FaultReport",
    "FaultSpec",
    "FaultTracker",
    "FuzzySystem",
    "InferenceResult",
    "InsufficientDataError",
    "LabeledStream",
    "LinguisticVariable",
    "MembershipFunction",
    "PROFILE_KINDS",
    "ParseResult",
    "PcaModel",
    "PipelineConfig",
    "Rule",
    "Sample",
    "SensorValidator",
    "SignalProfile",
    "ValidationOutcome",
    "Validator",
    "Window",
    "ZeroAreaError",
    "ZeroIntervalError",
    "control_surface",
    "default_system",
    "defuzzify_centroid",
    "extract",
    "firing_strength",
    "fit_from_csv",
    "flags_from_bits",
    "generate",
    "infer",
    "infer_batch",
    "inject",
    "inject_all",
    "load_fis",
    "load_pca_model",
    "parse_fis",
    "pca_fit",
    "rate_of_change",
    "run_batch",
    "save_fis",
    "save_pca_model",
    "serialize_fis",
    "spe",
    "spe_batch",
    "spe_check",
    "uncertainty_index",
    "validate_fis",
    "window_variance",
]
