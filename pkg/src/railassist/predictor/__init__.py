"""Late-minutes prediction: per-station model bundles for known trains,
chained journey prediction, interval calibration, generalization to unknown
trains, and the response-confidence gate."""

from .bundles import CI_LEVELS, SHARED_SCOPE, StationModelBundle, calibrate_intervals, empirical_half_widths
from .errors import (
    CorruptBundleError,
    PredictorError,
    StationNotOnRouteError,
    TrainingDataError,
    UnknownTrainError,
    UnsupportedVersionError,
)
from .features import FEATURE_NAMES, build_features
from .journey import (
    GateDecision,
    JourneyPrediction,
    PredictionRequest,
    StopPrediction,
    evaluate_ci_accuracy,
    gate_response,
    generalize_unknown,
    predict_journey,
)
from .store import BUNDLE_FORMAT_VERSION, load_registry, save_registry
from .training import ModelRegistry, TrainingMetadata, train_registry

__all__ = [
    "BUNDLE_FORMAT_VERSION",
    "CI_LEVELS",
    "FEATURE_NAMES",
    "SHARED_SCOPE",
    "CorruptBundleError",
    "GateDecision",
    "JourneyPrediction",
    "ModelRegistry",
    "PredictionRequest",
    "PredictorError",
    "StationModelBundle",
    "StationNotOnRouteError",
    "StopPrediction",
    "TrainingDataError",
    "TrainingMetadata",
    "UnknownTrainError",
    "UnsupportedVersionError",
    "build_features",
    "calibrate_intervals",
    "empirical_half_widths",
    "evaluate_ci_accuracy",
    "gate_response",
    "generalize_unknown",
    "load_registry",
    "predict_journey",
    "save_registry",
    "train_registry",
]
