"""Multi-label classification with a random-projection network trained in
one least-squares shot, plus the evaluation toolkit around it: example-based
metrics, dataset statistics, cross-validation and timing benchmarks."""

from . import linalg
from .cv import CvReport, cross_validate, kfold_partition
from .data import (
    FieldCheck,
    MultiLabelDataset,
    VerificationReport,
    load_arff,
    load_delimited,
    save_delimited,
    split,
    subset,
    verify_against_spec,
)
from .elm import (
    ElmClassifier,
    deserialize_model,
    hidden_output,
    init_hidden_layer,
    load_model,
    save_model,
    serialize_model,
)
from .errors import (
    CalibrationError,
    DataFormatError,
    MlelmError,
    ModelFormatError,
    ParseError,
    ShapeError,
    SingularMatrixError,
)
from .metrics import (
    DatasetStats,
    MetricsReport,
    dataset_stats,
    example_based_metrics,
    hamming_loss,
)
from .multilabel import (
    ThresholdReport,
    apply_threshold,
    calibrate_threshold,
    decode_bipolar,
    encode_bipolar,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationError",
    "CvReport",
    "DataFormatError",
    "DatasetStats",
    "ElmClassifier",
    "FieldCheck",
    "MetricsReport",
    "MlelmError",
    "ModelFormatError",
    "MultiLabelDataset",
    "ParseError",
    "ShapeError",
    "SingularMatrixError",
    "ThresholdReport",
    "VerificationReport",
    "apply_threshold",
    "calibrate_threshold",
    "cross_validate",
    "dataset_stats",
    "decode_bipolar",
    "deserialize_model",
    "encode_bipolar",
    "example_based_metrics",
    "hamming_loss",
    "hidden_output",
    "init_hidden_layer",
    "kfold_partition",
    "linalg",
    "load_arff",
    "load_delimited",
    "load_model",
    "save_delimited",
    "save_model",
    "serialize_model",
    "split",
    "subset",
    "verify_against_spec",
]
