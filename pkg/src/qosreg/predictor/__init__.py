"""QoS prediction from interface and source-code metrics."""

from .data import FeatureMatrix, ingest_csv, ingest_csv_text, split, write_csv
from .metrics import INTERFACE_FEATURES, InterfaceMetrics, compute_wsdl_metrics, entropy_bits, mae, rmse
from .pcr import (
    EvaluationReport,
    RegressionModel,
    choose_latent_count,
    cv_errors,
    evaluate,
    fit_and_evaluate,
    predict,
    train,
)

__all__ = [
    "EvaluationReport",
    "FeatureMatrix",
    "INTERFACE_FEATURES",
    "InterfaceMetrics",
    "RegressionModel",
    "choose_latent_count",
    "compute_wsdl_metrics",
    "cv_errors",
    "entropy_bits",
    "evaluate",
    "fit_and_evaluate",
    "ingest_csv",
    "ingest_csv_text",
    "mae",
    "predict",
    "rmse",
    "split",
    "train",
    "write_csv",
]
