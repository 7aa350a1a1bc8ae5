"""ctrboost: gradient-boosted trees and categorical target-statistics encoders
for high-cardinality CTR-style tabular data, with a benchmark harness."""

from . import bench, data, encode, gbdt, metrics, synthetic
from .data import ColumnKind, ColumnMeta, Dataset, SplitSpec, from_arrays, load_csv, split, subsample
from .encode import EncoderMode, EncoderSpec, FittedEncoder
from .gbdt import GBDTConfig, Model, predict, train
from .metrics import EvalResult, RunAggregate, aggregate_runs, auroc, logloss

__version__ = "0.1.0"

__all__ = [
    "ColumnKind",
    "ColumnMeta",
    "Dataset",
    "EncoderMode",
    "EncoderSpec",
    "EvalResult",
    "FittedEncoder",
    "GBDTConfig",
    "Model",
    "RunAggregate",
    "SplitSpec",
    "aggregate_runs",
    "auroc",
    "bench",
    "data",
    "encode",
    "from_arrays",
    "gbdt",
    "load_csv",
    "logloss",
    "metrics",
    "predict",
    "split",
    "subsample",
    "synthetic",
    "train",
]
