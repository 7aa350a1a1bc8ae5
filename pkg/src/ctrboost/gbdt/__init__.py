from .binning import FeatureBins, build_bins, build_feature_bins
from .booster import CatMode, GBDTConfig, Model, TrainError, predict, predict_raw, train, with_cat_mode, with_seed
from .histogram import Histogram, build_histogram, build_histograms
from .loss import base_score, compute_grad_hess, sigmoid
from .model_io import ModelFormatError, load, save
from .splitting import SplitCandidate, best_categorical_split, best_numeric_split, split_gain
from .tree import FeatureSet, GrowParams, Tree, grow_tree

__all__ = [
    "CatMode",
    "FeatureBins",
    "FeatureSet",
    "GBDTConfig",
    "GrowParams",
    "Histogram",
    "Model",
    "ModelFormatError",
    "SplitCandidate",
    "TrainError",
    "Tree",
    "base_score",
    "best_categorical_split",
    "best_numeric_split",
    "build_bins",
    "build_feature_bins",
    "build_histogram",
    "build_histograms",
    "compute_grad_hess",
    "grow_tree",
    "load",
    "predict",
    "predict_raw",
    "save",
    "sigmoid",
    "split_gain",
    "train",
    "with_cat_mode",
    "with_seed",
]
