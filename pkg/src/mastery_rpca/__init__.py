"""Group and individual characteristics of students from a mastery matrix.

A students x topics matrix is split into a low-rank part (shared group
patterns) and a sparse part (individual deviations); biclusters are read
off the low-rank part and kept only if statistically significant.
"""

from .extraction import Bicluster, BiclusterSet, extract_biclusters, kmeans, topic_embedding
from .matrix import DenseMatrix, SvdFactors, frobenius_norm, l1_norm, nuclear_norm, svd
from .metrics import MetricReport, SparsePRF, evaluate_biclusters, sparse_prf
from .recovery import (
    RecoveryParams,
    RecoveryResult,
    default_alpha,
    default_lambda,
    estimate_sigma,
    objective,
    recover,
    soft_threshold,
    svt,
)
from .significance import NullModel, SignificanceReport, bicluster_pvalue, filter_biclusters, fit_null
from .synthgen import BiclusterDataSpec, GroundTruth, generate, inject_spikes, make_dataset, shuffle

__all__ = [
    "Bicluster", "BiclusterSet", "extract_biclusters", "kmeans", "topic_embedding",
    "DenseMatrix", "SvdFactors", "frobenius_norm", "l1_norm", "nuclear_norm", "svd",
    "MetricReport", "SparsePRF", "evaluate_biclusters", "sparse_prf",
    "RecoveryParams", "RecoveryResult", "default_alpha", "default_lambda", "estimate_sigma",
    "objective", "recover", "soft_threshold", "svt",
    "NullModel", "SignificanceReport", "bicluster_pvalue", "filter_biclusters", "fit_null",
    "BiclusterDataSpec", "GroundTruth", "generate", "inject_spikes", "make_dataset", "shuffle",
]

__version__ = "0.1.0"
