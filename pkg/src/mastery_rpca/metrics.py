"""External bicluster quality scores and spike-detection accuracy.

All six bicluster scores lie in [0, 1] with larger meaning closer to the
reference.  Empty inputs follow one convention throughout: two empty sets
agree perfectly (1.0), an empty set against a non-empty one scores 0.0.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .extraction import Bicluster, BiclusterSet


def _empty_convention(P, R) -> Optional[float]:
    if len(P) == 0 and len(R) == 0:
        return 1.0
    if len(P) == 0 or len(R) == 0:
        return 0.0
    return None


def _overlap(a, b) -> int:
    return len(set(a) & set(b))


def jaccard(b1: Bicluster, b2: Bicluster) -> float:
    """Cell-level Jaccard index of two biclusters."""
    inter = _overlap(b1.rows, b2.rows) * _overlap(b1.cols, b2.cols)
    return inter / (b1.size + b2.size - inter)


def row_jaccard(b1: Bicluster, b2: Bicluster) -> float:
    inter = _overlap(b1.rows, b2.rows)
    return inter / (len(b1.rows) + len(b2.rows) - inter)


def liu_wang_match(P: BiclusterSet, R: BiclusterSet) -> float:
    """Liu & Wang match score.

    For each reference bicluster take the best
    ``(|rows n| + |cols n|) / (|rows u| + |cols u|)`` over the predicted
    ones, then average over the reference set.
    """
    conv = _empty_convention(P, R)
    if conv is not None:
        return conv
    total = 0.0
    for r in R:
        best = 0.0
        for p in P:
            ir, ic = _overlap(p.rows, r.rows), _overlap(p.cols, r.cols)
            ur = len(p.rows) + len(r.rows) - ir
            uc = len(p.cols) + len(r.cols) - ic
            best = max(best, (ir + ic) / (ur + uc))
        total += best
    return total / len(R)


def _prelic_match(A: BiclusterSet, B: BiclusterSet) -> float:
    if len(A) == 0:
        return 0.0
    if len(B) == 0:
        return 0.0
    return sum(max(row_jaccard(a, b) for b in B) for a in A) / len(A)


def prelic_scores(P: BiclusterSet, R: BiclusterSet) -> Tuple[float, float]:
    """Prelic ``(relevance, recovery)`` from row-set Jaccard matches.

    Relevance asks how well each predicted bicluster is explained by some
    reference; recovery the reverse.
    """
    conv = _empty_convention(P, R)
    if conv is not None:
        return conv, conv
    return _prelic_match(P, R), _prelic_match(R, P)


def _cell_membership(S: BiclusterSet, shape) -> np.ndarray:
    """Boolean ``(n*m, |S|)`` membership of every cell in every bicluster."""
    n, m = shape
    out = np.zeros((n * m, len(S)), dtype=bool)
    for k, b in enumerate(S):
        idx = (np.asarray(b.rows)[:, None] * m + np.asarray(b.cols)[None, :]).ravel()
        out[idx, k] = True
    return out


def _shape_of(P: BiclusterSet, R: BiclusterSet):
    n = max(P.source_shape[0], R.source_shape[0])
    m = max(P.source_shape[1], R.source_shape[1])
    for b in list(P) + list(R):
        n, m = max(n, b.rows[-1] + 1), max(m, b.cols[-1] + 1)
    return n, m


def csi(P: BiclusterSet, R: BiclusterSet) -> float:
    """Soft co-association index over cell pairs.

    For every unordered pair of cells (self pairs included) count how many
    biclusters of each solution contain both.  The index is
    ``sum(min(c_P, c_R)) / sum(max(c_P, c_R))``.  Cells are grouped by their
    joint membership pattern so the sum runs over pattern pairs rather than
    all cell pairs.
    """
    conv = _empty_convention(P, R)
    if conv is not None:
        return conv
    shape = _shape_of(P, R)
    member = np.hstack([_cell_membership(P, shape), _cell_membership(R, shape)])
    covered = member.any(axis=1)
    patterns = Counter(map(bytes, np.packbits(member[covered], axis=1)))
    keys = list(patterns)
    unpacked = np.unpackbits(
        np.frombuffer(b"".join(keys), dtype=np.uint8).reshape(len(keys), -1), axis=1
    )[:, : member.shape[1]].astype(np.int64)
    sizes = np.array([patterns[k] for k in keys], dtype=np.float64)
    mp, mr = unpacked[:, : len(P)], unpacked[:, len(P):]
    cp, cr = mp @ mp.T, mr @ mr.T
    weight = np.outer(sizes, sizes)
    np.fill_diagonal(weight, sizes * (sizes + 1) / 2)
    weight = np.triu(weight)
    num = float(np.sum(weight * np.minimum(cp, cr)))
    den = float(np.sum(weight * np.maximum(cp, cr)))
    return num / den if den > 0 else 1.0


def _intersection_matrix(P: BiclusterSet, R: BiclusterSet) -> np.ndarray:
    return np.array(
        [[_overlap(p.rows, r.rows) * _overlap(p.cols, r.cols) for r in R] for p in P],
        dtype=np.float64,
    )


def max_weight_assignment(W) -> Tuple[np.ndarray, np.ndarray, float]:
    """One-to-one assignment maximising the total weight of a (rectangular) matrix."""
    W = np.asarray(W, dtype=np.float64)
    if W.size == 0:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int), 0.0
    rows, cols = linear_sum_assignment(W, maximize=True)
    return rows, cols, float(W[rows, cols].sum())


def clustering_error_similarity(P: BiclusterSet, R: BiclusterSet) -> float:
    """``1 - CE``: matched cell overlap over the size of the covered union.

    ``d_max`` is the largest total cell intersection over one-to-one
    matchings of predicted to reference biclusters; the union counts each
    cell as often as the larger of its two coverage multiplicities.
    """
    conv = _empty_convention(P, R)
    if conv is not None:
        return conv
    shape = _shape_of(P, R)
    _, _, dmax = max_weight_assignment(_intersection_matrix(P, R))
    cover_p = _cell_membership(P, shape).sum(axis=1)
    cover_r = _cell_membership(R, shape).sum(axis=1)
    union = float(np.maximum(cover_p, cover_r).sum())
    return dmax / union


def fabia_consensus(P: BiclusterSet, R: BiclusterSet) -> float:
    """Consensus score: best one-to-one sum of Jaccard indices over ``max(|P|, |R|)``."""
    conv = _empty_convention(P, R)
    if conv is not None:
        return conv
    S = np.array([[jaccard(p, r) for r in R] for p in P])
    _, _, total = max_weight_assignment(S)
    return total / max(len(P), len(R))


@dataclass(frozen=True)
class MetricReport:
    liu_wang: float
    prelic_recovery: float
    prelic_relevance: float
    csi: float
    clustering_error_similarity: float
    fabia_consensus: float

    def to_json(self) -> dict:
        return asdict(self)


def evaluate_biclusters(P: BiclusterSet, R: BiclusterSet) -> MetricReport:
    relevance, recovery = prelic_scores(P, R)
    return MetricReport(
        liu_wang=liu_wang_match(P, R),
        prelic_recovery=recovery,
        prelic_relevance=relevance,
        csi=csi(P, R),
        clustering_error_similarity=clustering_error_similarity(P, R),
        fabia_consensus=fabia_consensus(P, R),
    )


@dataclass(frozen=True)
class SparsePRF:
    precision: float
    recall: float
    f1: float
    true_positives: int
    false_positives: int
    false_negatives: int

    def to_json(self) -> dict:
        return asdict(self)


def sparse_prf(predicted_mask, true_mask) -> SparsePRF:
    """Precision, recall and F1 of a predicted spike mask.

    Precision (recall) is 0 when nothing is predicted (nothing is true).
    """
    pred = np.asarray(predicted_mask, dtype=bool)
    true = np.asarray(true_mask, dtype=bool)
    if pred.shape != true.shape:
        raise ValueError(f"mask shapes differ: {pred.shape} vs {true.shape}")
    tp = int(np.count_nonzero(pred & true))
    fp = int(np.count_nonzero(pred & ~true))
    fn = int(np.count_nonzero(~pred & true))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return SparsePRF(precision, recall, f1, tp, fp, fn)


def spike_mask(E, threshold: float = 1e-6) -> np.ndarray:
    """Entries of a recovered sparse component treated as detected spikes."""
    return np.abs(np.asarray(E, dtype=np.float64)) > threshold
