"""Checkerboard bicluster extraction and topic embeddings.

Rows (students) and columns (topics) of the recovered low-rank matrix are
clustered independently with k-means; every (row cluster, column cluster)
pair is a candidate block.  Blocks whose mean absolute value is at
background level are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from .matrix import MatrixLike, as_array, svd
from .recovery import estimate_sigma


@dataclass(frozen=True)
class Bicluster:
    """A set of rows and a set of columns, stored as sorted index tuples."""

    rows: Tuple[int, ...]
    cols: Tuple[int, ...]
    p_value: Optional[float] = None

    def __post_init__(self):
        rows = tuple(sorted({int(i) for i in self.rows}))
        cols = tuple(sorted({int(j) for j in self.cols}))
        if not rows or not cols:
            raise ValueError("a bicluster needs at least one row and one column")
        if rows[0] < 0 or cols[0] < 0:
            raise ValueError("indices must be non-negative")
        if self.p_value is not None and not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value {self.p_value} outside [0, 1]")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.rows), len(self.cols)

    @property
    def size(self) -> int:
        return len(self.rows) * len(self.cols)

    def cells(self) -> set:
        return {(i, j) for i in self.rows for j in self.cols}

    def to_json(self) -> dict:
        return {"rows": list(self.rows), "cols": list(self.cols), "p_value": self.p_value}


@dataclass
class BiclusterSet:
    biclusters: List[Bicluster] = field(default_factory=list)
    source_shape: Tuple[int, int] = (0, 0)

    def __post_init__(self):
        n, m = self.source_shape
        for b in self.biclusters:
            if b.rows[-1] >= n or b.cols[-1] >= m:
                raise ValueError(f"bicluster {b.shape} exceeds source shape {self.source_shape}")

    def __len__(self):
        return len(self.biclusters)

    def __iter__(self):
        return iter(self.biclusters)

    def __getitem__(self, i):
        return self.biclusters[i]

    @classmethod
    def from_index_pairs(cls, pairs: Iterable, shape: Tuple[int, int]) -> "BiclusterSet":
        return cls([Bicluster(r, c) for r, c in pairs], tuple(shape))

    def to_json(self) -> dict:
        return {
            "shape": list(self.source_shape),
            "biclusters": [b.to_json() for b in self.biclusters],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BiclusterSet":
        bics = [Bicluster(b["rows"], b["cols"], b.get("p_value")) for b in obj["biclusters"]]
        return cls(bics, tuple(obj["shape"]))


# -- k-means -------------------------------------------------------------------


def _kmeans_pp(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy k-means++: draw ``2 + log k`` D^2-weighted candidates per step
    and keep the one that lowers the potential most."""
    n = X.shape[0]
    trials = 2 + int(np.log(k))
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            cand = rng.integers(n, size=trials)
        else:
            cand = np.searchsorted(np.cumsum(d2), rng.random(trials) * total, side="right")
            cand = np.minimum(cand, n - 1)
        cand_d2 = np.minimum(d2, cdist(X[cand], X, "sqeuclidean"))
        best = int(np.argmin(cand_d2.sum(axis=1)))
        centers[c] = X[cand[best]]
        d2 = cand_d2[best]
    return centers


def _lloyd(X, centers, max_iter):
    k, n = centers.shape[0], X.shape[0]
    labels = None
    for _ in range(max_iter):
        dist = cdist(X, centers, "sqeuclidean")
        new = np.argmin(dist, axis=1)
        counts = np.bincount(new, minlength=k)
        own = dist[np.arange(n), new]
        for c in np.flatnonzero(counts == 0):
            # re-seed from the farthest point whose cluster can spare it
            movable = counts[new] > 1
            if not movable.any():
                break
            far = int(np.argmax(np.where(movable, own, -1.0)))
            counts[new[far]] -= 1
            new[far] = c
            counts[c] = 1
            own[far] = 0.0
        for c in np.flatnonzero(counts):
            centers[c] = X[new == c].mean(axis=0)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
    wcss = float(np.sum((X - centers[labels]) ** 2))
    return labels, wcss


def kmeans(
    points, k: int, seed: int = 0, n_init: int = 10, max_iter: int = 300
) -> np.ndarray:
    """Lloyd's k-means with k-means++ seeding; best of ``n_init`` restarts.

    Returns an integer label per point.  Ties in within-cluster sum of
    squares go to the earliest restart, so the result is a deterministic
    function of ``seed``.
    """
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points ({n})")
    rng = np.random.default_rng(seed)
    best, best_wcss = None, np.inf
    for _ in range(n_init):
        labels, wcss = _lloyd(X, _kmeans_pp(X, k, rng), max_iter)
        if wcss < best_wcss:
            best, best_wcss = labels, wcss
    return _relabel(best)


def _relabel(labels: np.ndarray) -> np.ndarray:
    """Number clusters by first appearance so labels are canonical."""
    order = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        out[i] = order.setdefault(int(lab), len(order))
    return out


def wcss(points, labels) -> float:
    X = np.asarray(points, dtype=np.float64)
    total = 0.0
    for c in np.unique(labels):
        grp = X[labels == c]
        total += float(np.sum((grp - grp.mean(axis=0)) ** 2))
    return total


def silhouette(points, labels) -> float:
    """Mean silhouette coefficient (0 when there is a single cluster)."""
    X = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    uniq = np.unique(labels)
    if uniq.size < 2:
        return 0.0
    dist = cdist(X, X)
    s = np.zeros(len(X))
    for i in range(len(X)):
        same = labels == labels[i]
        if same.sum() <= 1:
            continue
        a = dist[i, same].sum() / (same.sum() - 1)
        b = min(dist[i, labels == c].mean() for c in uniq if c != labels[i])
        s[i] = (b - a) / max(a, b) if max(a, b) > 0 else 0.0
    return float(s.mean())


def choose_k(points, k_range: Sequence[int] = range(2, 13), seed: int = 0) -> int:
    """Pick the k with the highest silhouette among feasible candidates."""
    X = np.asarray(points, dtype=np.float64)
    candidates = [k for k in k_range if 2 <= k < len(X)]
    if not candidates:
        return 1
    scores = [silhouette(X, kmeans(X, k, seed)) for k in candidates]
    return candidates[int(np.argmax(scores))]


# -- biclusters ----------------------------------------------------------------


def extract_biclusters(
    X: MatrixLike,
    k_rows: int,
    k_cols: int,
    seed: int = 0,
    flat_threshold: Optional[float] = None,
    reference: Optional[MatrixLike] = None,
) -> BiclusterSet:
    """Checkerboard biclusters of a (low-rank) matrix.

    Parameters
    ----------
    X : matrix
        Usually the recovered low-rank component.
    k_rows, k_cols : int
        Number of row and column clusters.
    seed : int
        Seed for both k-means runs.
    flat_threshold : float, optional
        Blocks with mean absolute value below this are dropped.  Defaults to
        half the MAD noise scale of ``reference`` (or of ``X`` when no
        reference is given).
    reference : matrix, optional
        The observed matrix the noise scale is estimated from.

    Returns
    -------
    BiclusterSet
        Surviving blocks ordered by (row cluster, column cluster).
    """
    A = as_array(X)
    n, m = A.shape
    if not 1 <= k_rows <= n:
        raise ValueError(f"k_rows must lie in [1, {n}]")
    if not 1 <= k_cols <= m:
        raise ValueError(f"k_cols must lie in [1, {m}]")
    if flat_threshold is None:
        flat_threshold = 0.5 * estimate_sigma(A if reference is None else as_array(reference))
    row_lab = kmeans(A, k_rows, seed)
    col_lab = kmeans(A.T, k_cols, seed + 1)
    out = []
    for rc in range(k_rows):
        rows = np.flatnonzero(row_lab == rc)
        if rows.size == 0:
            continue
        for cc in range(k_cols):
            cols = np.flatnonzero(col_lab == cc)
            if cols.size == 0:
                continue
            if np.mean(np.abs(A[np.ix_(rows, cols)])) <= flat_threshold:
                continue
            out.append(Bicluster(rows, cols))
    return BiclusterSet(out, (n, m))


def topic_embedding(X: MatrixLike, d: int = 3) -> np.ndarray:
    """Per-column latent features from the top ``d`` right singular vectors.

    Row ``j`` of the result is ``V[j, :d] * s[:d]``.
    """
    A = as_array(X)
    if not 1 <= d <= min(A.shape):
        raise ValueError(f"d must lie in [1, {min(A.shape)}]")
    f = svd(A)
    return f.right_vectors[:, :d] * f.singular_values[:d]
