"""Statistical significance of biclusters with Bonferroni filtering.

The observed matrix is discretised into ``L`` equal-width levels and a
column-wise null model (independent level frequencies per column, add-one
smoothed) is fitted.  For a bicluster we take the modal level of each of its
columns over its rows as the bicluster pattern.  Under the null, a random row
reproduces that pattern with probability

    q = prod_j P_j(level_j)

and the p-value is the chance that at least ``|rows|`` of the ``n`` rows do
so, ``P(Binomial(n, q) >= |rows|)``.  The tail is summed in log space.

This is a simplified stand-in for pattern-specific significance tests: it
uses only the modal constant pattern per column, treats columns as
independent, and assumes every bicluster row carries the pattern.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import gammaln, logsumexp

from .extraction import Bicluster, BiclusterSet
from .matrix import MatrixLike, as_array


class DegenerateModelWarning(UserWarning):
    pass


@dataclass(frozen=True)
class NullModel:
    """Per-column level probabilities over shared equal-width boundaries."""

    n_levels: int
    probabilities: np.ndarray  # (n_cols, n_levels)
    boundaries: np.ndarray  # (n_levels + 1,)
    n_rows: int
    degenerate: bool = False

    def discretize(self, values) -> np.ndarray:
        """Map values to level indices ``0 .. n_levels - 1``."""
        v = np.asarray(values, dtype=np.float64)
        if self.degenerate:
            return np.zeros(v.shape, dtype=int)
        inner = self.boundaries[1:-1]
        return np.clip(np.searchsorted(inner, v, side="right"), 0, self.n_levels - 1)


def fit_null(D: MatrixLike, n_levels: int = 10) -> NullModel:
    """Fit the column-wise level-frequency null model.

    A constant matrix has no range to discretise; it yields a single-level
    model flagged ``degenerate``.
    """
    if n_levels < 2:
        raise ValueError("n_levels must be >= 2")
    A = as_array(D)
    n, m = A.shape
    lo, hi = float(A.min()), float(A.max())
    if not hi > lo:
        return NullModel(1, np.ones((m, 1)), np.array([lo, lo]), n, degenerate=True)
    bounds = np.linspace(lo, hi, n_levels + 1)
    model = NullModel(n_levels, np.empty((m, n_levels)), bounds, n)
    levels = model.discretize(A)
    counts = np.stack([np.bincount(levels[:, j], minlength=n_levels) for j in range(m)])
    probs = (counts + 1.0) / (n + n_levels)
    return NullModel(n_levels, probs, bounds, n)


def binomial_sf(k: int, n: int, q: float) -> float:
    """``P(Binomial(n, q) >= k)`` by a log-space sum of the upper tail."""
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    if q <= 0.0:
        return 0.0
    if q >= 1.0:
        return 1.0
    i = np.arange(k, n + 1)
    logpmf = (
        gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)
        + i * math.log(q) + (n - i) * math.log1p(-q)
    )
    return float(min(1.0, math.exp(logsumexp(logpmf))))


def pattern_probability(b: Bicluster, D: MatrixLike, model: NullModel) -> float:
    """Null probability that one random row shows the bicluster's pattern."""
    A = as_array(D)
    sub = model.discretize(A[np.ix_(b.rows, b.cols)])
    logq = 0.0
    for jj, j in enumerate(b.cols):
        modal = int(np.argmax(np.bincount(sub[:, jj], minlength=model.n_levels)))
        logq += math.log(model.probabilities[j, modal])
    return math.exp(logq)


def bicluster_pvalue(b: Bicluster, D: MatrixLike, model: NullModel) -> float:
    A = as_array(D)
    n = A.shape[0]
    if b.rows[-1] >= n or b.cols[-1] >= A.shape[1]:
        raise ValueError("bicluster indices exceed the matrix shape")
    if model.degenerate:
        warnings.warn("null model is degenerate (constant matrix); p-value set to 1",
                      DegenerateModelWarning, stacklevel=2)
        return 1.0
    return binomial_sf(len(b.rows), n, pattern_probability(b, A, model))


@dataclass(frozen=True)
class SignificanceResult:
    bicluster: Bicluster
    p_value: float
    corrected_threshold: float
    passed: bool


@dataclass
class SignificanceReport:
    results: List[SignificanceResult] = field(default_factory=list)
    n_tested: int = 0
    global_alpha: float = 0.05
    source_shape: tuple = (0, 0)
    degenerate: bool = False

    @property
    def corrected_threshold(self) -> Optional[float]:
        return self.global_alpha / self.n_tested if self.n_tested else None

    def passed(self) -> BiclusterSet:
        """Surviving biclusters with their p-values attached."""
        keep = [
            Bicluster(r.bicluster.rows, r.bicluster.cols, r.p_value)
            for r in self.results if r.passed
        ]
        return BiclusterSet(keep, self.source_shape)

    def to_json(self) -> dict:
        return {
            "alpha": self.global_alpha,
            "n_tested": self.n_tested,
            "threshold": self.corrected_threshold,
            "results": [
                {
                    "rows": list(r.bicluster.rows),
                    "cols": list(r.bicluster.cols),
                    "p_value": r.p_value,
                    "pass": r.passed,
                }
                for r in self.results
            ],
        }


def bonferroni_threshold(global_alpha: float, n_tested: int) -> float:
    return global_alpha / n_tested


def filter_biclusters(
    biclusters: BiclusterSet,
    D: MatrixLike,
    global_alpha: float = 0.05,
    n_levels: int = 10,
) -> SignificanceReport:
    """Score every candidate and keep those below ``global_alpha / n_tested``."""
    if not 0.0 < global_alpha < 1.0:
        raise ValueError("global_alpha must lie in (0, 1)")
    A = as_array(D)
    report = SignificanceReport(n_tested=len(biclusters), global_alpha=global_alpha,
                                source_shape=A.shape)
    if not len(biclusters):
        return report
    model = fit_null(A, n_levels)
    report.degenerate = model.degenerate
    thr = bonferroni_threshold(global_alpha, len(biclusters))
    with warnings.catch_warnings():
        if model.degenerate:
            warnings.simplefilter("ignore", DegenerateModelWarning)
        for b in biclusters:
            p = bicluster_pvalue(b, A, model)
            report.results.append(SignificanceResult(b, p, thr, p <= thr))
    if model.degenerate:
        warnings.warn("null model is degenerate (constant matrix); all p-values are 1",
                      DegenerateModelWarning, stacklevel=2)
    return report
