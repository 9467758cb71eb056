"""Transforms that turn raw score tables into weakness matrices.

Scores where high is good are flipped so that large entries mark weak
mastery, then optionally binned into levels (0 = excelling, 9 = weakest).
"""

from __future__ import annotations

import numpy as np

from .matrix import MatrixLike, as_array


class RangeError(ValueError):
    """Input values outside the range a transform accepts."""

    def __init__(self, what, positions, lo, hi):
        self.positions = [tuple(int(x) for x in p) for p in positions]
        shown = ", ".join(f"({i},{j})" for i, j in self.positions[:20])
        more = "" if len(self.positions) <= 20 else f" and {len(self.positions) - 20} more"
        super().__init__(f"{what}: values outside [{lo}, {hi}] at {shown}{more}")


def _check_range(A, lo, hi, what):
    bad = np.argwhere((A < lo) | (A > hi))
    if bad.size:
        raise RangeError(what, bad, lo, hi)


def invert_scores(M: MatrixLike, top: float = 100.0) -> np.ndarray:
    """``top - score`` for scores in ``[0, top]``."""
    A = as_array(M)
    _check_range(A, 0.0, top, "invert")
    return top - A


def invert_unit(M: MatrixLike) -> np.ndarray:
    """``1 - x`` for mastery probabilities in ``[0, 1]``."""
    return invert_scores(M, 1.0)


def bin_levels(M: MatrixLike, n_levels: int = 10, lo: float = 0.0, hi: float = 100.0) -> np.ndarray:
    """Equal-width levels ``0 .. n_levels-1`` over ``[lo, hi]``.

    The top edge belongs to the last level, so with the defaults 100 maps
    to 9 and 0 to 0.
    """
    if n_levels < 1:
        raise ValueError("n_levels must be >= 1")
    if not hi > lo:
        raise ValueError("hi must exceed lo")
    A = as_array(M)
    _check_range(A, lo, hi, "bin")
    width = (hi - lo) / n_levels
    return np.clip(np.floor((A - lo) / width), 0, n_levels - 1)


def apply(M: MatrixLike, modes, n_levels: int = 10, lo: float = 0.0, hi: float = 100.0) -> np.ndarray:
    """Apply a sequence of modes (``invert``, ``invert-unit``, ``bin``) in order."""
    A = as_array(M)
    for mode in modes:
        if mode == "invert":
            A = invert_scores(A)
        elif mode == "invert-unit":
            A = invert_unit(A)
        elif mode == "bin":
            A = bin_levels(A, n_levels, lo, hi)
        else:
            raise ValueError(f"unknown preprocessing mode {mode!r}")
    return A
