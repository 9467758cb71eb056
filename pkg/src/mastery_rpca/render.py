"""Binary PPM (P6) images: matrix heatmaps and 2-D scatter plots.

Heatmap colour map: values are divided by the largest absolute entry and
mapped linearly through three anchors, blue (49, 54, 149) at -1, white
(255, 255, 255) at 0 and red (165, 0, 38) at +1.  Channels are rounded
half-to-even, so the bytes depend only on the input values.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .matrix import MatrixLike, as_array

NEG = np.array([49.0, 54.0, 149.0])
MID = np.array([255.0, 255.0, 255.0])
POS = np.array([165.0, 0.0, 38.0])


def colorize(A: np.ndarray) -> np.ndarray:
    """``(n, m, 3)`` uint8 colours for a real matrix."""
    A = np.asarray(A, dtype=np.float64)
    vmax = np.max(np.abs(A)) if A.size else 0.0
    t = A / vmax if vmax > 0 else np.zeros_like(A)
    t = t[..., None]
    rgb = np.where(t >= 0, MID + t * (POS - MID), MID - t * (NEG - MID))
    return np.rint(rgb).astype(np.uint8)


def ppm_bytes(rgb: np.ndarray) -> bytes:
    h, w, _ = rgb.shape
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(rgb, dtype=np.uint8).tobytes()


def read_ppm(data: bytes) -> np.ndarray:
    """Decode a P6 image written by this module."""
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h = (int(x) for x in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)


def heatmap(M: MatrixLike, cell: int = 4) -> bytes:
    """Heatmap of ``M`` with each entry drawn as a ``cell x cell`` square."""
    rgb = colorize(as_array(M))
    rgb = np.repeat(np.repeat(rgb, cell, axis=0), cell, axis=1)
    return ppm_bytes(rgb)


def scatter(points, size: int = 256, dot: int = 2) -> bytes:
    """Black dots for the first two coordinates of ``points`` on white."""
    P = np.asarray(points, dtype=np.float64)
    img = np.full((size, size, 3), 255, dtype=np.uint8)
    if P.size == 0:
        return ppm_bytes(img)
    if P.ndim == 1:
        P = P[:, None]
    if P.shape[1] == 1:
        P = np.hstack([P, np.zeros_like(P)])
    margin = 4 * dot
    xy = P[:, :2]
    lo, hi = xy.min(axis=0), xy.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    pix = margin + np.rint((xy - lo) / span * (size - 1 - 2 * margin)).astype(int)
    for x, y in pix:
        r = size - 1 - y
        img[max(r - dot, 0): r + dot + 1, max(x - dot, 0): x + dot + 1] = 0
    return ppm_bytes(img)


def write(path, data: bytes) -> None:
    Path(path).write_bytes(data)
