"""Synthetic bicluster benchmarks with planted sparse spikes.

Four bicluster kinds are supported, each planted on a contiguous disjoint
block before an optional shuffle:

``constant``     ``signal + noise``
``shift``        ``base + shift_i + noise``
``scale``        ``base * scale_i + noise``
``shift_scale``  ``base * scale_i + shift_i + noise``

``base`` is drawn once per bicluster and ``shift_i`` / ``scale_i`` once per
bicluster row, so every noiseless block row is constant.  Cells outside the
blocks hold N(0, background_noise_sd^2) noise.

Randomness
----------
Every draw comes from ``numpy.random.Generator(PCG64(seed))`` (the 128-bit
state permuted congruential generator with 64-bit output).  Normal variates
use numpy's ziggurat sampler and uniforms the standard 53-bit conversion, so
a given seed reproduces bit-identical matrices with any numpy >= 1.17.
Independent streams for sub-steps are derived with :func:`stage_seed`.
"""

from __future__ import annotations

import ast
import hashlib
import re
from dataclasses import asdict, dataclass, fields, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .matrix import MatrixLike, as_array

KINDS = ("constant", "shift", "scale", "shift_scale")


class ConfigError(ValueError):
    """Invalid or infeasible data specification."""


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def stage_seed(seed: int, stage: str) -> int:
    """Derive a 64-bit seed for a named stage from a master seed."""
    digest = hashlib.sha256(f"{int(seed)}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class BiclusterDataSpec:
    """Parameters of one synthetic dataset.

    Field names follow the usual generator keywords; ``bicluster_noise`` is
    a per-cluster standard deviation (a scalar is broadcast).
    """

    kind: str = "constant"
    n_rows: int = 300
    n_cols: int = 50
    n_clusts: int = 5
    rows_per_cluster: int = 5
    cols_per_cluster: int = 8
    bicluster_signal: float = 5.0
    bicluster_noise: Tuple[float, ...] = (1.0,)
    background_noise_sd: float = 1.0
    base_loc: float = 0.0
    base_scale: float = 1.0
    shift_loc: float = 0.0
    shift_scale: float = 1.0
    scale_loc: float = 1.0
    scale_scale: float = 1.0
    shuffle: bool = True
    seed: int = 0
    sparse_prob: float = 0.0
    sparse_value: float = 6.0

    def __post_init__(self):
        noise = self.bicluster_noise
        if np.isscalar(noise):
            noise = (float(noise),)
        object.__setattr__(self, "bicluster_noise", tuple(float(x) for x in noise))
        self.validate()

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        for name in ("n_rows", "n_cols"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("n_clusts", "rows_per_cluster", "cols_per_cluster"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.n_clusts * self.rows_per_cluster > self.n_rows:
            raise ConfigError(
                f"{self.n_clusts} clusters of {self.rows_per_cluster} rows do not fit "
                f"in {self.n_rows} rows without overlap"
            )
        if self.n_clusts * self.cols_per_cluster > self.n_cols:
            raise ConfigError(
                f"{self.n_clusts} clusters of {self.cols_per_cluster} columns do not fit "
                f"in {self.n_cols} columns without overlap"
            )
        if self.n_clusts > 0 and (self.rows_per_cluster < 1 or self.cols_per_cluster < 1):
            raise ConfigError("block sizes must be >= 1 when clusters are planted")
        sds = ("background_noise_sd", "base_scale", "shift_scale", "scale_scale")
        for name in sds:
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if any(x < 0 for x in self.bicluster_noise):
            raise ConfigError("bicluster_noise entries must be >= 0")
        if len(self.bicluster_noise) not in (1, self.n_clusts) and self.n_clusts > 0:
            raise ConfigError(
                f"bicluster_noise has {len(self.bicluster_noise)} entries for {self.n_clusts} clusters"
            )
        if not 0.0 <= self.sparse_prob <= 1.0:
            raise ConfigError("sparse_prob must lie in [0, 1]")

    def cluster_noise(self, c: int) -> float:
        if len(self.bicluster_noise) == 1:
            return self.bicluster_noise[0]
        return self.bicluster_noise[c]


@dataclass
class GroundTruth:
    """Planted biclusters (row and column index arrays) and the spike mask."""

    biclusters: List[Tuple[np.ndarray, np.ndarray]]
    spike_mask: np.ndarray

    def to_json(self) -> dict:
        return {
            "biclusters": [
                {"rows": sorted(int(i) for i in r), "cols": sorted(int(j) for j in c)}
                for r, c in self.biclusters
            ],
            "spikes": [[int(i), int(j)] for i, j in np.argwhere(self.spike_mask)],
        }

    @classmethod
    def from_json(cls, obj: dict, shape: Tuple[int, int]) -> "GroundTruth":
        mask = np.zeros(shape, dtype=bool)
        for i, j in obj.get("spikes", []):
            mask[i, j] = True
        bics = [
            (np.array(b["rows"], dtype=int), np.array(b["cols"], dtype=int))
            for b in obj.get("biclusters", [])
        ]
        return cls(bics, mask)


# Benchmark presets, 300 x 50 with five planted blocks.  Block geometry is
# only pinned for the constant kind, so every kind reuses its 5 x 8 blocks.
PRESETS = {
    "constant": dict(
        kind="constant", n_rows=300, n_cols=50, n_clusts=5, bicluster_signal=5.0,
        rows_per_cluster=5, cols_per_cluster=8, bicluster_noise=(1.0,),
        background_noise_sd=1.0, shuffle=True,
    ),
    "shift": dict(
        kind="shift", n_rows=300, n_cols=50, n_clusts=5, bicluster_noise=(0.01,) * 5,
        background_noise_sd=1.0, base_loc=1.0, shift_loc=1.0, shift_scale=3.0, shuffle=True,
    ),
    "scale": dict(
        kind="scale", n_rows=300, n_cols=50, n_clusts=5, bicluster_noise=(0.01,) * 5,
        base_loc=1.0, scale_scale=3.0, scale_loc=0.0, shuffle=True,
    ),
    "shift_scale": dict(
        kind="shift_scale", n_rows=300, n_cols=50, n_clusts=5, bicluster_noise=(0.01,) * 5,
        base_scale=1.0, scale_scale=2.0, shift_scale=3.0, shuffle=True,
    ),
}


def preset_spec(kind: str, seed: int = 0, **overrides) -> BiclusterDataSpec:
    """Benchmark dataset of the given kind, with 1% spikes of value 6."""
    if kind not in PRESETS:
        raise ConfigError(f"unknown kind {kind!r}")
    params = dict(PRESETS[kind], seed=seed, sparse_prob=0.01, sparse_value=6.0)
    params.update(overrides)
    return BiclusterDataSpec(**params)


def _block_values(spec: BiclusterDataSpec, c: int, rng: np.random.Generator) -> np.ndarray:
    r, k = spec.rows_per_cluster, spec.cols_per_cluster
    if spec.kind == "constant":
        pattern = np.full((r, k), spec.bicluster_signal)
    else:
        base = rng.normal(spec.base_loc, spec.base_scale)
        shift = np.zeros(r)
        scale = np.ones(r)
        if spec.kind in ("shift", "shift_scale"):
            shift = rng.normal(spec.shift_loc, spec.shift_scale, size=r)
        if spec.kind in ("scale", "shift_scale"):
            scale = rng.normal(spec.scale_loc, spec.scale_scale, size=r)
        pattern = np.repeat((base * scale + shift)[:, None], k, axis=1)
    return pattern + rng.normal(0.0, spec.cluster_noise(c), size=(r, k))


def generate(spec: BiclusterDataSpec) -> Tuple[np.ndarray, GroundTruth]:
    """Draw a dataset from ``spec`` (spikes excluded, see :func:`make_dataset`).

    Bicluster ``c`` occupies rows ``[c*r, (c+1)*r)`` and columns
    ``[c*k, (c+1)*k)`` before shuffling.  When ``spec.shuffle`` is set the
    rows and columns are permuted and the ground truth remapped.
    """
    spec.validate()
    rng = make_rng(stage_seed(spec.seed, "generate"))
    D = rng.normal(0.0, spec.background_noise_sd, size=(spec.n_rows, spec.n_cols))
    bics = []
    r, k = spec.rows_per_cluster, spec.cols_per_cluster
    for c in range(spec.n_clusts):
        rows = np.arange(c * r, (c + 1) * r)
        cols = np.arange(c * k, (c + 1) * k)
        D[np.ix_(rows, cols)] = _block_values(spec, c, rng)
        bics.append((rows, cols))
    gt = GroundTruth(bics, np.zeros(D.shape, dtype=bool))
    if spec.shuffle:
        D, gt = shuffle(D, gt, stage_seed(spec.seed, "shuffle"))
    return D, gt


def inject_spikes(
    M: MatrixLike, p_s: float, magnitude: float = 6.0, seed: int = 0
) -> Tuple[np.ndarray, np.ndarray]:
    """Add ``magnitude`` to each entry independently with probability ``p_s``.

    Returns the spiked matrix and the boolean spike mask.
    """
    if not 0.0 <= p_s <= 1.0:
        raise ValueError("p_s must lie in [0, 1]")
    A = as_array(M)
    mask = make_rng(seed).random(A.shape) < p_s
    return A + magnitude * mask, mask


def shuffle(
    M: MatrixLike,
    gt: GroundTruth,
    seed: int = 0,
    row_order: Optional[Sequence[int]] = None,
    col_order: Optional[Sequence[int]] = None,
) -> Tuple[np.ndarray, GroundTruth]:
    """Permute rows and columns of ``M`` and remap the ground truth.

    Row ``i`` of the result is row ``row_order[i]`` of the input.  The
    orders are drawn from ``seed`` unless given explicitly.
    """
    A = as_array(M)
    n, m = A.shape
    if gt.spike_mask.shape != A.shape:
        raise ValueError("spike mask shape does not match the matrix")
    rng = make_rng(seed)
    rp = rng.permutation(n) if row_order is None else np.asarray(row_order, dtype=int)
    cp = rng.permutation(m) if col_order is None else np.asarray(col_order, dtype=int)
    rinv = np.empty(n, dtype=int)
    rinv[rp] = np.arange(n)
    cinv = np.empty(m, dtype=int)
    cinv[cp] = np.arange(m)
    bics = [(np.sort(rinv[rows]), np.sort(cinv[cols])) for rows, cols in gt.biclusters]
    return A[np.ix_(rp, cp)], GroundTruth(bics, gt.spike_mask[np.ix_(rp, cp)])


def make_dataset(spec: BiclusterDataSpec) -> Tuple[np.ndarray, GroundTruth]:
    """Plant biclusters, add spikes, then shuffle (if requested)."""
    D, gt = generate(replace(spec, shuffle=False))
    if spec.sparse_prob > 0:
        D, mask = inject_spikes(D, spec.sparse_prob, spec.sparse_value, stage_seed(spec.seed, "spikes"))
        gt = GroundTruth(gt.biclusters, mask)
    if spec.shuffle:
        D, gt = shuffle(D, gt, stage_seed(spec.seed, "shuffle"))
    return D, gt


# -- flat key=value config ---------------------------------------------------

# short config key spellings accepted as aliases
_KEY_ALIASES = {
    "nrows": "n_rows",
    "ncols": "n_cols",
    "nclusts": "n_clusts",
    "nclustrows": "rows_per_cluster",
    "nclustcols": "cols_per_cluster",
    "bicluster_signals": "bicluster_signal",
    "noise": "background_noise_sd",
    "type": "kind",
}
_REPEAT = re.compile(r"^\[\s*([^\]]+?)\s*\]\s*\*\s*(\d+)$")


def _parse_value(text: str):
    text = text.strip()
    m = _REPEAT.match(text)
    if m:
        return [ast.literal_eval(m.group(1))] * int(m.group(2))
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_spec(text: str) -> BiclusterDataSpec:
    """Parse a flat ``key = value`` config.

    Blank lines and ``#`` comments are ignored.  Keys are either field names
    of :class:`BiclusterDataSpec` or the short spellings (``nrows``,
    ``nclustrows``, ``bicluster_signals``, ``noise``, ...).  Values are
    Python literals; ``[0.01]*5`` is accepted.
    """
    valid = {f.name for f in fields(BiclusterDataSpec)}
    params = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _KEY_ALIASES.get(key, key)
        if key not in valid:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        params[key] = _parse_value(value)
    try:
        return BiclusterDataSpec(**params)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def format_spec(spec: BiclusterDataSpec) -> str:
    lines = []
    for k, v in asdict(spec).items():
        if isinstance(v, tuple):
            v = list(v)
        lines.append(f"{k} = {v!r}" if isinstance(v, str) else f"{k} = {v}")
    return "\n".join(lines) + "\n"
