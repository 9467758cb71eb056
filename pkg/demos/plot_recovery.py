"""
Splitting a mastery matrix into group and individual parts
==========================================================

A synthetic students x topics matrix with five planted blocks and a
sprinkling of large individual spikes is decomposed into a low-rank part
and a sparse part.  Heatmaps of all three matrices are written as PPM files.
"""

import sys
from pathlib import Path

import numpy as np

from mastery_rpca import RecoveryParams, make_dataset, recover, sparse_prf
from mastery_rpca.metrics import spike_mask
from mastery_rpca.render import heatmap, write
from mastery_rpca.synthgen import preset_spec

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

# 300 students, 50 topics, 1% of entries carry a +6 spike
D, truth = make_dataset(preset_spec("constant", seed=0))
print("data", D.shape, "planted spikes:", int(truth.spike_mask.sum()))

###############################################################################
# The weights come from the noise level of the data itself.

params = RecoveryParams.from_data(D)
print(f"alpha = {params.alpha:.3f}, beta = {params.beta:.3f}")

res = recover(D, params)
print(f"{res.iterations} sweeps, converged: {res.converged}, rank of X: {res.rank()}")

###############################################################################
# Individual deviations: how many planted spikes ended up in E?

prf = sparse_prf(spike_mask(res.sparse), truth.spike_mask)
print(f"spike recall {prf.recall:.3f}, precision {prf.precision:.3f}, F1 {prf.f1:.3f}")

# sort rows and columns so the planted blocks line up on the diagonal
rows = np.concatenate([r for r, _ in truth.biclusters] +
                      [np.setdiff1d(np.arange(D.shape[0]), np.concatenate([r for r, _ in truth.biclusters]))])
cols = np.concatenate([c for _, c in truth.biclusters] +
                      [np.setdiff1d(np.arange(D.shape[1]), np.concatenate([c for _, c in truth.biclusters]))])
for name, M in (("D", D), ("X", res.low_rank), ("E", res.sparse)):
    write(out / f"recovery_{name}.ppm", heatmap(M[np.ix_(rows, cols)], cell=2))
print("heatmaps written to", out)
