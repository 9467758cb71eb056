"""
Topic embeddings from right singular vectors
============================================

Topics that are weak for the same group of students end up close together
when each column of the low-rank part is described by its loadings on the
leading right singular vectors.
"""

import sys
from pathlib import Path

import numpy as np

from mastery_rpca import RecoveryParams, make_dataset, recover, topic_embedding
from mastery_rpca.render import scatter, write
from mastery_rpca.synthgen import preset_spec

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

D, truth = make_dataset(preset_spec("constant", seed=2))
X = recover(D, RecoveryParams.from_data(D)).low_rank

emb = topic_embedding(X, d=3)
print("embedding shape", emb.shape)

# label each topic by the planted block it belongs to (-1 for background)
group = np.full(D.shape[1], -1)
for g, (_, cols) in enumerate(truth.biclusters):
    group[cols] = g

###############################################################################
# Topics of the same block sit close together, far from other blocks, and
# background topics stay near the origin.

dist = np.linalg.norm(emb[:, None] - emb[None], axis=-1)
same = (group[:, None] == group[None]) & (group[:, None] >= 0) & ~np.eye(len(group), dtype=bool)
print(f"mean distance within a block  {dist[same].mean():.2f}")
print(f"mean distance between groups  {dist[group[:, None] != group[None]].mean():.2f}")
print(f"mean norm, block topics       {np.linalg.norm(emb[group >= 0], axis=1).mean():.2f}")
print(f"mean norm, background topics  {np.linalg.norm(emb[group < 0], axis=1).mean():.2f}")

write(out / "topic_embedding.ppm", scatter(emb[:, :2], size=256, dot=2))
print("scatter of the first two dimensions written to", out)
