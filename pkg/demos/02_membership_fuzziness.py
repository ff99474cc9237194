"""Train a classifier on a small draw, score the pool with row-stochastic
memberships, and walk through the fuzziness grouping that picks
misclassified candidates."""

import numpy as np

from flg import (
    SynthSpec, build_table, categorize, initial_split, normalize,
    predict_memberships, sample_fuzziness, select_candidates, synth_generate, train,
)

spec = SynthSpec(classes=3, bands=20, height=64, width=64, separation=1.0,
                 strip_weights=(1, 2, 5))
cube = normalize(synth_generate(spec, seed=7))
split = initial_split(cube, n=50, seed=0)

model = train("mlr", cube.spectra(split.train_idx), cube.labels_at(split.train_idx),
              num_classes=cube.num_classes, seed=0)
memberships = predict_memberships(model, cube.spectra(split.pool_idx))
print(f"membership matrix: {memberships.shape}, rows sum to "
      f"{memberships.sum(axis=1).min():.6f}..{memberships.sum(axis=1).max():.6f}")

# A crisp row has zero fuzziness, the uniform row is maximal.
print(f"\nfuzziness of (1,0,0):       {sample_fuzziness([1, 0, 0]):.4f}")
print(f"fuzziness of (1/3,1/3,1/3): {sample_fuzziness([1/3]*3):.4f}")

table = build_table(memberships, cube.labels_at(split.pool_idx), cube.coords(split.pool_idx))
groups = categorize(table)
wrong = sum(1 for r in table if r.predicted != r.actual)
print(f"\npool: {len(table)} samples, {wrong} currently misclassified")
print(f"low group  [0, 0.5]: {len(groups.low):>5} samples, median q1 = {groups.q1:.4f}")
print(f"high group (0.5, 1]: {len(groups.high):>5} samples, median q2 = {groups.q2:.4f}")

candidates = select_candidates(groups, k=250)
print(f"\ncandidates (misclassified, high group first): {len(candidates)}")
for rec in candidates[:5]:
    print(f"  fuzziness={rec.fuzziness:.3f} at {rec.coord}: "
          f"predicted {rec.predicted}, actually {rec.actual}")
