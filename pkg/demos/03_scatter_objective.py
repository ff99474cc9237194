"""Build the four class-scatter matrices, blend them into the joint
objective, and use its eigenspace to pick a spread-out batch."""

import numpy as np

from flg import (
    TradeoffParams, build_objective, discriminant_projection,
    select_heterogeneous,
)
from flg.discriminant import scatter_set
from flg.fuzziness import FuzzinessRecord

rng = np.random.default_rng(3)

# Two elongated classes in 6 bands.
n = 40
X = np.vstack([
    rng.normal(0.0, 1.0, size=(n, 6)) * np.array([3, 1, 1, 1, 1, 1]),
    rng.normal(2.5, 1.0, size=(n, 6)) * np.array([3, 1, 1, 1, 1, 1]),
])
labels = np.array([1] * n + [2] * n)

scatters = scatter_set(X, labels, k1=5, k2=5)
for name in ("s_gb", "s_gw", "s_lb", "s_lw"):
    s = getattr(scatters, name)
    print(f"{name}: trace = {np.trace(s):10.2f}, symmetric to "
          f"{np.abs(s - s.T).max():.1e}")

# Endpoints collapse the blend to a single term.
g_between_only = build_objective(scatters, TradeoffParams(omega=1.0, psi=1.0, lam=0.5)).g
print("\nomega=1, psi=1 keeps the global between-scatter only:",
      np.allclose(g_between_only, scatters.s_gb))

obj = build_objective(scatters)  # all trade-offs at 0.5
quarter = 0.25 * (scatters.s_gb + scatters.s_lb - scatters.s_gw - scatters.s_lw)
print("defaults equal the quarter combination:", np.allclose(obj.g, quarter, atol=1e-12))

eigvals = np.sort(np.linalg.eigvalsh(obj.g))[::-1]
print(f"\nobjective spectrum (top 4): {np.round(eigvals[:4], 2)}")
u = discriminant_projection(obj, d=2)
print(f"projection U: {u.shape}, orthonormal to "
      f"{np.abs(u.T @ u - np.eye(2)).max():.1e}")

# Farthest-point selection spreads the batch across both clumps.
records = [
    FuzzinessRecord(fuzziness=float(rng.uniform(0.5, 1.0)), coord=(0, i),
                    actual=int(labels[i]), predicted=3 - int(labels[i]), pool_index=i)
    for i in range(len(X))
]
batch = select_heterogeneous(records, X, u, h=6)
picked_classes = labels[batch]
print(f"\nselected batch (pool indices): {batch}")
print(f"classes in the batch: {sorted(picked_classes.tolist())}")
