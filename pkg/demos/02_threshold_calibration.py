"""How the Monte-Carlo alarm threshold depends on the minimum segment length.

The threshold is a high quantile of ``R_m``, the largest CUSUM value reached
within the first ``m`` observations after a change.  Longer windows give the
statistic more time to climb, so the threshold grows with ``m``.
"""

import numpy as np

from cnnloh import MixtureModel
from cnnloh.cusum import calibrate_threshold, loh_pair, simulate_rm

model = MixtureModel.from_params(1 / 3, 0.1, 8.0, 0.2, 8.0)
non_loh, loh = loh_pair(model, delta=0.01)

print(" m   L(NonLOH->LOH)  L(LOH->NonLOH)")
for m in (5, 10, 25, 50, 100):
    l0 = calibrate_threshold(non_loh, loh, m, tol_a=0.05, n_sim=10_000, rng=1)
    l1 = calibrate_threshold(loh, non_loh, m, tol_a=0.05, n_sim=10_000, rng=2)
    print(f"{m:3d}   {l0:13.3f}  {l1:14.3f}")

# Coverage check on a fresh batch: about 95% of R_m draws stay below L.
l0 = calibrate_threshold(non_loh, loh, 25, 0.05, 10_000, rng=3)
fresh = simulate_rm(non_loh, loh, 25, 10_000, np.random.default_rng(4))
print(f"\nm=25: fresh-batch P(R_m < L) = {(fresh < l0).mean():.4f}")
