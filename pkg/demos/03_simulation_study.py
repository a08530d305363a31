"""Reproduce the sensitivity and specificity grid over purity, LOH length and m.

Pass a replicate count as the first argument (default 100).  The full grid
with 100 replicates takes a few seconds.
"""

import sys

from cnnloh import SegmenterConfig
from cnnloh.simulate import ScenarioConfig, run_study, study_table

replicates = int(sys.argv[1]) if len(sys.argv) > 1 else 100
cells = run_study(
    loh_lens=[25, 50, 100],
    purities=[1.0, 0.79, 0.5],
    min_lens=[10, 25, 50],
    replicates=replicates,
    base=ScenarioConfig(seed=2024),
    segmenter=SegmenterConfig(),
)
print(f"mean sensitivity ({replicates} replicates per cell)")
print(study_table(cells, "mean_sensitivity"))
print("mean specificity")
print(study_table(cells, "mean_specificity"))
