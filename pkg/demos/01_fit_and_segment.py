"""Fit a non-LOH model on a clean stretch, then segment a sequence with one LOH block.

Run with ``python3 demos/01_fit_and_segment.py``.
"""

from cnnloh import SegmenterConfig, calibrate, fit_em, segment, tbaf_transform
from cnnloh.evaluate import compare_to_gold
from cnnloh.simulate import ScenarioConfig, generate

# A LOH-free training sequence stands in for a region known to be diploid.
train = generate(ScenarioConfig(total_len=2000, loh_len=0, seed=1))
report = fit_em(tbaf_transform(train.baf))
model = report.model
print(f"EM converged={report.converged} after {report.iterations} iterations")
print("fitted non-LOH model:", model.to_json())

# 80 LOH loci at 70% tumour purity, embedded in 1000 loci.
test = generate(ScenarioConfig(total_len=1000, loh_start=400, loh_len=80, purity=0.7, seed=2))
cfg = SegmenterConfig(min_len=25, seed=0)
thr = calibrate(model, cfg)
print(f"alarm thresholds: NonLOH->LOH {thr.l0:.2f}, LOH->NonLOH {thr.l1:.2f}")

seg = segment(tbaf_transform(test.baf), model, cfg, thr)
for s in seg.segments:
    print(f"  {s.start:5d}..{s.end:5d}  {s.label}")
m = compare_to_gold(test.truth, seg)
print(f"sensitivity {m.sensitivity:.3f}, specificity {m.specificity:.3f}")
