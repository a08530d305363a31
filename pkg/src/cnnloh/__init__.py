"""Copy-neutral LOH detection in B-allele frequency data.

Transformed BAF is modelled as a mixture of a zero-inflated and a
one-inflated beta; a CUSUM scan with Monte-Carlo calibrated thresholds then
splits the sequence into alternating non-LOH / LOH segments.
"""

__version__ = "0.1.0"

from .cusum import (
    CusumTrace,
    Label,
    Segment,
    Segmentation,
    SegmenterConfig,
    Thresholds,
    calibrate,
    calibrate_threshold,
    cusum_scan,
    locate_change,
    segment,
)
from .estimation import EmConfig, EmReport, EstimationError, fit_em
from .evaluate import ConfusionCounts, Metrics, compare_to_gold, confusion, metrics
from .model import (
    MixtureModel,
    ModelError,
    OneInflatedBeta,
    ZeroInflatedBeta,
    derive_loh_model,
    log_density,
    sample,
    tbaf_transform,
)
from .simulate import LabeledSequence, ScenarioConfig, generate, run_study
