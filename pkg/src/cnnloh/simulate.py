"""Synthetic labeled BAF sequences and the sensitivity/specificity study.

Sequences follow a fixed layout: non-LOH, then a single copy-neutral LOH
block of length ``loh_len`` starting at ``loh_start``, then non-LOH again.
Observations come from a purity-aware generative model, or, when a pool of
real observations is supplied, by resampling that pool with replacement.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt

from .cusum import Label, SegmenterConfig, calibrate, segment
from .estimation import EmConfig, fit_em
from .evaluate import ConfusionCounts, confusion, metrics
from .model import FloatArray, tbaf_transform

_log = logging.getLogger(__name__)

ATOM_PROB = 0.9
DEFAULT_TRAIN_LEN = 2000


@dataclass(frozen=True)
class ScenarioConfig:
    total_len: int = 1000
    loh_start: int = 500
    loh_len: int = 0
    purity: float = 1.0
    noise_sd: float = 0.03
    het_rate: float = 0.33
    seed: int = 0

    def __post_init__(self) -> None:
        if self.total_len < 0 or self.loh_start < 0 or self.loh_len < 0:
            raise ValueError("lengths and offsets must be non-negative")
        if self.loh_start + self.loh_len > self.total_len:
            raise ValueError(
                f"LOH block [{self.loh_start}, {self.loh_start + self.loh_len}) "
                f"exceeds total length {self.total_len}"
            )
        if not (0.0 < self.purity <= 1.0):
            raise ValueError(f"purity must lie in (0, 1], got {self.purity!r}")
        if not self.noise_sd >= 0.0:
            raise ValueError(f"noise_sd must be >= 0, got {self.noise_sd!r}")
        if not (0.0 <= self.het_rate <= 1.0):
            raise ValueError(f"het_rate must lie in [0, 1], got {self.het_rate!r}")


@dataclass
class LabeledSequence:
    baf: FloatArray
    truth: npt.NDArray[np.int8]

    def __post_init__(self) -> None:
        if len(self.baf) != len(self.truth):
            raise ValueError("baf and truth must have equal lengths")


def truth_labels(cfg: ScenarioConfig) -> npt.NDArray[np.int8]:
    truth = np.zeros(cfg.total_len, dtype=np.int8)
    truth[cfg.loh_start : cfg.loh_start + cfg.loh_len] = Label.LOH
    return truth


def generate(cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> LabeledSequence:
    """Simulate one labeled BAF sequence.

    Heterozygous loci have mean BAF 0.5 outside the LOH block and
    ``(1 +/- purity) / 2`` inside it; homozygous loci sit at 0 or 1
    everywhere.  Loci with an interior mean get Gaussian noise (clamped to
    [0, 1]); loci with mean exactly 0 or 1 emit the exact boundary value
    with probability 0.9 and otherwise fall ``|noise|`` inside it.
    """
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    n = cfg.total_len
    truth = truth_labels(cfg)

    het = rng.random(n) < cfg.het_rate
    hom_b = rng.random(n) < 0.5
    lost_b = rng.random(n) < 0.5
    noise = rng.normal(0.0, cfg.noise_sd, n)
    u_atom = rng.random(n)

    loh = truth == Label.LOH
    mean = np.where(hom_b, 1.0, 0.0)
    het_mean = np.where(loh, np.where(lost_b, (1.0 - cfg.purity) / 2, (1.0 + cfg.purity) / 2), 0.5)
    mean = np.where(het, het_mean, mean)

    extreme = (mean == 0.0) | (mean == 1.0)
    near = np.abs(noise)
    baf = np.where(
        extreme,
        np.where(u_atom < ATOM_PROB, mean, np.abs(mean - near)),
        mean + noise,
    )
    return LabeledSequence(baf=np.clip(baf, 0.0, 1.0), truth=truth)


@dataclass
class ResamplePool:
    """Real BAF observations per population, sampled with replacement."""

    non_loh: FloatArray
    loh: FloatArray

    def __post_init__(self) -> None:
        self.non_loh = np.asarray(self.non_loh, dtype=np.float64)
        self.loh = np.asarray(self.loh, dtype=np.float64)
        if self.non_loh.size == 0:
            raise ValueError("resample pool has no NonLOH observations")

    def generate(self, cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> LabeledSequence:
        rng = rng if rng is not None else np.random.default_rng(cfg.seed)
        truth = truth_labels(cfg)
        n_loh = int(truth.sum())
        if n_loh and self.loh.size == 0:
            raise ValueError("resample pool has no LOH observations")
        baf = self.non_loh[rng.integers(0, self.non_loh.size, cfg.total_len)]
        if n_loh:
            baf[truth == Label.LOH] = self.loh[rng.integers(0, self.loh.size, n_loh)]
        return LabeledSequence(baf=baf, truth=truth)


@dataclass
class CellResult:
    purity: float
    loh_len: int
    min_len: int
    replicates: int
    mean_sensitivity: float | None
    mean_specificity: float | None
    se_sensitivity: float | None
    se_specificity: float | None
    l0: float
    l1: float
    counts: list[ConfusionCounts] = field(default_factory=list, repr=False)

    def to_dict(self, with_counts: bool = True) -> dict:
        d = asdict(self)
        if with_counts:
            d["counts"] = [asdict(c) for c in self.counts]
        else:
            d.pop("counts")
        return d


def _mean_se(values: Sequence[float | None]) -> tuple[float | None, float | None]:
    v = np.array([x for x in values if x is not None], dtype=np.float64)
    if v.size == 0:
        return None, None
    mean = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return mean, se


def cell_means(counts: Iterable[ConfusionCounts]) -> tuple[float | None, float | None]:
    """Mean per-replicate sensitivity and specificity, skipping undefined values."""
    ms = [metrics(c) for c in counts]
    return _mean_se([m.sensitivity for m in ms])[0], _mean_se([m.specificity for m in ms])[0]


def _purity_key(purity: float) -> int:
    return int(round(purity * 1_000_000))


def run_study(
    loh_lens: Sequence[int],
    purities: Sequence[float],
    min_lens: Sequence[int],
    replicates: int,
    base: ScenarioConfig | None = None,
    segmenter: SegmenterConfig | None = None,
    train_len: int = DEFAULT_TRAIN_LEN,
    em: EmConfig | None = None,
    pool: ResamplePool | None = None,
) -> list[CellResult]:
    """Score the segmenter over a grid of (purity, LOH length, minimum length).

    For every (purity, LOH length) pair a LOH-free training sequence is
    simulated and fitted, and ``replicates`` test sequences are simulated;
    both are shared by all minimum lengths, so columns of the resulting
    table are paired comparisons.  Thresholds are calibrated per cell.

    All randomness is derived from ``base.seed``.
    """
    if not loh_lens or not purities or not min_lens:
        raise ValueError("study grid must be non-empty in every dimension")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    base = base or ScenarioConfig()
    segmenter = segmenter or SegmenterConfig()
    gen = pool.generate if pool is not None else generate

    results: list[CellResult] = []
    for purity in purities:
        for loh_len in loh_lens:
            pk = _purity_key(purity)
            train_cfg = replace(base, total_len=train_len, loh_start=0, loh_len=0, purity=purity)
            train_rng = np.random.default_rng(np.random.SeedSequence(base.seed, spawn_key=(pk, loh_len, 0)))
            train = gen(train_cfg, train_rng)
            model = fit_em(tbaf_transform(train.baf), em).model

            cfg = replace(base, loh_len=loh_len, purity=purity)
            seqs = [
                gen(cfg, np.random.default_rng(np.random.SeedSequence(base.seed, spawn_key=(pk, loh_len, 1, r))))
                for r in range(replicates)
            ]
            ys = [tbaf_transform(s.baf) for s in seqs]

            for m in min_lens:
                seg_cfg = replace(segmenter, min_len=m)
                thr = calibrate(model, seg_cfg)
                counts = [confusion(s.truth, segment(y, model, seg_cfg, thr)) for s, y in zip(seqs, ys)]
                ms = [metrics(c) for c in counts]
                sens, sens_se = _mean_se([x.sensitivity for x in ms])
                spec, spec_se = _mean_se([x.specificity for x in ms])
                _log.info(
                    "purity=%g l=%d m=%d sens=%s spec=%s", purity, loh_len, m, sens, spec
                )
                results.append(
                    CellResult(
                        purity=purity,
                        loh_len=loh_len,
                        min_len=m,
                        replicates=replicates,
                        mean_sensitivity=sens,
                        mean_specificity=spec,
                        se_sensitivity=sens_se,
                        se_specificity=spec_se,
                        l0=thr.l0,
                        l1=thr.l1,
                        counts=counts,
                    )
                )
    return results


STUDY_COLUMNS = (
    "purity",
    "loh_len",
    "min_len",
    "replicates",
    "mean_sensitivity",
    "mean_specificity",
    "se_sensitivity",
    "se_specificity",
    "l0",
    "l1",
)


def study_table(results: Sequence[CellResult], metric: str = "mean_sensitivity") -> str:
    """Wide table with one row per (purity, LOH length) and one column per m."""
    ms = sorted({r.min_len for r in results})
    rows: dict[tuple[float, int], dict[int, float | None]] = {}
    for r in results:
        rows.setdefault((r.purity, r.loh_len), {})[r.min_len] = getattr(r, metric)
    lines = ["purity\tl\t" + "\t".join(f"m={m}" for m in ms)]
    for (purity, l), vals in sorted(rows.items(), key=lambda kv: (-kv[0][0], kv[0][1])):
        cells = ["NA" if vals.get(m) is None else f"{vals[m]:.2f}" for m in ms]
        lines.append(f"{purity:g}\t{l}\t" + "\t".join(cells))
    return "\n".join(lines) + "\n"
