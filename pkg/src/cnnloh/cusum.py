"""CUSUM segmentation of transformed BAF into alternating non-LOH / LOH runs.

Thresholds come from a minimum-length rule: an alarm should be raised
within the first ``m`` observations of a genuine change with probability at
most ``tol_a``.  The threshold is therefore the ``1 - tol_a`` quantile of
``R_m = max(S_1, ..., S_m)`` simulated under the post-change model.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from .model import FloatArray, MixtureModel, derive_loh_model, log_density, sample


class Label(enum.IntEnum):
    NON_LOH = 0
    LOH = 1

    def __str__(self) -> str:
        return "LOH" if self is Label.LOH else "NonLOH"

    @classmethod
    def parse(cls, text: str | int) -> "Label":
        key = str(text).strip().lower().replace("-", "").replace("_", "")
        if key in ("loh", "1"):
            return cls.LOH
        if key in ("nonloh", "0"):
            return cls.NON_LOH
        raise ValueError(f"unknown label {text!r}; expected NonLOH/LOH or 0/1")

    def flipped(self) -> "Label":
        return Label(1 - self.value)


@dataclass(frozen=True)
class SegmenterConfig:
    delta: float = 0.01
    tol_a: float = 0.05
    min_len: int = 25
    n_sim: int = 10_000
    seed: int = 0
    initial_state: Label = Label.NON_LOH

    def __post_init__(self) -> None:
        if not (0.0 <= self.delta < 1.0):
            raise ValueError(f"delta must lie in [0, 1), got {self.delta!r}")
        if not (0.0 < self.tol_a < 1.0):
            raise ValueError(f"tol_a must lie in (0, 1), got {self.tol_a!r}")
        if self.min_len < 1:
            raise ValueError(f"min_len must be >= 1, got {self.min_len!r}")
        if self.n_sim < 100:
            raise ValueError(f"n_sim must be >= 100, got {self.n_sim!r}")


@dataclass(frozen=True)
class Thresholds:
    """Alarm thresholds: ``l0`` while assuming non-LOH, ``l1`` while assuming LOH."""

    l0: float
    l1: float

    def __post_init__(self) -> None:
        for name in ("l0", "l1"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")

    def for_state(self, state: Label) -> float:
        return self.l1 if state is Label.LOH else self.l0


@dataclass(frozen=True)
class Segment:
    start: int
    end: int
    label: Label

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"segment start {self.start} > end {self.end}")

    @property
    def n_obs(self) -> int:
        return self.end - self.start + 1


@dataclass
class Segmentation:
    segments: list[Segment]
    thresholds: Thresholds | None = None

    @property
    def change_points(self) -> list[int]:
        return [s.start for s in self.segments[1:]]

    @property
    def length(self) -> int:
        return self.segments[-1].end + 1 if self.segments else 0

    def labels(self) -> npt.NDArray[np.int8]:
        """Per-observation labels, 1 for LOH."""
        out = np.zeros(self.length, dtype=np.int8)
        for s in self.segments:
            out[s.start : s.end + 1] = int(s.label)
        return out

    def validate(self, n: int | None = None) -> None:
        """Check partition and alternation; raise ``ValueError`` on violation."""
        if not self.segments:
            raise ValueError("segmentation is empty")
        expect = 0
        for i, s in enumerate(self.segments):
            if s.start != expect:
                raise ValueError(f"segment {i} starts at {s.start}, expected {expect}")
            if i and s.label == self.segments[i - 1].label:
                raise ValueError(f"segments {i - 1} and {i} share label {s.label}")
            expect = s.end + 1
        if n is not None and expect != n:
            raise ValueError(f"segmentation covers {expect} observations, expected {n}")

    @classmethod
    def from_labels(cls, labels: npt.ArrayLike) -> "Segmentation":
        """Collapse a per-observation 0/1 labeling into runs."""
        lab = np.asarray(labels, dtype=np.int8).reshape(-1)
        if lab.size == 0:
            return cls([])
        breaks = np.flatnonzero(np.diff(lab)) + 1
        starts = np.concatenate(([0], breaks))
        ends = np.concatenate((breaks - 1, [lab.size - 1]))
        return cls([Segment(int(a), int(b), Label(int(lab[a]))) for a, b in zip(starts, ends)])


@dataclass
class CusumTrace:
    """CUSUM path from the scan start; ``sums[k]`` follows ``k`` observations."""

    sums: list[float] = field(default_factory=lambda: [0.0])
    alarm_index: int | None = None


def log_ratio(data: npt.ArrayLike, assumed: MixtureModel, alternative: MixtureModel) -> FloatArray:
    """Per-observation CUSUM increments ``log p_alt(y) - log p_assumed(y)``."""
    y = np.asarray(data, dtype=np.float64)
    return np.asarray(log_density(alternative, y)) - np.asarray(log_density(assumed, y))


def _scan(increments: list[float], start: int, threshold: float) -> tuple[list[float], int | None]:
    s = 0.0
    sums = [0.0]
    for i in range(start, len(increments)):
        s = s + increments[i]
        if s < 0.0:
            s = 0.0
        sums.append(s)
        if s > threshold:
            return sums, i
    return sums, None


def cusum_scan(
    data: npt.ArrayLike,
    assumed: MixtureModel,
    alternative: MixtureModel,
    threshold: float,
    start_at: int = 0,
) -> CusumTrace:
    """Run the CUSUM recursion from ``start_at`` until the first alarm.

    ``alarm_index`` is the absolute index of the first observation whose
    cumulative sum is strictly greater than ``threshold``; ``None`` if the
    data runs out first.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    y = np.asarray(data, dtype=np.float64).reshape(-1)
    if start_at >= y.size:
        return CusumTrace()
    inc = log_ratio(y[start_at:], assumed, alternative)
    sums, alarm = _scan(inc.tolist(), 0, threshold)
    return CusumTrace(sums=sums, alarm_index=None if alarm is None else alarm + start_at)


def _argmin_prefix(increments: FloatArray, i1: int, i2: int) -> int:
    # maximizing sum_{j<t} log p_A + sum_{j>=t} log p_B over t in [i1, i2]
    # is minimizing the prefix sum of (log p_B - log p_A) over [i1, t)
    prefix = np.concatenate(([0.0], np.cumsum(increments[i1:i2])))
    return i1 + int(np.argmin(prefix))


def locate_change(
    data: npt.ArrayLike,
    assumed: MixtureModel,
    alternative: MixtureModel,
    i1: int,
    i2: int,
) -> int:
    """Maximum-likelihood change point in ``[i1, i2]``; ties go to the smallest index."""
    if i1 > i2:
        raise ValueError(f"i1 ({i1}) must not exceed i2 ({i2})")
    y = np.asarray(data, dtype=np.float64).reshape(-1)
    if i1 < 0 or i2 >= y.size:
        raise ValueError(f"window [{i1}, {i2}] outside data of length {y.size}")
    inc = log_ratio(y[i1 : i2 + 1], assumed, alternative)
    return _argmin_prefix(inc, 0, i2 - i1) + i1


def _as_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def order_statistic_index(tol_a: float, n_sim: int) -> int:
    """0-based index of the ``ceil((1 - tol_a) * n_sim)``-th order statistic."""
    # guard against 0.95 * 10000 landing a hair above an integer
    k = math.ceil((1.0 - tol_a) * n_sim - 1e-9)
    return min(max(k, 1), n_sim) - 1


def simulate_rm(
    assumed: MixtureModel,
    alternative: MixtureModel,
    m: int,
    n_sim: int,
    rng: np.random.Generator | int | None = None,
) -> FloatArray:
    """Draw ``n_sim`` replicates of ``R_m`` with data generated by ``alternative``.

    Observation ``j`` of every replicate is drawn in one batch, so the first
    ``m`` columns are identical for any larger ``m`` with the same seed.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = _as_rng(rng)
    s = np.zeros(n_sim)
    r = np.zeros(n_sim)
    for _ in range(m):
        y = sample(alternative, n_sim, rng)
        s = np.maximum(s + log_ratio(y, assumed, alternative), 0.0)
        np.maximum(r, s, out=r)
    return r


def calibrate_threshold(
    assumed: MixtureModel,
    alternative: MixtureModel,
    m: int,
    tol_a: float,
    n_sim: int,
    rng: np.random.Generator | int | None = None,
) -> float:
    """Monte-Carlo alarm threshold satisfying ``P(R_m < L) >= 1 - tol_a``."""
    if not (0.0 < tol_a < 1.0):
        raise ValueError("tol_a must lie in (0, 1)")
    if n_sim < 100:
        raise ValueError("n_sim must be >= 100")
    r = np.sort(simulate_rm(assumed, alternative, m, n_sim, rng))
    return float(r[order_statistic_index(tol_a, n_sim)])


def loh_pair(non_loh: MixtureModel, delta: float) -> tuple[MixtureModel, MixtureModel]:
    """Floored (non-LOH, LOH) model pair used for likelihood ratios."""
    return non_loh.floored(), derive_loh_model(non_loh, delta).floored()


def calibrate(non_loh: MixtureModel, cfg: SegmenterConfig) -> Thresholds:
    """Both alarm thresholds for ``cfg``, each on its own seeded sub-stream."""
    p0, p1 = loh_pair(non_loh, cfg.delta)
    ss0, ss1 = np.random.SeedSequence(cfg.seed).spawn(2)
    l0 = calibrate_threshold(p0, p1, cfg.min_len, cfg.tol_a, cfg.n_sim, np.random.default_rng(ss0))
    l1 = calibrate_threshold(p1, p0, cfg.min_len, cfg.tol_a, cfg.n_sim, np.random.default_rng(ss1))
    return Thresholds(l0=l0, l1=l1)


def segment(
    data: npt.ArrayLike,
    non_loh: MixtureModel,
    cfg: SegmenterConfig | None = None,
    thresholds: Thresholds | None = None,
) -> Segmentation:
    """Segment transformed BAF into alternating non-LOH / LOH regions.

    The scan starts at index 0 assuming ``cfg.initial_state``.  On each
    alarm the change point is placed by maximum likelihood over the scanned
    window, the current segment is closed just before it, the assumed model
    flips and scanning restarts at the change point.  The tail after the
    last alarm keeps the current label.

    Parameters
    ----------
    data : array_like
        Transformed BAF values in [0, 1].
    non_loh : MixtureModel
        Model fitted on LOH-free data; the LOH model is derived from it.
    cfg : SegmenterConfig, optional
    thresholds : Thresholds, optional
        Pre-computed thresholds; calibrated from ``cfg`` when omitted.
    """
    cfg = cfg or SegmenterConfig()
    y = np.asarray(data, dtype=np.float64).reshape(-1)
    n = y.size
    if n < 1:
        raise ValueError("cannot segment an empty sequence")
    if thresholds is None:
        thresholds = calibrate(non_loh, cfg)
    p0, p1 = loh_pair(non_loh, cfg.delta)

    toward_loh = log_ratio(y, p0, p1)
    inc = {Label.NON_LOH: toward_loh, Label.LOH: -toward_loh}
    inc_list = {k: v.tolist() for k, v in inc.items()}

    segments: list[Segment] = []

    def emit(start: int, end: int, label: Label) -> None:
        if segments and segments[-1].label == label:
            segments[-1] = Segment(segments[-1].start, end, label)
        else:
            segments.append(Segment(start, end, label))

    state = cfg.initial_state
    i1 = 0
    stalled_at = -1
    while True:
        _, i2 = _scan(inc_list[state], i1, thresholds.for_state(state))
        if i2 is None:
            emit(i1, n - 1, state)
            break
        tau = _argmin_prefix(inc[state], i1, i2)
        if tau == i1:
            if stalled_at == i1:
                raise RuntimeError(f"CUSUM made no progress at index {i1}")
            stalled_at = i1
        else:
            emit(i1, tau - 1, state)
            stalled_at = -1
        state = state.flipped()
        i1 = tau

    seg = Segmentation(segments, thresholds=thresholds)
    seg.validate(n)
    return seg
