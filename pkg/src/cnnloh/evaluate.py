"""Per-observation scoring of a segmentation against reference labels."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
import numpy.typing as npt

from .cusum import Segmentation

Labeling = Union[Segmentation, npt.ArrayLike]


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )


@dataclass(frozen=True)
class Metrics:
    """Sensitivity and specificity; ``None`` when the class is empty."""

    sensitivity: float | None
    specificity: float | None

    def to_dict(self) -> dict[str, float | None]:
        return {"sensitivity": self.sensitivity, "specificity": self.specificity}


def as_labels(labeling: Labeling) -> npt.NDArray[np.int8]:
    if isinstance(labeling, Segmentation):
        labeling.validate()
        return labeling.labels()
    lab = np.asarray(labeling).reshape(-1)
    if lab.size and not np.isin(lab, (0, 1)).all():
        raise ValueError("labels must be 0 (non-LOH) or 1 (LOH)")
    return lab.astype(np.int8)


def confusion(truth: Labeling, predicted: Labeling) -> ConfusionCounts:
    """Tally TP/FP/TN/FN with LOH as the positive class."""
    t = as_labels(truth).astype(bool)
    p = as_labels(predicted).astype(bool)
    if t.size != p.size:
        raise ValueError(f"truth has {t.size} observations but prediction covers {p.size}")
    return ConfusionCounts(
        tp=int((t & p).sum()),
        fp=int((~t & p).sum()),
        tn=int((~t & ~p).sum()),
        fn=int((t & ~p).sum()),
    )


def metrics(c: ConfusionCounts) -> Metrics:
    pos = c.tp + c.fn
    neg = c.tn + c.fp
    return Metrics(
        sensitivity=c.tp / pos if pos else None,
        specificity=c.tn / neg if neg else None,
    )


def compare_to_gold(gold: Labeling, predicted: Labeling) -> Metrics:
    """Metrics treating an external call set (e.g. another caller's output) as truth."""
    return metrics(confusion(gold, predicted))


def summarize(pairs: Iterable[tuple[Labeling, Labeling]]) -> dict:
    """Per-input metrics, pooled-count metrics and the mean of per-input metrics."""
    per_input = []
    pooled = ConfusionCounts(0, 0, 0, 0)
    for gold, pred in pairs:
        c = confusion(gold, pred)
        pooled = pooled + c
        per_input.append({"counts": c.__dict__.copy(), **metrics(c).to_dict()})

    def mean_of(key: str) -> float | None:
        vals = [p[key] for p in per_input if p[key] is not None]
        return float(np.mean(vals)) if vals else None

    return {
        "per_input": per_input,
        "pooled": {"counts": pooled.__dict__.copy(), **metrics(pooled).to_dict()},
        "mean": {"sensitivity": mean_of("sensitivity"), "specificity": mean_of("specificity")},
    }
