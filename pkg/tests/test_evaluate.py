import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cnnloh.cusum import Label, Segment, Segmentation
from cnnloh.evaluate import ConfusionCounts, Metrics, compare_to_gold, confusion, metrics, summarize

labels = st.lists(st.integers(0, 1), min_size=1, max_size=200)


def test_all_negative():
    seg = Segmentation([Segment(0, 99, Label.NON_LOH)])
    assert confusion(np.zeros(100), seg) == ConfusionCounts(tp=0, fp=0, tn=100, fn=0)


def test_hand_counted_overlap():
    truth = np.r_[np.zeros(500), np.ones(100), np.zeros(400)]
    pred = Segmentation(
        [Segment(0, 549, Label.NON_LOH), Segment(550, 649, Label.LOH), Segment(650, 999, Label.NON_LOH)]
    )
    assert confusion(truth, pred) == ConfusionCounts(tp=50, fp=50, tn=850, fn=50)


def test_disjoint_calls():
    gold = Segmentation.from_labels(np.r_[np.zeros(100), np.ones(100), np.zeros(800)])
    pred = Segmentation.from_labels(np.r_[np.zeros(800), np.ones(100), np.zeros(100)])
    m = compare_to_gold(gold, pred)
    assert m.sensitivity == 0.0
    assert m.specificity == pytest.approx(800 / 900)


def test_metrics_arithmetic():
    assert metrics(ConfusionCounts(tp=9, fp=0, tn=90, fn=1)) == Metrics(0.9, 1.0)


def test_undefined_is_none_not_zero():
    m = metrics(ConfusionCounts(tp=0, fp=3, tn=7, fn=0))
    assert m.sensitivity is None
    assert m.specificity == 0.7
    assert metrics(ConfusionCounts(2, 0, 0, 1)).specificity is None


def test_length_mismatch():
    with pytest.raises(ValueError):
        confusion(np.zeros(10), np.zeros(11))


def test_bad_labels():
    with pytest.raises(ValueError):
        confusion(np.array([0, 2]), np.array([0, 1]))


def test_perfect_agreement():
    lab = np.r_[np.zeros(30), np.ones(20), np.zeros(10)]
    assert compare_to_gold(lab, Segmentation.from_labels(lab)) == Metrics(1.0, 1.0)


def test_summary_pooled_and_mean():
    a = (np.array([1, 1, 0, 0]), np.array([1, 0, 0, 0]))
    b = (np.array([1, 0, 0, 0, 0, 0]), np.array([1, 0, 0, 0, 1, 1]))
    doc = summarize([a, b])
    assert doc["pooled"]["counts"] == {"tp": 2, "fp": 2, "tn": 5, "fn": 1}
    assert doc["pooled"]["sensitivity"] == pytest.approx(2 / 3)
    assert doc["mean"]["sensitivity"] == pytest.approx((0.5 + 1.0) / 2)
    assert doc["mean"]["specificity"] == pytest.approx((1.0 + 0.6) / 2)


@given(labels, st.data())
def test_label_swap_duality(truth, data):
    pred = data.draw(st.lists(st.integers(0, 1), min_size=len(truth), max_size=len(truth)))
    t, p = np.array(truth), np.array(pred)
    m = metrics(confusion(t, p))
    swapped = metrics(confusion(1 - t, 1 - p))
    assert m.sensitivity == swapped.specificity
    assert m.specificity == swapped.sensitivity


@given(labels, st.data())
def test_split_invariance(truth, data):
    # splitting a run into adjacent same-label pieces changes nothing
    pred = np.array(data.draw(st.lists(st.integers(0, 1), min_size=len(truth), max_size=len(truth))))
    segs = []
    for i, v in enumerate(pred):
        segs.append(Segment(i, i, Label(int(v))))
    fine = Segmentation(segs)
    assert confusion(truth, fine.labels()) == confusion(truth, Segmentation.from_labels(pred))


@given(labels, st.data())
def test_metrics_bounded(truth, data):
    pred = data.draw(st.lists(st.integers(0, 1), min_size=len(truth), max_size=len(truth)))
    c = confusion(np.array(truth), np.array(pred))
    assert c.total == len(truth)
    for v in metrics(c).to_dict().values():
        assert v is None or 0.0 <= v <= 1.0
