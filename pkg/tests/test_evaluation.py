import logging

import numpy as np
import pytest

from ztwemo.classifier import cross_validate, evaluate, speaker_folds, unweighted_average
from ztwemo.errors import DimensionMismatch, InsufficientSpeakers


def test_weighted_vs_unweighted():
    m = evaluate(["A", "A", "A", "A"], ["A", "A", "A", "B"])
    assert m.wa == pytest.approx(75.0)
    assert m.uwa == pytest.approx(50.0)


def test_confusion_rows():
    m = evaluate(list("abcabcab"), list("aabbccab"))
    np.testing.assert_allclose(m.confusion.sum(axis=1), 100.0, atol=0.1)


def test_published_average():
    assert unweighted_average([60.21, 58.17, 59.71, 60.25]) == pytest.approx(59.58, abs=0.01)


def test_absent_class_warns(caplog):
    with caplog.at_level(logging.WARNING):
        m = evaluate(["A", "B"], ["A", "A"], labels=("A", "B", "C"))
    assert m.uwa == pytest.approx(50.0)
    assert sum("excluded" in r.message for r in caplog.records) == 2


def test_length_mismatch():
    with pytest.raises(DimensionMismatch):
        evaluate(["A"], ["A", "B"])


def test_loso_partitions():
    spk = ["s1", "s2", "s3", "s1", "s2", "s3", "s4"]
    folds = speaker_folds(spk)
    assert len(folds) == 4
    seen = np.concatenate([te for _, _, te in folds])
    assert sorted(seen.tolist()) == list(range(len(spk)))
    for _, tr, te in folds:
        assert not set(spk[i] for i in tr) & set(spk[i] for i in te)


def test_k_folds_and_errors():
    assert len(speaker_folds(list("abcdef"), k=3)) == 3
    with pytest.raises(InsufficientSpeakers):
        speaker_folds(["a", "a"])


def test_cross_validate_majority():
    items = list(range(8))
    spk = ["s1", "s2"] * 4
    emo = ["x", "x", "x", "x", "y", "y", "x", "x"]

    def train(it, em, sp):
        return max(set(em), key=em.count)

    res = cross_validate(items, spk, emo, train, lambda m, it, sp: [m] * len(it))
    assert len(res.folds) == 2 and res.wa_mean == pytest.approx(75.0)
