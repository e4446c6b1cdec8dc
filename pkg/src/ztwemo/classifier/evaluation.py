"""Accuracy metrics and speaker-independent cross-validation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, InsufficientSpeakers

log = logging.getLogger(__name__)


def unweighted_average(recalls) -> float:
    """Mean of per-class recalls (UWA), in whatever unit the recalls use."""
    r = np.asarray(list(recalls), dtype=float)
    return float(r.mean()) if r.size else float("nan")


@dataclass
class Metrics:
    wa: float
    uwa: float
    confusion: np.ndarray
    counts: np.ndarray
    labels: tuple
    recalls: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "WA": self.wa,
            "UWA": self.uwa,
            "labels": list(self.labels),
            "confusion": self.confusion.tolist(),
            "counts": self.counts.astype(int).tolist(),
            "recalls": self.recalls,
        }


def evaluate(predictions, truths, labels=None) -> Metrics:
    """
    Weighted and unweighted accuracy, in percent.

    ``confusion[i, j]`` is the percentage of class ``i`` utterances predicted
    as ``j``. Classes absent from ``truths`` get an all-zero row and are left
    out of the UWA.
    """
    predictions = list(predictions)
    truths = list(truths)
    if len(predictions) != len(truths):
        raise DimensionMismatch(f"{len(predictions)} predictions for {len(truths)} truths")
    if labels is None:
        labels = tuple(sorted(set(truths) | set(predictions)))
    labels = tuple(labels)
    index = {l: i for i, l in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)))
    for p, t in zip(predictions, truths):
        counts[index[t], index[p]] += 1
    total = counts.sum()
    wa = 100.0 * np.trace(counts) / total if total else float("nan")
    row = counts.sum(axis=1)
    conf = np.zeros_like(counts)
    present = row > 0
    conf[present] = 100.0 * counts[present] / row[present, None]
    recalls = {labels[i]: float(conf[i, i]) for i in np.flatnonzero(present)}
    for i in np.flatnonzero(~present):
        log.warning("class %r absent from the reference labels; excluded from UWA", labels[i])
    return Metrics(float(wa), unweighted_average(recalls.values()), conf, counts, labels, recalls)


@dataclass
class FoldResult:
    speaker: str
    n_train: int
    n_test: int
    metrics: Metrics
    predictions: list


@dataclass
class CrossValidation:
    folds: list

    @property
    def wa_mean(self) -> float:
        return float(np.mean([f.metrics.wa for f in self.folds]))

    @property
    def uwa_mean(self) -> float:
        return float(np.mean([f.metrics.uwa for f in self.folds]))

    @property
    def wa_std(self) -> float:
        return float(np.std([f.metrics.wa for f in self.folds]))

    @property
    def uwa_std(self) -> float:
        return float(np.std([f.metrics.uwa for f in self.folds]))


def speaker_folds(speakers, k: int | None = None) -> list[tuple[str, np.ndarray, np.ndarray]]:
    """
    Partition utterance indices by speaker.

    With ``k=None`` every speaker is its own fold. Otherwise the sorted
    speakers are dealt round-robin into ``k`` groups.
    """
    speakers = np.asarray(list(speakers), dtype=object)
    ids = sorted(set(speakers.tolist()))
    if len(ids) < 2:
        raise InsufficientSpeakers(f"cross-validation needs at least 2 speakers, got {len(ids)}")
    if k is None or k >= len(ids):
        groups = [[s] for s in ids]
    else:
        if k < 2:
            raise InsufficientSpeakers("need at least 2 folds")
        groups = [ids[i::k] for i in range(k)]
    out = []
    for g in groups:
        test = np.flatnonzero(np.isin(speakers, g))
        train = np.flatnonzero(~np.isin(speakers, g))
        out.append(("+".join(g), train, test))
    return out


def cross_validate(items, speakers, emotions, train_fn, predict_fn, k: int | None = None,
                   labels=None) -> CrossValidation:
    """
    Speaker-independent cross-validation.

    Parameters
    ----------
    items : sequence
        Whatever ``train_fn`` and ``predict_fn`` consume, one per utterance.
    speakers, emotions : sequences aligned with ``items``
    train_fn : callable(train_items, train_emotions, train_speakers) -> model
    predict_fn : callable(model, test_items, test_speakers) -> list of labels
    """
    items = list(items)
    emotions = list(emotions)
    speakers = list(speakers)
    folds = []
    for name, tr, te in speaker_folds(speakers, k):
        model = train_fn([items[i] for i in tr], [emotions[i] for i in tr], [speakers[i] for i in tr])
        pred = list(predict_fn(model, [items[i] for i in te], [speakers[i] for i in te]))
        m = evaluate(pred, [emotions[i] for i in te], labels)
        log.info("fold %s: WA %.2f UWA %.2f", name, m.wa, m.uwa)
        folds.append(FoldResult(name, len(tr), len(te), m, pred))
    return CrossValidation(folds)
