"""Normalization, dynamic features, context splicing and feature fusion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import FrameGridMismatch, Unnormalizable, ZtwError
from .matrix import FeatureMatrix

VAR_FLOOR = 1e-8


@dataclass
class CmvnStats:
    """Per-dimension mean and (floored) standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, values) -> "CmvnStats":
        v = np.asarray(values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2:
            raise Unnormalizable(f"need at least 2 frames to normalize, got {v.shape[0] if v.ndim else 0}")
        mean = v.mean(axis=0)
        var = ((v - mean) ** 2).mean(axis=0)
        return cls(mean, np.sqrt(np.maximum(var, VAR_FLOOR)))

    def apply(self, m: FeatureMatrix) -> FeatureMatrix:
        if m.dims != self.mean.size:
            raise ZtwError(f"stats cover {self.mean.size} dims, matrix has {m.dims}")
        return FeatureMatrix((m.values - self.mean) / self.std, m.layout)


def cmvn(m: FeatureMatrix) -> FeatureMatrix:
    """Utterance-level mean and variance normalization."""
    if m.frames < 2:
        raise Unnormalizable(f"need at least 2 frames to normalize, got {m.frames}")
    return CmvnStats.fit(m.values).apply(m)


def cmvn_pooled(mats: list[FeatureMatrix]) -> list[FeatureMatrix]:
    """Normalize several matrices with statistics pooled over all of them (one speaker)."""
    if not mats:
        return []
    stats = CmvnStats.fit(np.concatenate([m.values for m in mats]))
    return [stats.apply(m) for m in mats]


def _delta(x: np.ndarray, half: int = 2) -> np.ndarray:
    n = x.shape[0]
    if n == 0:
        return x.copy()
    pad = np.concatenate([np.repeat(x[:1], half, axis=0), x, np.repeat(x[-1:], half, axis=0)])
    num = np.zeros_like(x)
    for k in range(1, half + 1):
        num += k * (pad[half + k:half + k + n] - pad[half - k:half - k + n])
    return num / (2.0 * sum(k * k for k in range(1, half + 1)))


def add_deltas(m: FeatureMatrix, half_window: int = 2) -> FeatureMatrix:
    """Append regression deltas and delta-deltas: 13 dims become 39."""
    if m.layout != "MFCC13":
        raise ZtwError(f"deltas expect MFCC13 input, got {m.layout}")
    d1 = _delta(m.values, half_window)
    d2 = _delta(d1, half_window)
    return FeatureMatrix(np.hstack([m.values, d1, d2]), "MFCC39")


def splice(m: FeatureMatrix, context: int = 4) -> FeatureMatrix:
    """Stack frames ``t - context .. t + context`` (edges replicated)."""
    v = m.values
    n = v.shape[0]
    if n == 0 or context == 0:
        return FeatureMatrix(v.copy(), "SPLICED")
    idx = np.clip(np.arange(n)[:, None] + np.arange(-context, context + 1)[None, :], 0, n - 1)
    return FeatureMatrix(v[idx].reshape(n, -1), "SPLICED")


def combine(mfcc39: FeatureMatrix, epoch30: FeatureMatrix) -> FeatureMatrix:
    """Row-wise concatenation ``[mfcc39 | epoch30]``."""
    if mfcc39.frames != epoch30.frames:
        raise FrameGridMismatch(f"MFCC has {mfcc39.frames} frames, epoch features {epoch30.frames}")
    return FeatureMatrix(np.hstack([mfcc39.values, epoch30.values]), "COMBINED69")
