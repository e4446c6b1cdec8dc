"""
Excitation-source features at epochs: instantaneous pitch, strength of
excitation (SOE) and the cosine of the instantaneous phase, plus their
fixed-size per-frame layout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..epoch import EpochTrain
from ..signal_core import analytic_envelope_and_cos_phase
from .matrix import FeatureMatrix, frame_count, frame_params

PITCH_MIN_HZ = 50.0
PITCH_MAX_HZ = 600.0
MAX_EPOCHS_PER_FRAME = 10


def instantaneous_pitch(train: EpochTrain, fs: int = 16000, keep_all: bool = False):
    """
    Reciprocal of the interval between successive epochs, in Hz.

    Values outside [50, 600] Hz are dropped. Returns ``(pitch, index)`` where
    ``index[i]`` is the position of the pair's first epoch in the train.
    With ``keep_all`` nothing is dropped.
    """
    loc = np.asarray(train.locations, dtype=np.int64)
    if loc.size < 2:
        return np.zeros(0), np.zeros(0, dtype=np.int64)
    pitch = fs / np.abs(np.diff(loc)).astype(float)
    idx = np.arange(loc.size - 1)
    if keep_all:
        return pitch, idx
    ok = (pitch >= PITCH_MIN_HZ) & (pitch <= PITCH_MAX_HZ)
    return pitch[ok], idx[ok]


def strength_of_excitation(train: EpochTrain) -> np.ndarray:
    """``x(i) - x(i+1)`` over successive epoch strengths (signed)."""
    s = np.asarray(train.strengths, dtype=float)
    if s.size < 2:
        return np.zeros(0)
    return s[:-1] - s[1:]


def instantaneous_phase_at_epochs(evidence, train: EpochTrain) -> np.ndarray:
    """Cosine phase of the evidence's analytic signal, read at the epochs."""
    ev = np.asarray(evidence, dtype=float)
    loc = np.asarray(train.locations, dtype=np.int64)
    if loc.size == 0:
        return np.zeros(0)
    if ev.size < 2:
        return np.zeros(loc.size)
    offset = train.region.start if train.region is not None else 0
    _, cos_phase = analytic_envelope_and_cos_phase(ev)
    return cos_phase[loc - offset]


@dataclass
class EpochFeatures:
    """
    Per-epoch records.

    Every epoch has a location and a phase. Pitch and SOE belong to pairs;
    a pair's values are attached to its later epoch (``pair_mask`` marks
    epochs carrying one) and pairs with implausible pitch are dropped.
    """

    locations: np.ndarray
    cos_phase: np.ndarray
    pitch_hz: np.ndarray = field(default=None)
    soe: np.ndarray = field(default=None)
    pair_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        self.locations = np.asarray(self.locations, dtype=np.int64)
        n = self.locations.size
        self.cos_phase = np.asarray(self.cos_phase, dtype=float)
        if self.pitch_hz is None:
            self.pitch_hz = np.zeros(n)
        if self.soe is None:
            self.soe = np.zeros(n)
        if self.pair_mask is None:
            self.pair_mask = np.zeros(n, dtype=bool)
        self.pitch_hz = np.asarray(self.pitch_hz, dtype=float)
        self.soe = np.asarray(self.soe, dtype=float)
        self.pair_mask = np.asarray(self.pair_mask, dtype=bool)

    def __len__(self):
        return self.locations.size

    @classmethod
    def concat(cls, parts: list["EpochFeatures"]) -> "EpochFeatures":
        if not parts:
            return cls(np.zeros(0, dtype=np.int64), np.zeros(0))
        return cls(
            np.concatenate([p.locations for p in parts]),
            np.concatenate([p.cos_phase for p in parts]),
            np.concatenate([p.pitch_hz for p in parts]),
            np.concatenate([p.soe for p in parts]),
            np.concatenate([p.pair_mask for p in parts]),
        )


def epoch_features(train: EpochTrain, fs: int = 16000) -> EpochFeatures:
    """Collect pitch, SOE and phase for one epoch train (needs ``train.evidence``)."""
    n = len(train)
    phase = (instantaneous_phase_at_epochs(train.evidence, train)
             if train.evidence is not None else np.zeros(n))
    pitch_all, _ = instantaneous_pitch(train, fs, keep_all=True)
    soe_all = strength_of_excitation(train)
    pitch = np.zeros(n)
    soe = np.zeros(n)
    mask = np.zeros(n, dtype=bool)
    if n >= 2:
        ok = (pitch_all >= PITCH_MIN_HZ) & (pitch_all <= PITCH_MAX_HZ)
        later = np.arange(1, n)[ok]
        pitch[later] = pitch_all[ok]
        soe[later] = soe_all[ok]
        mask[later] = True
    return EpochFeatures(train.locations, phase, pitch, soe, mask)


def frame_epoch_features(feats: EpochFeatures, utterance_len: int, fs: int = 16000) -> FeatureMatrix:
    """
    EPOCH30 rows ``[pitch x10 | soe x10 | cos_phase x10]`` on the MFCC framing grid.

    Epochs falling inside a frame fill the slots in temporal order; beyond
    ten, the earliest are dropped. Empty slots stay zero.
    """
    flen, shift = frame_params(fs)
    n_frames = frame_count(utterance_len, fs)
    out = np.zeros((n_frames, 3 * MAX_EPOCHS_PER_FRAME))
    if n_frames == 0 or len(feats) == 0:
        return FeatureMatrix(out, "EPOCH30")
    order = np.argsort(feats.locations, kind="stable")
    loc = feats.locations[order]
    pitch = np.where(feats.pair_mask, feats.pitch_hz, 0.0)[order]
    soe = np.where(feats.pair_mask, feats.soe, 0.0)[order]
    phase = feats.cos_phase[order]
    starts = np.arange(n_frames) * shift
    a = np.searchsorted(loc, starts, side="left")
    b = np.searchsorted(loc, starts + flen, side="left")
    k = MAX_EPOCHS_PER_FRAME
    for i in np.flatnonzero(b > a):
        lo = max(a[i], b[i] - k)
        cnt = b[i] - lo
        out[i, 0:cnt] = pitch[lo:b[i]]
        out[i, k:k + cnt] = soe[lo:b[i]]
        out[i, 2 * k:2 * k + cnt] = phase[lo:b[i]]
    return FeatureMatrix(out, "EPOCH30")
