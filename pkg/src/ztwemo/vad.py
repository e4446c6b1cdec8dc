"""
Voiced-activity detection from the phase of the zero-frequency-filtered signal.

The ZFF signal oscillates at the pitch rate inside voiced speech. Each
30 ms frame of its cosine-phase signal is scored by the sum of its first
ten harmonic amplitudes (SPH); frames whose max-normalized score reaches
0.08 are voiced.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import SignalTooShort
from .signal_core import Waveform, analytic_envelope_and_cos_phase, difference, moving_average

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class VadConfig:
    trend_window_ms: float = 10.0
    frame_ms: float = 30.0
    shift_ms: float = 5.0
    n_fft: int = 1024
    n_harmonics: int = 10
    f0_min: float = 60.0
    f0_max: float = 500.0
    threshold: float = 0.08
    min_region_ms: float = 30.0
    bridge_gap_ms: float = 20.0
    envelope_weighting: bool = True


@dataclass(frozen=True)
class ZffSignal:
    samples: np.ndarray
    sample_rate: int
    trend_window_ms: float

    def __len__(self):
        return self.samples.shape[0]


@dataclass(frozen=True)
class SphContour:
    values: np.ndarray
    frame_len_ms: float = 30.0
    frame_shift_ms: float = 5.0
    sample_rate: int = 16000

    @property
    def frame_len(self) -> int:
        return int(round(self.frame_len_ms * self.sample_rate / 1000.0))

    @property
    def frame_shift(self) -> int:
        return int(round(self.frame_shift_ms * self.sample_rate / 1000.0))

    def frame_centers(self) -> np.ndarray:
        return np.arange(self.values.size) * self.frame_shift + self.frame_len // 2


@dataclass(frozen=True, order=True)
class VoicedRegion:
    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid region [{self.start}, {self.end})")

    def __len__(self):
        return self.end - self.start

    def as_slice(self) -> slice:
        return slice(self.start, self.end)


def _odd(n: int) -> int:
    return n if n % 2 else n + 1


def zero_frequency_filter(w: Waveform, trend_window_ms: float = 10.0) -> ZffSignal:
    """
    Zero-frequency filtered signal.

    Two ideal 0 Hz resonators (each a double running sum) act on the
    differenced signal. A centered moving average of ``trend_window_ms`` is
    subtracted after each resonator; interleaving the two trend removals
    keeps the polynomial growth of the integrators within float64 range.
    """
    fs = w.sample_rate
    win = _odd(int(round(trend_window_ms * fs / 1000.0)))
    if len(w) <= 3 * win:
        raise SignalTooShort(f"{len(w)} samples; ZFF needs more than {3 * win}")
    x = difference(w.samples)
    # the boundary sample would turn any DC offset into a step
    x[0] = 0.0
    y = x
    for _ in range(2):
        y = np.cumsum(np.cumsum(y))
        y = y - moving_average(y, win)
    return ZffSignal(y, fs, trend_window_ms)


def sph_contour(z: ZffSignal, cfg: VadConfig = VadConfig()) -> SphContour:
    """
    Per-frame sum of phase harmonics, normalized to the utterance maximum.

    For each Hann-windowed frame of ``cos(phase)`` the fundamental bin is the
    spectral argmax between ``f0_min`` and ``f0_max``; the harmonic amplitudes
    at multiples of that bin are summed. With ``envelope_weighting`` the sum
    is multiplied by the frame's mean ZFF envelope so that low-level noise,
    whose phase is as regular as a voiced one, scores low.
    """
    fs = z.sample_rate
    flen = int(round(cfg.frame_ms * fs / 1000.0))
    shift = int(round(cfg.shift_ms * fs / 1000.0))
    n = len(z)
    if n < flen:
        raise SignalTooShort(f"{n} samples is shorter than one {cfg.frame_ms} ms frame")
    n_frames = (n - flen) // shift + 1
    env, cos_phase = analytic_envelope_and_cos_phase(z.samples)
    starts = np.arange(n_frames) * shift
    frames = np.lib.stride_tricks.sliding_window_view(cos_phase, flen)[starts]
    spec = np.abs(np.fft.rfft(frames * np.hanning(flen), cfg.n_fft, axis=1))
    lo = int(np.ceil(cfg.f0_min * cfg.n_fft / fs))
    hi = int(np.floor(cfg.f0_max * cfg.n_fft / fs))
    f0_bin = lo + np.argmax(spec[:, lo:hi + 1], axis=1)
    harm = np.arange(1, cfg.n_harmonics + 1)
    bins = np.minimum(np.rint(f0_bin[:, None] * harm[None, :]).astype(int), spec.shape[1] - 1)
    values = np.take_along_axis(spec, bins, axis=1).sum(axis=1)
    if cfg.envelope_weighting:
        csum = np.concatenate(([0.0], np.cumsum(env)))
        values = values * (csum[starts + flen] - csum[starts]) / flen
    top = values.max()
    if top > 0:
        values = values / top
    return SphContour(values, cfg.frame_ms, cfg.shift_ms, fs)


def segment_voiced(c: SphContour, threshold: float = 0.08, min_region_ms: float = 30.0,
                   bridge_gap_ms: float = 20.0, n_samples: int | None = None) -> list[VoicedRegion]:
    """
    Threshold the contour and turn voiced frame runs into sample intervals.

    A voiced frame claims the central ``shift`` samples around its center;
    the first and last voiced frames of a run extend half a shift outward.
    Gaps shorter than ``bridge_gap_ms`` are closed before runs shorter than
    ``min_region_ms`` are dropped.
    """
    vals = np.asarray(c.values)
    if vals.size == 0:
        return []
    fs = c.sample_rate
    shift = c.frame_shift
    centers = c.frame_centers()
    voiced = vals >= threshold
    if not voiced.any():
        return []
    if voiced.all():
        end = n_samples if n_samples is not None else int(centers[-1] + c.frame_len - c.frame_len // 2)
        return [VoicedRegion(0, end)]
    edges = np.diff(np.concatenate(([0], voiced.astype(np.int8), [0])))
    run_starts = np.flatnonzero(edges == 1)
    run_ends = np.flatnonzero(edges == -1) - 1
    limit = n_samples if n_samples is not None else int(centers[-1] + c.frame_len // 2)
    spans = []
    for a, b in zip(run_starts, run_ends):
        s = 0 if a == 0 else int(centers[a] - shift // 2)
        e = limit if b == vals.size - 1 else int(centers[b] + shift - shift // 2)
        spans.append([max(s, 0), min(e, limit)])
    bridge = bridge_gap_ms * fs / 1000.0
    merged = [spans[0]]
    for s, e in spans[1:]:
        if s - merged[-1][1] < bridge:
            merged[-1][1] = e
        else:
            merged.append([s, e])
    min_len = min_region_ms * fs / 1000.0
    return [VoicedRegion(s, e) for s, e in merged if e - s >= min_len and e > s]


def detect_voiced(w: Waveform, cfg: VadConfig = VadConfig()) -> tuple[list[VoicedRegion], SphContour]:
    """Convenience wrapper: ZFF, SPH contour and segmentation in one call."""
    z = zero_frequency_filter(w, cfg.trend_window_ms)
    contour = sph_contour(z, cfg)
    regions = segment_voiced(contour, cfg.threshold, cfg.min_region_ms, cfg.bridge_gap_ms,
                             n_samples=len(w))
    log.debug("VAD: %d voiced regions", len(regions))
    return regions, contour


def regions_to_rows(regions: list[VoicedRegion], sample_rate: int) -> list[tuple]:
    return [(r.start, r.end, r.start / sample_rate, r.end / sample_rate) for r in regions]
