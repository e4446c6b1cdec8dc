"""
Epoch (glottal closure instant) detection by zero-time windowing.

At every sample of a voiced region a 3 ms segment of the differenced
speech is weighted by ``h1^2 * h2``, its numerator group delay (NGD) is
formed and the Hilbert envelope of that spectrum (HNGD) is taken. The sum
of the three largest HNGD peaks traces a spectral energy profile that
rises sharply at each excitation. The profile is contrast-normalized,
smoothed with a Gaussian one pitch period long, and its positive peaks,
after two pruning rules, are the epochs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import InvalidSegment, RegionTooShort
from .signal_core import (
    Waveform,
    convolve_same,
    difference,
    gaussian_kernel,
    hilbert_envelope,
    mean_smooth,
    moving_average,
    window_h1,
    window_h2,
)
from .vad import VoicedRegion

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ZtwConfig:
    segment_ms: float = 3.0
    n_fft: int = 2048
    n_peaks: int = 3
    smooth_width: int = 5
    local_mean_ms: float = 20.0
    min_gap_ms: float = 2.0
    fallback_kernel_ms: float = 2.0
    min_pitch_ms: float = 2.0
    max_pitch_ms: float = 12.5
    min_region_ms: float = 40.0
    batch: int = 2048

    def segment_len(self, fs: int) -> int:
        return int(round(self.segment_ms * fs / 1000.0))

    def __post_init__(self):
        if self.n_peaks < 1:
            raise ValueError("n_peaks must be >= 1")
        if self.segment_len(16000) >= self.n_fft:
            raise ValueError("segment must be shorter than n_fft")


@dataclass
class EnergyProfile:
    values: np.ndarray
    region: VoicedRegion


@dataclass
class EpochTrain:
    locations: np.ndarray
    strengths: np.ndarray
    region: VoicedRegion | None = None
    evidence: np.ndarray | None = field(default=None, repr=False)
    profile: np.ndarray | None = field(default=None, repr=False)
    kernel_length: int = 0
    used_fallback: bool = False

    def __len__(self):
        return self.locations.shape[0]


@lru_cache(maxsize=8)
def _ztw_window(m: int, n_fft: int) -> np.ndarray:
    w = window_h1(n_fft)[:m] ** 2 * window_h2(m)
    w.setflags(write=False)
    return w


def hngd_spectrum(segment, cfg: ZtwConfig = ZtwConfig(), sample_rate: int = 16000) -> np.ndarray:
    """
    HNGD spectrum of one differenced segment, computed literally.

    ``x = segment * h1^2 * h2``; ``X = DFT(x)``, ``Y = DFT(n x[n])``;
    ``g = X_R Y_R + X_I Y_I``; the result is the Hilbert envelope of ``g``
    over all ``n_fft`` bins. This is the reference path; profiles use the
    equivalent :func:`hngd_half_spectra`.
    """
    seg = np.asarray(segment, dtype=float)
    m = cfg.segment_len(sample_rate)
    if seg.shape != (m,):
        raise InvalidSegment(f"expected {m} samples, got shape {seg.shape}")
    x = seg * _ztw_window(m, cfg.n_fft)
    big_x = np.fft.fft(x, cfg.n_fft)
    big_y = np.fft.fft(np.arange(m) * x, cfg.n_fft)
    ngd = big_x.real * big_y.real + big_x.imag * big_y.imag
    return hilbert_envelope(ngd)


def hngd_half_spectra(segments, n_fft: int = 2048) -> np.ndarray:
    """
    HNGD half spectra (bins ``0..n_fft/2``) for a batch of differenced segments.

    ``Re(X conj(Y))`` is a cosine series in the lag ``m`` whose coefficients
    ``C[m] = sum_p x[p+m] x[p] (2p+m)/2`` vanish beyond ``|m| >= M``. Its
    analytic continuation over the frequency index is therefore
    ``C[0] + 2 sum_{m>0} C[m] exp(j w m)``, so the Hilbert envelope is the
    magnitude of a single real FFT of ``M`` taps.
    """
    segs = np.asarray(segments, dtype=float)
    m = segs.shape[1]
    x = segs * _ztw_window(m, n_fft)
    p = 1 << (2 * m - 1).bit_length()
    big_x = np.fft.rfft(x, p, axis=1)
    big_y = np.fft.rfft(x * np.arange(m), p, axis=1)
    r = np.fft.irfft(big_x * np.conj(big_y), p, axis=1)
    # r[m] = sum_n x[n+m] n x[n]; symmetrize over lag sign
    coeff = 0.5 * (r[:, :m] + np.concatenate([r[:, :1], r[:, :-m:-1]], axis=1))
    coeff[:, 1:] *= 2.0
    return np.abs(np.fft.rfft(coeff, n_fft, axis=1))


def _peak_energy(y, cfg: ZtwConfig, m: int) -> np.ndarray:
    """Raw (unsmoothed) sum of the ``n_peaks`` largest HNGD maxima at every sample of ``y``."""
    n = y.shape[0]
    padded = np.concatenate([y, np.zeros(m)])
    out = np.empty(n)
    for s in range(0, n, cfg.batch):
        e = min(n, s + cfg.batch)
        segs = np.lib.stride_tricks.sliding_window_view(padded[s:e + m - 1], m)
        out[s:e] = kernels.peak_sum_rows(hngd_half_spectra(segs, cfg.n_fft), cfg.n_peaks)
    return out


def energy_profile(w: Waveform, region: VoicedRegion, cfg: ZtwConfig = ZtwConfig(),
                   differenced: np.ndarray | None = None) -> EnergyProfile:
    """
    Spectral energy profile over ``region``.

    ``differenced`` may carry a precomputed first difference of the whole
    waveform; otherwise it is computed here.
    """
    fs = w.sample_rate
    m = cfg.segment_len(fs)
    if len(region) < m:
        raise RegionTooShort(f"region of {len(region)} samples is shorter than {cfg.segment_ms} ms")
    if region.end > len(w):
        raise RegionTooShort(f"region {region} extends past the waveform ({len(w)} samples)")
    y = difference(w.samples) if differenced is None else differenced
    raw = _peak_energy(y[region.as_slice()], cfg, m)
    return EnergyProfile(mean_smooth(raw, cfg.smooth_width), region)


def estimate_avg_pitch(profile: EnergyProfile | np.ndarray, sample_rate: int = 16000,
                       cfg: ZtwConfig = ZtwConfig()) -> int:
    """
    Average pitch period in samples from the autocorrelation of the profile.

    Returns the lag of the highest autocorrelation peak between 2 and
    12.5 ms, or 0 when the profile is too short (< 40 ms) or has no positive
    peak there.
    """
    p = np.asarray(profile.values if isinstance(profile, EnergyProfile) else profile, dtype=float)
    if p.size < 0.040 * sample_rate:
        return 0
    p = p - p.mean()
    n = p.size
    nfft = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(p, nfft)
    ac = np.fft.irfft(spec * np.conj(spec), nfft)[:n]
    if ac[0] <= 0:
        return 0
    lo = int(round(cfg.min_pitch_ms * sample_rate / 1000.0))
    hi = min(int(round(cfg.max_pitch_ms * sample_rate / 1000.0)), n - 2)
    if hi <= lo:
        return 0
    lags = np.arange(lo, hi + 1)
    seg = ac[lags]
    is_peak = (seg > ac[lags - 1]) & (seg >= ac[lags + 1]) & (seg > 0)
    if not is_peak.any():
        return 0
    cand = lags[is_peak]
    return int(cand[np.argmax(ac[cand])])


def epoch_evidence(profile: EnergyProfile | np.ndarray, avg_pitch_samples: int,
                   sample_rate: int = 16000, cfg: ZtwConfig = ZtwConfig()) -> tuple[np.ndarray, int, bool]:
    """
    Epoch evidence: contrast-normalized profile smoothed by a pitch-long Gaussian.

    The profile is divided by its 20 ms local mean and shifted by -1 so that
    a flat profile gives zero evidence, then convolved with
    ``gaussian_kernel(avg_pitch_samples)``. Pitch estimates outside
    [1 ms, 20 ms] fall back to a 2 ms kernel.

    Returns
    -------
    evidence, kernel_length, used_fallback
    """
    p = np.asarray(profile.values if isinstance(profile, EnergyProfile) else profile, dtype=float)
    lo, hi = int(0.001 * sample_rate), int(0.020 * sample_rate)
    used_fallback = not lo <= avg_pitch_samples <= hi
    length = int(round(cfg.fallback_kernel_ms * sample_rate / 1000.0)) if used_fallback else int(avg_pitch_samples)
    win = int(round(cfg.local_mean_ms * sample_rate / 1000.0)) | 1
    local = np.maximum(moving_average(p, win), 1e-8)
    normalized = p / local - 1.0
    return convolve_same(normalized, gaussian_kernel(length)), length, used_fallback


def _candidate_peaks(ev: np.ndarray) -> np.ndarray:
    if ev.size < 3:
        return np.zeros(0, dtype=np.int64)
    mid = ev[1:-1]
    # a plateau contributes its first sample
    return np.flatnonzero((mid > ev[:-2]) & (mid >= ev[2:]) & (mid > 0)) + 1


def pick_epochs(evidence, region: VoicedRegion | None = None, sample_rate: int = 16000,
                min_gap_ms: float = 2.0, strengths_from=None) -> EpochTrain:
    """
    Positive evidence peaks surviving the two spurious-peak rules.

    (a) Successive peaks closer than ``min_gap_ms``: the smaller one goes.
    (b) Successive peaks must enclose a sample where the mean-removed
    evidence is negative; otherwise the smaller one goes.

    Locations are returned in waveform coordinates (offset by
    ``region.start``). Strengths are the evidence values unless
    ``strengths_from`` supplies another per-sample signal (same length).
    """
    ev = np.asarray(evidence, dtype=float)
    offset = region.start if region is not None else 0
    cand = _candidate_peaks(ev)
    min_gap = min_gap_ms * sample_rate / 1000.0

    kept: list[int] = []
    for c in cand:
        if kept and c - kept[-1] < min_gap:
            if ev[c] > ev[kept[-1]]:
                kept[-1] = c
            continue
        kept.append(int(c))

    centered = ev - ev.mean()
    final: list[int] = []
    for c in kept:
        if final and not (centered[final[-1]:c] < 0).any():
            if ev[c] > ev[final[-1]]:
                final[-1] = c
            continue
        final.append(c)

    idx = np.asarray(final, dtype=np.int64)
    source = ev if strengths_from is None else np.asarray(strengths_from, dtype=float)
    strengths = source[idx] if idx.size else np.zeros(0)
    if strengths_from is not None and idx.size:
        good = strengths > 0
        idx, strengths = idx[good], strengths[good]
    return EpochTrain(idx + offset, strengths, region)


def detect_epochs(w: Waveform, regions: list[VoicedRegion], cfg: ZtwConfig = ZtwConfig(),
                  keep_signals: bool = False) -> list[EpochTrain]:
    """
    Run the full epoch pipeline on each voiced region.

    Regions shorter than ``cfg.min_region_ms`` are skipped. Epoch strengths
    are the smoothed spectral energy at each epoch, so they scale with the
    square of the waveform amplitude while locations do not move.
    """
    fs = w.sample_rate
    y = difference(w.samples)
    trains = []
    for region in regions:
        if len(region) < cfg.min_region_ms * fs / 1000.0:
            log.info("skipping %s: shorter than %.0f ms", region, cfg.min_region_ms)
            continue
        prof = energy_profile(w, region, cfg, differenced=y)
        period = estimate_avg_pitch(prof, fs, cfg)
        ev, klen, fallback = epoch_evidence(prof, period, fs, cfg)
        if fallback:
            log.info("%s: pitch estimate %d samples out of range, using %.0f ms kernel",
                     region, period, cfg.fallback_kernel_ms)
        train = pick_epochs(ev, region, fs, cfg.min_gap_ms, strengths_from=prof.values)
        train.kernel_length, train.used_fallback = klen, fallback
        if keep_signals:
            train.evidence, train.profile = ev, prof.values
        trains.append(train)
    return trains


def all_locations(trains: list[EpochTrain]) -> np.ndarray:
    if not trains:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate([t.locations for t in trains])


def identification(detected, reference, tolerance: int | None = None) -> dict:
    """
    GCI detection scores against reference instants.

    Each reference epoch owns the larynx cycle between the midpoints to its
    neighbours. A cycle with exactly one detection is identified; with none
    it is a miss, with several a false alarm. With ``tolerance`` (samples),
    an identification also requires ``|error| <= tolerance``.
    """
    det = np.sort(np.asarray(detected, dtype=np.int64))
    ref = np.sort(np.asarray(reference, dtype=np.int64))
    n = ref.size
    if n == 0:
        return dict(rate=float("nan"), miss=float("nan"), false_alarm=float("nan"), errors=np.zeros(0))
    gaps = np.diff(ref)
    lo = np.empty(n)
    hi = np.empty(n)
    lo[1:] = ref[:-1] + gaps / 2.0
    hi[:-1] = ref[:-1] + gaps / 2.0
    first = gaps[0] if n > 1 else 160
    last = gaps[-1] if n > 1 else 160
    lo[0] = ref[0] - first / 2.0
    hi[-1] = ref[-1] + last / 2.0
    a = np.searchsorted(det, lo, side="left")
    b = np.searchsorted(det, hi, side="left")
    counts = b - a
    one = counts == 1
    errors = det[a[one]] - ref[one]
    hits = one.copy()
    if tolerance is not None:
        hits[one] = np.abs(errors) <= tolerance
    return dict(
        rate=float(hits.mean()),
        miss=float((counts == 0).mean()),
        false_alarm=float((counts > 1).mean()),
        errors=errors,
    )
