"""Mel-frequency cepstral coefficients on the shared 20 ms / 10 ms grid."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import dct

from ..errors import EmptySignal
from ..signal_core import Waveform
from .matrix import FeatureMatrix, frame_count, frame_params


@dataclass(frozen=True)
class MfccConfig:
    n_fft: int = 512
    n_mels: int = 26
    f_min: float = 20.0
    f_max: float = 8000.0
    n_ceps: int = 13
    log_floor: float = 1e-10


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def mel_filterbank(n_mels: int = 26, n_fft: int = 512, fs: int = 16000,
                   f_min: float = 20.0, f_max: float = 8000.0) -> np.ndarray:
    """
    Triangular filters, shape ``(n_mels, n_fft // 2 + 1)``.

    Edges are equally spaced on the mel scale and the triangles are
    evaluated on the exact bin frequencies, so no filter is empty even when
    the low-frequency ones are narrower than a bin.
    """
    edges = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))
    freqs = np.arange(n_fft // 2 + 1) * fs / n_fft
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    up = (freqs[None, :] - lo) / (mid - lo)
    down = (hi - freqs[None, :]) / (hi - mid)
    fb = np.maximum(0.0, np.minimum(up, down))
    fb.setflags(write=False)
    return fb


def frame_signal(x: np.ndarray, sample_rate: int = 16000) -> np.ndarray:
    flen, shift = frame_params(sample_rate)
    n = frame_count(x.size, sample_rate)
    if n == 0:
        return np.zeros((0, flen))
    return np.lib.stride_tricks.sliding_window_view(x, flen)[::shift][:n]


def log_mel_energies(w: Waveform, cfg: MfccConfig = MfccConfig()) -> np.ndarray:
    frames = frame_signal(w.samples, w.sample_rate)
    if frames.shape[0] == 0:
        raise EmptySignal(f"{len(w)} samples is shorter than one 20 ms frame")
    win = np.hamming(frames.shape[1])
    power = np.abs(np.fft.rfft(frames * win, cfg.n_fft, axis=1)) ** 2
    fb = mel_filterbank(cfg.n_mels, cfg.n_fft, w.sample_rate, cfg.f_min, cfg.f_max)
    return np.log(np.maximum(power @ fb.T, cfg.log_floor))


def mfcc(w: Waveform, cfg: MfccConfig = MfccConfig()) -> FeatureMatrix:
    """
    13 cepstral coefficients per frame, c0 included.

    Hamming window, 512-point power spectrum, 26 mel filters between 20 Hz
    and 8 kHz, floored log energies and an orthonormal DCT-II.
    """
    logmel = log_mel_energies(w, cfg)
    ceps = dct(logmel, type=2, norm="ortho", axis=1)[:, :cfg.n_ceps]
    return FeatureMatrix(ceps, "MFCC13")
