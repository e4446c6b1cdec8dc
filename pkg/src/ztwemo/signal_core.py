"""
Numeric kernels shared by the VAD, epoch and feature stages.

Everything here is a pure function of its inputs. Array arguments are
converted with ``np.asarray(..., dtype=float)``; outputs are new float64
arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySignal, InvalidLength, InvalidWidth, ZtwError

#: Guard for the cosine-phase division where the envelope vanishes.
PHASE_EPS = 1e-12


@dataclass(frozen=True)
class Waveform:
    """Mono samples in [-1, 1] with their sample rate."""

    samples: np.ndarray
    sample_rate: int = 16000

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ZtwError(f"waveform must be 1-D, got shape {samples.shape}")
        if self.sample_rate <= 0:
            raise ZtwError(f"sample rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise ZtwError("waveform contains NaN or Inf")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    def scaled(self, factor: float) -> "Waveform":
        return Waveform(self.samples * factor, self.sample_rate)


def difference(x) -> np.ndarray:
    """First difference with ``out[0] = x[0]`` (the sample before the start is taken as zero)."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise EmptySignal("cannot difference an empty signal")
    out = np.empty_like(x)
    out[0] = x[0]
    np.subtract(x[1:], x[:-1], out=out[1:])
    return out


def window_h1(n_fft: int) -> np.ndarray:
    """
    Zero-time window ``h1[n] = 1 / (4 sin^2(pi n / N))``, ``h1[0] = 0``.

    Multiplying a segment by this window (squared) integrates its spectrum
    twice (four times), which smooths out the ripple caused by the very
    short analysis segment.
    """
    if n_fft < 2:
        raise InvalidLength(f"h1 needs N >= 2, got {n_fft}")
    n = np.arange(1, n_fft)
    # fold onto n <= N/2 so that h1[n] == h1[N - n] holds bit for bit
    n = np.minimum(n, n_fft - n)
    h = np.zeros(n_fft)
    h[1:] = 1.0 / (4.0 * np.sin(np.pi * n / n_fft) ** 2)
    return h


def window_h2(m: int) -> np.ndarray:
    """Tapering window ``h2[n] = 4 cos^2(pi n / (2M))`` for ``n < M``."""
    if m < 1:
        raise InvalidLength(f"h2 needs M >= 1, got {m}")
    n = np.arange(m)
    return 4.0 * np.cos(np.pi * n / (2.0 * m)) ** 2


def dft_real(x, n_fft: int) -> tuple[np.ndarray, np.ndarray]:
    """Full-length DFT of a real sequence zero-padded to ``n_fft``; returns (real, imag)."""
    x = np.asarray(x, dtype=float)
    if n_fft < 1 or n_fft < x.shape[-1]:
        raise InvalidLength(f"n_fft={n_fft} shorter than input length {x.shape[-1]}")
    spec = np.fft.fft(x, n=n_fft)
    return spec.real.copy(), spec.imag.copy()


def idft_real(re, im) -> np.ndarray:
    """Inverse of :func:`dft_real`, real part only."""
    return np.fft.ifft(np.asarray(re) + 1j * np.asarray(im)).real


def hilbert_transform(x, axis: int = -1) -> np.ndarray:
    """
    Discrete Hilbert transform along ``axis``.

    The spectrum is multiplied by ``-j`` on positive frequencies and ``+j``
    on negative ones; the DC and Nyquist bins are zeroed.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[axis]
    spec = np.fft.fft(x, axis=axis)
    mult = np.zeros(n, dtype=complex)
    half = (n - 1) // 2
    mult[1:half + 1] = -1j
    mult[n - half:] = 1j
    shape = [1] * x.ndim
    shape[axis] = n
    return np.fft.ifft(spec * mult.reshape(shape), axis=axis).real


def hilbert_envelope(x, axis: int = -1) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.hypot(x, hilbert_transform(x, axis=axis))


def analytic_envelope_and_cos_phase(x) -> tuple[np.ndarray, np.ndarray]:
    """
    Hilbert envelope and cosine of the instantaneous phase.

    Returns
    -------
    envelope : ndarray
        ``sqrt(x^2 + H{x}^2)``.
    cos_phase : ndarray
        ``x / envelope``, set to 0 where the envelope is below ``PHASE_EPS``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] < 2:
        raise InvalidLength("analytic signal needs at least 2 samples")
    env = hilbert_envelope(x)
    cos_phase = np.zeros_like(x)
    ok = env >= PHASE_EPS
    cos_phase[ok] = np.clip(x[ok] / env[ok], -1.0, 1.0)
    return env, cos_phase


def moving_average(x, width: int) -> np.ndarray:
    """Centered moving average; the window shrinks at the edges (no padding bias)."""
    x = np.asarray(x, dtype=float)
    if width < 1 or width % 2 == 0:
        raise InvalidWidth(f"smoothing width must be odd and >= 1, got {width}")
    if width == 1 or x.size == 0:
        return x.copy()
    half = width // 2
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(x.size)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, x.size)
    return (csum[hi] - csum[lo]) / (hi - lo)


def mean_smooth(x, width: int = 5) -> np.ndarray:
    return moving_average(x, width)


def gaussian_kernel(length: int, normalize: bool = True) -> np.ndarray:
    """
    Gaussian of ``length`` taps with ``sigma = length / 4``.

    Tap offsets run over ``[-floor(L/2), ceil(L/2) - 1]``; the center tap
    sits at index ``L // 2`` and ``g[c + n] == g[c - n]`` wherever both taps
    exist (for even ``L`` the first tap has no mirror). With ``normalize``
    the taps are rescaled to unit sum.
    """
    if length < 1:
        raise InvalidLength(f"kernel length must be >= 1, got {length}")
    if length == 1:
        return np.ones(1)
    sigma = length / 4.0
    n = np.abs(np.arange(length) - length // 2)
    g = np.exp(-(n ** 2) / (2.0 * sigma ** 2)) / (sigma * np.sqrt(2.0 * np.pi))
    if normalize:
        g = g / g.sum()
    return g


def convolve_same(x, kernel) -> np.ndarray:
    """Linear convolution cropped to ``len(x)``, aligned on kernel tap ``len(kernel) // 2``."""
    x = np.asarray(x, dtype=float)
    k = np.asarray(kernel, dtype=float)
    full = np.convolve(x, k) if x.size * k.size < 1 << 16 else _fft_convolve(x, k)
    start = k.size // 2
    return full[start:start + x.size]


def _fft_convolve(x, k):
    n = x.size + k.size - 1
    nfft = 1 << (n - 1).bit_length()
    return np.fft.irfft(np.fft.rfft(x, nfft) * np.fft.rfft(k, nfft), nfft)[:n]
