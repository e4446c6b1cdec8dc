import numpy as np
import pytest

from ztwemo.errors import EmptySignal, ZtwError
from ztwemo.features import MfccConfig, frame_count, mel_filterbank, mfcc
from ztwemo.features.mfcc import hz_to_mel, log_mel_energies, mel_to_hz
from ztwemo.signal_core import Waveform


def test_mel_round_trip():
    f = np.array([20.0, 1000.0, 8000.0])
    np.testing.assert_allclose(mel_to_hz(hz_to_mel(f)), f)
    assert hz_to_mel(1000.0) == pytest.approx(1000.0, rel=2e-3)


def test_filterbank_shape_and_coverage():
    fb = mel_filterbank()
    assert fb.shape == (26, 257)
    assert np.all(fb.max(axis=1) > 0)
    assert np.all(fb >= 0) and fb.max() <= 1.0


@pytest.mark.parametrize("n", [320, 321, 480, 16000, 16123])
def test_frame_count(n):
    assert mfcc(Waveform(np.ones(n) * 0.1)).frames == (n - 320) // 160 + 1 == frame_count(n)


def test_too_short():
    with pytest.raises(EmptySignal):
        mfcc(Waveform(np.zeros(319)))


def test_silence_constant_c0():
    m = mfcc(Waveform(np.zeros(4000))).values
    expected = np.sqrt(26) * np.log(1e-10)
    np.testing.assert_allclose(m[:, 0], expected)
    np.testing.assert_allclose(m[:, 1:], 0.0, atol=1e-9)


def test_tone_peaks_at_its_filter():
    n = np.arange(16000)
    w = Waveform(0.5 * np.sin(2 * np.pi * 1000 * n / 16000))
    logmel = log_mel_energies(w)
    fb = mel_filterbank()
    expect = int(np.argmax(fb[:, 32]))  # bin 32 = 1000 Hz at n_fft 512
    assert np.all(np.argmax(logmel, axis=1) == expect)
    c = mfcc(w).values[5:-5, 1:]
    assert np.max(np.abs(c - c[0])) < 1e-3


def test_ceps_count_fixed_by_layout():
    with pytest.raises(ZtwError):
        mfcc(Waveform(np.random.default_rng(0).standard_normal(3200) * 0.1), MfccConfig(n_ceps=20))
