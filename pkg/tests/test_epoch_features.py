import numpy as np
import pytest

from ztwemo.epoch import EpochTrain, detect_epochs
from ztwemo.features import (
    EpochFeatures,
    epoch_features,
    frame_epoch_features,
    frame_count,
    instantaneous_phase_at_epochs,
    instantaneous_pitch,
    strength_of_excitation,
)
from ztwemo.synth import SyntheticSpec, preset_spec, synthesize
from ztwemo.vad import VoicedRegion


def train(locs, strengths=None):
    locs = np.asarray(locs)
    s = np.ones(locs.size) if strengths is None else np.asarray(strengths, dtype=float)
    return EpochTrain(locs, s)


class TestPitch:
    def test_uniform_train(self):
        p, _ = instantaneous_pitch(train(np.arange(0, 1600, 160)))
        np.testing.assert_allclose(p, 100.0)

    def test_direct_formula(self):
        p, idx = instantaneous_pitch(train([0, 160, 240]))
        np.testing.assert_allclose(p, [100.0, 200.0])
        assert idx.tolist() == [0, 1]

    def test_implausible_dropped_with_index(self):
        # 10 samples -> 1600 Hz is dropped; 400 samples -> 40 Hz is dropped
        p, idx = instantaneous_pitch(train([0, 160, 170, 330, 730]))
        np.testing.assert_allclose(p, [100.0, 100.0])
        assert idx.tolist() == [0, 2]

    def test_single_epoch(self):
        p, idx = instantaneous_pitch(train([5]))
        assert p.size == 0 and idx.size == 0

    def test_tracks_sweep(self):
        spec = SyntheticSpec(f0_start=100, f0_end=400, contour="linear", duration=2.0, seed=4)
        w, gcis = synthesize(spec)
        t = detect_epochs(w, [VoicedRegion(0, len(w))])[0]
        p, idx = instantaneous_pitch(t)
        mids = (t.locations[idx] + t.locations[idx + 1]) / 2
        truth = np.array([spec.f0_start + (spec.f0_end - spec.f0_start) * m / len(w) for m in mids])
        assert np.median(np.abs(p - truth) / truth) < 0.05


class TestSoe:
    def test_constant(self):
        np.testing.assert_array_equal(strength_of_excitation(train([0, 100, 200], [2, 2, 2])), [0, 0])

    def test_formula(self):
        np.testing.assert_array_equal(strength_of_excitation(train([0, 100, 200], [3, 1, 4])), [2, -3])

    def test_short(self):
        assert strength_of_excitation(train([0])).size == 0

    def test_quadratic_scaling(self, vowel_100):
        w, _ = vowel_100
        r = [VoicedRegion(3200, 19200)]
        a = strength_of_excitation(detect_epochs(w, r)[0])
        b = strength_of_excitation(detect_epochs(w.scaled(0.5), r)[0])
        np.testing.assert_allclose(b, 0.25 * a, rtol=1e-9, atol=1e-12 * np.abs(a).max())


class TestPhase:
    def test_range(self, vowel_100):
        w, _ = vowel_100
        t = detect_epochs(w, [VoicedRegion(3200, 19200)], keep_signals=True)[0]
        c = instantaneous_phase_at_epochs(t.evidence, t)
        assert c.size == len(t) and np.all(np.abs(c) <= 1.0)

    def test_cosine_maxima(self):
        n = np.arange(3200)
        ev = np.cos(2 * np.pi * n / 160)
        t = EpochTrain(np.arange(320, 2880, 160), np.ones(16), VoicedRegion(1000, 4200))
        t.locations = t.locations + 1000
        c = instantaneous_phase_at_epochs(ev, t)
        np.testing.assert_allclose(c, 1.0, atol=1e-2)

    def test_high_vs_low_arousal_phase_spread(self):
        def spread(emotion):
            vals = []
            for seed in range(3):
                w, _ = synthesize(preset_spec(emotion, seed=seed, duration=1.0))
                t = detect_epochs(w, [VoicedRegion(0, len(w))], keep_signals=True)[0]
                vals.append(np.var(instantaneous_phase_at_epochs(t.evidence, t)))
            return np.mean(vals)

        assert spread("angry") != pytest.approx(spread("sad"), rel=0.05)


class TestFraming:
    def test_unvoiced(self):
        m = frame_epoch_features(EpochFeatures(np.zeros(0, dtype=np.int64), np.zeros(0)), 16000)
        assert m.values.shape == (frame_count(16000), 30)
        assert not m.values.any()

    def test_one_pair_layout(self):
        f = EpochFeatures(np.array([100, 260]), np.array([0.3, 0.9]), np.array([0.0, 100.0]),
                          np.array([0.0, 0.5]), np.array([False, True]))
        m = frame_epoch_features(f, 1600)
        row = m.values[2]  # frame 2 covers [320, 640): neither epoch
        assert not row.any()
        row = m.values[1]  # frame 1 covers [160, 480): only the later epoch
        assert np.flatnonzero(row).tolist() == [0, 10, 20]
        np.testing.assert_allclose(row[[0, 10, 20]], [100.0, 0.5, 0.9])

    def test_uniform_100hz(self):
        locs = np.arange(5, 16000, 160)
        t = train(locs)
        f = EpochFeatures(locs, np.full(locs.size, 0.5), np.full(locs.size, 100.0),
                          np.full(locs.size, 0.1), np.r_[False, np.ones(locs.size - 1, bool)])
        m = frame_epoch_features(f, 16000).values
        assert len(t) == locs.size
        interior = m[2:-2]
        assert np.all((interior[:, :10] != 0).sum(axis=1) == 2)
        assert np.all((interior[:, 20:] != 0).sum(axis=1) <= 2)

    def test_overflow_keeps_latest(self):
        locs = np.arange(0, 320, 20)  # 16 epochs in the first frame
        f = EpochFeatures(locs, np.linspace(0.1, 0.9, locs.size))
        row = frame_epoch_features(f, 320).values[0]
        np.testing.assert_allclose(row[20:30], np.linspace(0.1, 0.9, locs.size)[-10:])

    def test_grid_matches_mfcc(self, vowel_100):
        from ztwemo.features import mfcc

        w, _ = vowel_100
        t = detect_epochs(w, [VoicedRegion(3200, 19200)], keep_signals=True)
        f = EpochFeatures.concat([epoch_features(x) for x in t])
        assert frame_epoch_features(f, len(w)).frames == mfcc(w).frames

    def test_epoch_features_counts(self, vowel_100):
        w, _ = vowel_100
        t = detect_epochs(w, [VoicedRegion(3200, 19200)], keep_signals=True)[0]
        f = epoch_features(t)
        assert len(f) == len(t)
        assert f.pair_mask.sum() <= len(t) - 1
        assert np.all((f.pitch_hz[f.pair_mask] >= 50) & (f.pitch_hz[f.pair_mask] <= 600))
