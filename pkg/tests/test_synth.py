import numpy as np
import pytest

from ztwemo.errors import ConfigError
from ztwemo.io import write_wav
from ztwemo.synth import PRESETS, SyntheticSpec, corpus_specs, f0_at, glottal_instants, preset_spec, synthesize


def test_constant_100hz_gci_count():
    w, g = synthesize(SyntheticSpec(f0_start=100, f0_end=100, duration=1.0))
    assert abs(g.size - 100) <= 1
    assert np.all(np.diff(g) == 160)
    assert len(w) == 16000


def test_deterministic_bytes(tmp_path):
    spec = preset_spec("happy", seed=9)
    for name in ("a.wav", "b.wav"):
        write_wav(tmp_path / name, synthesize(spec)[0])
    assert (tmp_path / "a.wav").read_bytes() == (tmp_path / "b.wav").read_bytes()


@pytest.mark.parametrize("emotion", sorted(PRESETS))
def test_preset_f0_in_range(emotion):
    lo, hi = PRESETS[emotion]["f0_range"]
    for seed in range(5):
        spec = preset_spec(emotion, seed=seed)
        _, g = synthesize(spec)
        f0 = 16000 / np.diff(g)
        assert lo * 0.97 <= np.median(f0) <= hi * 1.03


def test_gcis_offset_by_lead_silence():
    spec = SyntheticSpec(lead_silence=0.25, duration=0.5)
    _, g = synthesize(spec)
    assert g[0] == 4000


def test_contours_hit_endpoints():
    for c in ("linear", "exponential"):
        s = SyntheticSpec(f0_start=100, f0_end=300, contour=c)
        assert f0_at(s, 0) == pytest.approx(100) and f0_at(s, s.duration) == pytest.approx(300)
    s = SyntheticSpec(f0_start=150, f0_end=300, contour="rise-fall")
    assert f0_at(s, s.duration / 2) == pytest.approx(300)


def test_jitter_changes_periods():
    spec = SyntheticSpec(f0_start=200, f0_end=200, jitter=2.0, seed=3)
    locs, amps = glottal_instants(spec, np.random.default_rng(3))
    assert np.std(np.diff(locs)) > 0


@pytest.mark.parametrize("bad", [dict(f0_start=20), dict(duration=0.05), dict(contour="zigzag"),
                                 dict(tilt=1.0), dict(formants=(9000.0,), bandwidths=(100.0,))])
def test_invalid_specs(bad):
    with pytest.raises(ConfigError):
        SyntheticSpec(**bad)


def test_corpus_layout():
    items = corpus_specs(3, 2, seed=1)
    assert len(items) == 24
    assert {i.speaker for i in items} == {"spk1", "spk2", "spk3"}
    assert len({i.spec.seed for i in items}) == 24
