"""
Acceptance suite: one test per criterion, named ``test_criterion_<n>_...``.

A summary with one PASS/FAIL line per criterion is printed at the end of
the session (see ``conftest.py``).
"""

import itertools
import time

import numpy as np
import pytest

from ztwemo.classifier import cross_validate, unweighted_average, viterbi
from ztwemo.classifier.mlp import init_mlp, loss_and_grads
from ztwemo.config import PipelineConfig
from ztwemo.epoch import ZtwConfig, all_locations, detect_epochs, energy_profile, identification
from ztwemo.features import instantaneous_pitch
from ztwemo.pipeline import RawFeatures, analyze, train_model
from ztwemo.signal_core import (
    Waveform, analytic_envelope_and_cos_phase, dft_real, gaussian_kernel, window_h1,
)
from ztwemo.synth import SyntheticSpec, corpus_specs, f0_at, synthesize
from ztwemo.vad import VoicedRegion, detect_voiced

pytestmark = pytest.mark.acceptance

TOL_SAMPLES = 4  # 0.25 ms at 16 kHz


def _detect(spec):
    w, gcis = synthesize(spec)
    t0 = time.perf_counter()
    regions, _ = detect_voiced(w)
    trains = detect_epochs(w, regions)
    return w, gcis, trains, time.perf_counter() - t0


@pytest.mark.parametrize("f0", [100, 150, 250])
def test_criterion_1_epoch_identification(f0):
    spec = SyntheticSpec(f0_start=f0, f0_end=f0, duration=3.0, seed=11, lead_silence=0.2, trail_silence=0.2)
    _, gcis, trains, elapsed = _detect(spec)
    score = identification(all_locations(trains), gcis, tolerance=TOL_SAMPLES)
    print(f"f0 {f0} Hz: identified within 0.25 ms {100 * score['rate']:.1f}%, "
          f"runtime {elapsed:.1f} s")
    assert elapsed < 30.0
    assert score["rate"] >= 0.95


def test_criterion_2_pitch_sweep():
    spec = SyntheticSpec(f0_start=100, f0_end=400, duration=2.0, seed=11, lead_silence=0.2, trail_silence=0.2)
    w, gcis, trains, _ = _detect(spec)
    score = identification(all_locations(trains), gcis)
    rel = []
    lead = int(0.2 * w.sample_rate)
    for t in trains:
        p, idx = instantaneous_pitch(t)
        mids = (t.locations[idx] + t.locations[idx + 1]) / 2.0
        truth = np.array([f0_at(spec, (m - lead) / w.sample_rate) for m in mids])
        rel.append(np.abs(p - truth) / truth)
    med = float(np.median(np.concatenate(rel)))
    print(f"sweep: identification {100 * score['rate']:.1f}%, pitch median error {100 * med:.2f}%")
    assert score["rate"] >= 0.90
    assert med < 0.05


def test_criterion_3_vad_boundaries_and_scale():
    spec = SyntheticSpec(f0_start=150, f0_end=150, duration=1.0, lead_silence=0.4, trail_silence=0.4, seed=2)
    w, _ = synthesize(spec)
    regions, _ = detect_voiced(w)
    assert len(regions) == 1
    start, end = 0.4 * 16000, 1.4 * 16000
    tol = 0.030 * 16000
    assert abs(regions[0].start - start) <= tol and abs(regions[0].end - end) <= tol
    for a in (0.1, 10.0):
        assert detect_voiced(Waveform(w.samples * a))[0] == regions


def test_criterion_4_dsp_invariants():
    n = np.arange(4096)
    env, _ = analytic_envelope_and_cos_phase(np.cos(2 * np.pi * 50 * n / 4096))
    assert np.max(np.abs(env[200:-200] - 1.0)) < 1e-3
    for length in (1, 2, 7, 32, 101):
        g = gaussian_kernel(length)
        assert abs(g.sum() - 1.0) < 1e-12
        c = length // 2
        k = min(c, length - 1 - c)
        assert np.allclose(g[c - k:c], g[c + 1:c + k + 1][::-1], atol=1e-12, rtol=0)
    x = np.random.default_rng(0).standard_normal(1000)
    re, im = dft_real(x, 2048)
    assert abs((re ** 2 + im ** 2).sum() / 2048 - (x ** 2).sum()) / (x ** 2).sum() < 1e-6
    h = window_h1(2048)
    assert np.array_equal(h[1:], h[1:][::-1])
    w, _ = synthesize(SyntheticSpec(f0_start=120, f0_end=120, duration=0.5, seed=1))
    r = VoicedRegion(0, len(w))
    p1 = energy_profile(w, r, ZtwConfig()).values
    p3 = energy_profile(w.scaled(3.0), r, ZtwConfig()).values
    np.testing.assert_allclose(p3, 9.0 * p1, rtol=1e-9, atol=1e-12 * p1.max())
    assert np.array_equal(np.argsort(p1)[-20:], np.argsort(p3)[-20:])


def _brute(obs, lt, li):
    best, bp = -np.inf, None
    t, s = obs.shape
    for path in itertools.product(range(s), repeat=t):
        sc = li[path[0]] + obs[0, path[0]] + sum(lt[path[i - 1], path[i]] + obs[i, path[i]] for i in range(1, t))
        if sc > best:
            best, bp = sc, path
    return list(bp), best


def test_criterion_5_viterbi_brute_force():
    rng = np.random.default_rng(2024)
    bad = 0
    for _ in range(1000):
        t, s = int(rng.integers(1, 7)), int(rng.integers(1, 6))
        obs = rng.normal(size=(t, s)) * 3
        lt = np.log(rng.dirichlet(np.ones(s), size=s))
        li = np.log(rng.dirichlet(np.ones(s)))
        path, score = viterbi(obs, lt, li)
        bp, bs = _brute(obs, lt, li)
        bad += path.tolist() != bp or abs(score - bs) > 1e-9
    assert bad == 0


def test_criterion_6_gradient_check():
    rng = np.random.default_rng(6)
    model = init_mlp([80, 64, 64, 20], seed=6)
    x = rng.normal(size=(16, 80))
    y = rng.integers(0, 20, 16)
    _, gw, gb = loss_and_grads(model, x, y)
    eps = 1e-5
    worst = 0.0
    for params, grads in ((model.weights, gw), (model.biases, gb)):
        for p, g in zip(params, grads):
            num = np.zeros_like(p)
            flat, nflat = p.reshape(-1), num.reshape(-1)
            for i in range(flat.size):
                old = flat[i]
                flat[i] = old + eps
                lp = loss_and_grads(model, x, y)[0]
                flat[i] = old - eps
                lm = loss_and_grads(model, x, y)[0]
                flat[i] = old
                nflat[i] = (lp - lm) / (2 * eps)
            err = np.linalg.norm(num - g) / max(np.linalg.norm(num) + np.linalg.norm(g), 1e-300)
            worst = max(worst, err)
    print(f"worst per-layer relative error {worst:.2e}")
    assert worst < 1e-4


def _raw(item):
    w, _ = synthesize(item.spec)
    a = analyze(w)
    return RawFeatures(a.mfcc13, a.epoch30)


def test_criterion_7_combined_beats_single_streams():
    t0 = time.perf_counter()
    items = corpus_specs(4, 10, duration=1.0, seed=7)
    raws = [_raw(i) for i in items]
    emos = [i.emotion for i in items]
    spks = [i.speaker for i in items]
    uwa = {}
    for fs in ("MFCC39", "EPOCH30", "COMBINED69"):
        cfg = PipelineConfig(feature_set=fs, cmvn_scope="speaker")
        cv = cross_validate(raws, spks, emos, lambda r, e, s: train_model(r, e, s, cfg),
                            lambda m, r, s: [p for p, _ in m.predict(r, s)], labels=tuple(cfg.emotions))
        uwa[fs] = cv.uwa_mean
    elapsed = time.perf_counter() - t0
    print("LOSO UWA " + ", ".join(f"{k} {v:.1f}" for k, v in uwa.items()) + f"; {elapsed:.0f} s")
    assert elapsed < 600
    assert uwa["COMBINED69"] >= uwa["MFCC39"]
    assert uwa["COMBINED69"] >= uwa["EPOCH30"]
    assert uwa["COMBINED69"] >= 85.0


def test_criterion_8_published_average():
    assert abs(unweighted_average([60.21, 58.17, 59.71, 60.25]) - 59.58) <= 0.01


def test_criterion_9_determinism(tmp_path):
    from ztwemo.cli import main

    assert main(["synth", "--corpus", "--out", str(tmp_path / "wav"), "--speakers", "2",
                 "--per-emotion", "2", "--duration", "0.5", "--seed", "9"]) == 0
    assert main(["extract", "--manifest", str(tmp_path / "wav" / "manifest.csv"),
                 "--out-dir", str(tmp_path / "f"), "--jobs", "1"]) == 0
    man = str(tmp_path / "f" / "features.csv")
    outs = []
    for run in ("a", "b"):
        model = tmp_path / f"{run}.emhm"
        assert main(["train", "--manifest", man, "--model", str(model), "--jobs", "1", "--seed", "0"]) == 0
        assert main(["eval", "--manifest", man, "--model", str(model), "--out", str(tmp_path / run)]) == 0
        outs.append([model.read_bytes(), (tmp_path / f"{run}.jsonl").read_bytes(),
                     (tmp_path / f"{run}.confusion.csv").read_bytes()])
    assert outs[0] == outs[1]
