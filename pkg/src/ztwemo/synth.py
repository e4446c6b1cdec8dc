"""
Source-filter speech synthesizer with exact glottal closure instants.

An impulse train (one impulse per glottal cycle, optional jitter and
shimmer) is passed through an optional spectral-tilt pole, a cascade of
second-order resonators and a first-difference radiation stage. The
impulse positions are the ground-truth GCIs used by the epoch and VAD tests.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError
from .signal_core import Waveform

CONTOURS = ("linear", "exponential", "rise-fall", "fall")


@dataclass(frozen=True)
class SyntheticSpec:
    f0_start: float = 120.0
    f0_end: float = 120.0
    contour: str = "linear"
    formants: tuple = (700.0, 1220.0, 2600.0)
    bandwidths: tuple = (130.0, 150.0, 250.0)
    duration: float = 1.0
    jitter: float = 0.0
    shimmer: float = 0.0
    tilt: float = 0.0
    level: float = 0.5
    lead_silence: float = 0.0
    trail_silence: float = 0.0
    noise_db: float = -80.0
    ramp_ms: float = 20.0
    sample_rate: int = 16000
    seed: int = 0
    preset: str | None = None

    def __post_init__(self):
        for f0 in (self.f0_start, self.f0_end):
            if not 50.0 <= f0 <= 600.0:
                raise ConfigError(f"f0 {f0} Hz outside [50, 600]")
        if self.duration <= 0.1:
            raise ConfigError(f"duration must exceed 0.1 s, got {self.duration}")
        if self.contour not in CONTOURS:
            raise ConfigError(f"unknown contour {self.contour!r}; expected one of {CONTOURS}")
        if len(self.formants) != len(self.bandwidths) or not 1 <= len(self.formants) <= 4:
            raise ConfigError("need 1-4 formants with one bandwidth each")
        nyq = self.sample_rate / 2
        if any(not 0 < f < nyq for f in self.formants) or any(b <= 0 for b in self.bandwidths):
            raise ConfigError("formant frequencies must lie in (0, fs/2) with positive bandwidths")
        if not 0.0 <= self.tilt < 1.0:
            raise ConfigError(f"tilt pole must lie in [0, 1), got {self.tilt}")
        if self.jitter < 0 or self.shimmer < 0:
            raise ConfigError("jitter and shimmer are non-negative percentages")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["formants"] = list(self.formants)
        d["bandwidths"] = list(self.bandwidths)
        return d


# Angry and happy speech sit in a high 250-400 Hz pitch range, sad in
# 100-200 Hz and neutral slightly above it. Level, tilt and bandwidth scale are drawn per utterance from
# overlapping ranges, so no single cue separates all four styles.
PRESETS: dict[str, dict] = {
    "angry": dict(f0_range=(250.0, 400.0), contour="rise-fall", level=(0.6, 0.95),
                  tilt=(0.0, 0.3), jitter=1.5, shimmer=8.0, bw_scale=(1.3, 1.9)),
    "happy": dict(f0_range=(250.0, 400.0), contour="exponential", level=(0.35, 0.7),
                  tilt=(0.3, 0.6), jitter=0.4, shimmer=3.0, bw_scale=(0.8, 1.2)),
    "neutral": dict(f0_range=(120.0, 220.0), contour="linear", level=(0.3, 0.6),
                    tilt=(0.15, 0.45), jitter=0.3, shimmer=2.0, bw_scale=(0.9, 1.3)),
    "sad": dict(f0_range=(100.0, 200.0), contour="fall", level=(0.12, 0.35),
                tilt=(0.5, 0.85), jitter=0.2, shimmer=1.5, bw_scale=(0.7, 1.0)),
}

#: First three formants (Hz) of a few adult vowels.
VOWELS: dict[str, tuple] = {
    "a": (730.0, 1090.0, 2440.0),
    "e": (530.0, 1840.0, 2480.0),
    "i": (270.0, 2290.0, 3010.0),
    "o": (570.0, 840.0, 2410.0),
    "u": (300.0, 870.0, 2240.0),
}


def _draw(rng: np.random.Generator, value) -> float:
    if isinstance(value, tuple):
        return float(rng.uniform(*value))
    return float(value)


def preset_spec(emotion: str, seed: int = 0, **overrides) -> SyntheticSpec:
    """
    Draw a :class:`SyntheticSpec` for an emotion style; ``overrides`` win.

    The f0 endpoints, level, tilt and bandwidth scale are random within the
    style's ranges (seeded by ``seed``).
    """
    if emotion not in PRESETS:
        raise ConfigError(f"unknown emotion preset {emotion!r}")
    p = PRESETS[emotion]
    rng = np.random.default_rng(seed)
    lo, hi = p["f0_range"]
    # keep the whole contour inside the style's range
    a, b = np.sort(rng.uniform(lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo), size=2))
    f0_start, f0_end = (b, a) if p["contour"] == "fall" else (a, b)
    level = _draw(rng, p["level"])
    tilt = _draw(rng, p["tilt"])
    bw_scale = _draw(rng, p["bw_scale"])
    formants = overrides.pop("formants", (700.0, 1220.0, 2600.0))
    bws = overrides.pop("bandwidths", None)
    if bws is None:
        bws = tuple(round(bw * bw_scale, 3) for bw in (90.0, 110.0, 170.0, 250.0)[:len(formants)])
    kwargs = dict(
        f0_start=float(f0_start), f0_end=float(f0_end), contour=p["contour"],
        formants=tuple(formants), bandwidths=tuple(bws), level=level,
        tilt=tilt, jitter=p["jitter"], shimmer=p["shimmer"], seed=seed,
        preset=emotion,
    )
    kwargs.update(overrides)
    return SyntheticSpec(**kwargs)


def f0_at(spec: SyntheticSpec, t: float) -> float:
    """Instantaneous target f0 at ``t`` seconds into the voiced part."""
    u = min(max(t / spec.duration, 0.0), 1.0)
    a, b = spec.f0_start, spec.f0_end
    if spec.contour == "linear":
        return a + (b - a) * u
    if spec.contour == "exponential":
        return a * (b / a) ** u
    if spec.contour == "rise-fall":
        return a + (b - a) * math.sin(math.pi * u)
    # fall: start high, end low, concave
    return b + (a - b) * (1.0 - u) ** 2


def glottal_instants(spec: SyntheticSpec, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """GCI sample indices (relative to voicing onset) and their impulse amplitudes."""
    fs = spec.sample_rate
    n_voiced = int(round(spec.duration * fs))
    locs, amps = [], []
    t = 0
    while t < n_voiced:
        locs.append(t)
        amps.append(max(0.05, 1.0 + spec.shimmer / 100.0 * rng.standard_normal()))
        period = fs / f0_at(spec, t / fs)
        period *= 1.0 + spec.jitter / 100.0 * rng.standard_normal()
        t += max(int(round(period)), int(fs / 600.0))
    return np.asarray(locs, dtype=np.int64), np.asarray(amps)


def resonator_coeffs(freq: float, bw: float, fs: int) -> tuple[np.ndarray, np.ndarray]:
    r = math.exp(-math.pi * bw / fs)
    c = 2.0 * r * math.cos(2.0 * math.pi * freq / fs)
    a = np.array([1.0, -c, r * r])
    # unit gain at DC
    return np.array([a.sum()]), a


def synthesize(spec: SyntheticSpec) -> tuple[Waveform, np.ndarray]:
    """
    Render ``spec``.

    Returns
    -------
    waveform : Waveform
        Samples scaled so the voiced peak equals ``spec.level``.
    gcis : ndarray of int
        Ground-truth glottal closure instants in absolute sample indices.
    """
    fs = spec.sample_rate
    rng = np.random.default_rng(spec.seed)
    rel, amps = glottal_instants(spec, rng)
    n_voiced = int(round(spec.duration * fs))
    source = np.zeros(n_voiced)
    source[rel] = amps
    y = source
    if spec.tilt > 0:
        y = lfilter([1.0 - spec.tilt], [1.0, -spec.tilt], y)
    for f, bw in zip(spec.formants, spec.bandwidths):
        b, a = resonator_coeffs(f, bw, fs)
        y = lfilter(b, a, y)
    # lip radiation: first difference, so the voiced signal carries no DC
    y = np.diff(y, prepend=0.0)
    ramp = min(int(round(spec.ramp_ms * fs / 1000.0)), n_voiced // 2)
    if ramp > 0:
        fade = 0.5 - 0.5 * np.cos(np.pi * (np.arange(ramp) + 0.5) / ramp)
        y[:ramp] *= fade
        y[n_voiced - ramp:] *= fade[::-1]
    peak = np.max(np.abs(y))
    if peak > 0:
        y = y * (spec.level / peak)
    lead = int(round(spec.lead_silence * fs))
    trail = int(round(spec.trail_silence * fs))
    out = np.concatenate([np.zeros(lead), y, np.zeros(trail)])
    if spec.noise_db is not None and spec.noise_db > -200:
        out = out + 10.0 ** (spec.noise_db / 20.0) * rng.standard_normal(out.size)
    np.clip(out, -1.0, 1.0, out=out)
    return Waveform(out, fs), rel + lead


def spec_with(spec: SyntheticSpec, **changes) -> SyntheticSpec:
    return replace(spec, **changes)


@dataclass
class CorpusItem:
    emotion: str
    speaker: str
    index: int
    spec: SyntheticSpec = field(repr=False)


SPEAKER_SCALES = (0.92, 1.0, 1.08, 1.16, 0.96, 1.12)


def speaker_formants(speaker_index: int, vowel: str = "a") -> tuple[float, ...]:
    """Formants of ``vowel`` scaled by a per-speaker vocal-tract factor."""
    scale = SPEAKER_SCALES[speaker_index % len(SPEAKER_SCALES)]
    return tuple(round(f * scale, 1) for f in VOWELS[vowel])


def corpus_specs(n_speakers: int, per_emotion: int, emotions=("angry", "happy", "neutral", "sad"),
                 duration: float = 1.0, seed: int = 0, lead_silence: float = 0.15,
                 trail_silence: float = 0.15) -> list[CorpusItem]:
    """
    Seeded synthetic emotion corpus description (``n_speakers * per_emotion * len(emotions)`` items).

    Each utterance gets a random vowel, shaped by its speaker's vocal-tract scale.
    """
    items = []
    rng = np.random.default_rng(seed)
    vowels = sorted(VOWELS)
    for s in range(n_speakers):
        for e in emotions:
            for i in range(per_emotion):
                item_seed = int(rng.integers(0, 2**31 - 1))
                vowel = vowels[int(rng.integers(len(vowels)))]
                spec = preset_spec(e, seed=item_seed, formants=speaker_formants(s, vowel),
                                   duration=duration, lead_silence=lead_silence,
                                   trail_silence=trail_silence)
                items.append(CorpusItem(e, f"spk{s + 1}", i, spec))
    return items
