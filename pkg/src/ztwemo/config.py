"""
Pipeline configuration: one flat, typed record of every tunable.

Files are JSON objects whose keys are field names; unknown keys and values
of the wrong type are rejected before any processing starts. The
``ZTWEMO_CONFIG`` environment variable names a config file to use when no
explicit path is given.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .classifier.hmm import EMOTIONS
from .classifier.mlp import MlpConfig
from .epoch import ZtwConfig
from .errors import ConfigError
from .features.mfcc import MfccConfig
from .vad import VadConfig

ENV_VAR = "ZTWEMO_CONFIG"

FEATURE_SETS = ("MFCC39", "EPOCH30", "COMBINED69")
CMVN_SCOPES = ("utterance", "speaker")
SCORERS = ("mlp", "gmm")


@dataclass
class PipelineConfig:
    sample_rate: int = 16000
    # voiced activity detection
    vad_trend_window_ms: float = 10.0
    vad_frame_ms: float = 30.0
    vad_shift_ms: float = 5.0
    vad_n_fft: int = 1024
    vad_harmonics: int = 10
    vad_f0_min: float = 60.0
    vad_f0_max: float = 500.0
    vad_threshold: float = 0.08
    vad_min_region_ms: float = 30.0
    vad_bridge_gap_ms: float = 20.0
    vad_envelope_weighting: bool = True
    # zero-time windowing epochs
    ztw_segment_ms: float = 3.0
    ztw_n_fft: int = 2048
    ztw_n_peaks: int = 3
    ztw_smooth_width: int = 5
    ztw_local_mean_ms: float = 20.0
    ztw_min_gap_ms: float = 2.0
    ztw_fallback_kernel_ms: float = 2.0
    ztw_min_pitch_ms: float = 2.0
    ztw_max_pitch_ms: float = 12.5
    ztw_min_region_ms: float = 40.0
    # MFCC front end
    mfcc_n_fft: int = 512
    mfcc_n_mels: int = 26
    mfcc_f_min: float = 20.0
    mfcc_f_max: float = 8000.0
    mfcc_n_ceps: int = 13
    mfcc_log_floor: float = 1e-10
    # feature transforms
    feature_set: str = "COMBINED69"
    cmvn_scope: str = "utterance"
    splice_context: int = 4
    use_lda: bool = True
    lda_dim: int = 80
    # classifier
    emotions: list = field(default_factory=lambda: list(EMOTIONS))
    hmm_states: int = 5
    gmm_mixes: int = 1
    gmm_max_iter: int = 20
    gmm_tol: float = 1e-4
    scorer: str = "mlp"
    mlp_hidden: list = field(default_factory=lambda: [64, 64])
    mlp_lr_start: float = 0.005
    mlp_lr_end: float = 0.0005
    mlp_decay_epochs: int = 25
    mlp_extra_epochs: int = 20
    mlp_batch: int = 512
    mlp_grad_reduction: str = "sum"
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        for f in fields(self):
            v = getattr(self, f.name)
            want = f.type
            if want == "bool":
                ok = isinstance(v, bool)
            elif want == "int":
                ok = isinstance(v, int) and not isinstance(v, bool)
            elif want == "float":
                ok = isinstance(v, (int, float)) and not isinstance(v, bool)
                if ok:
                    object.__setattr__(self, f.name, float(v))
            elif want == "str":
                ok = isinstance(v, str)
            else:
                ok = isinstance(v, (list, tuple))
                if ok:
                    object.__setattr__(self, f.name, list(v))
            if not ok:
                raise ConfigError(f"{f.name}: expected {want}, got {type(v).__name__} ({v!r})")
        if self.sample_rate != 16000:
            raise ConfigError("only 16 kHz input is supported")
        if self.feature_set not in FEATURE_SETS:
            raise ConfigError(f"feature_set must be one of {FEATURE_SETS}")
        if self.cmvn_scope not in CMVN_SCOPES:
            raise ConfigError(f"cmvn_scope must be one of {CMVN_SCOPES}")
        if self.scorer not in SCORERS:
            raise ConfigError(f"scorer must be one of {SCORERS}")
        if self.mlp_grad_reduction not in ("sum", "mean"):
            raise ConfigError("mlp_grad_reduction must be 'sum' or 'mean'")
        if len(set(self.emotions)) != len(self.emotions) or len(self.emotions) < 2:
            raise ConfigError("emotions must list at least two distinct labels")
        if any(not isinstance(h, int) or h < 1 for h in self.mlp_hidden):
            raise ConfigError("mlp_hidden must list positive layer widths")
        for name in ("hmm_states", "gmm_mixes", "gmm_max_iter", "lda_dim", "mlp_batch", "jobs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for f in fields(self):
            if f.name.endswith("_ms") and getattr(self, f.name) <= 0:
                raise ConfigError(f"{f.name} must be positive")
        if self.mfcc_n_ceps != 13:
            raise ConfigError("mfcc_n_ceps is fixed at 13 by the MFCC13 feature layout")
        if self.splice_context < 0:
            raise ConfigError("splice_context must be >= 0")
        if not 0 < self.vad_threshold < 1:
            raise ConfigError("vad_threshold must lie in (0, 1)")
        try:
            self.vad(), self.ztw(), self.mfcc()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # stage configs -------------------------------------------------------
    def vad(self) -> VadConfig:
        return VadConfig(self.vad_trend_window_ms, self.vad_frame_ms, self.vad_shift_ms, self.vad_n_fft,
                         self.vad_harmonics, self.vad_f0_min, self.vad_f0_max, self.vad_threshold,
                         self.vad_min_region_ms, self.vad_bridge_gap_ms, self.vad_envelope_weighting)

    def ztw(self) -> ZtwConfig:
        return ZtwConfig(self.ztw_segment_ms, self.ztw_n_fft, self.ztw_n_peaks, self.ztw_smooth_width,
                         self.ztw_local_mean_ms, self.ztw_min_gap_ms, self.ztw_fallback_kernel_ms,
                         self.ztw_min_pitch_ms, self.ztw_max_pitch_ms, self.ztw_min_region_ms)

    def mfcc(self) -> MfccConfig:
        return MfccConfig(self.mfcc_n_fft, self.mfcc_n_mels, self.mfcc_f_min, self.mfcc_f_max,
                          self.mfcc_n_ceps, self.mfcc_log_floor)

    def mlp(self) -> MlpConfig:
        return MlpConfig(tuple(self.mlp_hidden), self.mlp_lr_start, self.mlp_lr_end, self.mlp_decay_epochs,
                         self.mlp_extra_epochs, self.mlp_batch, self.seed, self.mlp_grad_reduction)

    # persistence ---------------------------------------------------------
    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {', '.join(unknown)}")
        return cls(**data)

    def updated(self, **changes) -> "PipelineConfig":
        d = self.to_dict()
        d.update(changes)
        return PipelineConfig.from_dict(d)


def load_config(path: str | os.PathLike | None = None) -> PipelineConfig:
    """
    Read a config file; ``None`` falls back to ``$ZTWEMO_CONFIG`` and then defaults.
    """
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        return PipelineConfig()
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {p}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from exc
    return PipelineConfig.from_dict(data)
