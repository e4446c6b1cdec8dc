"""
End-to-end orchestration: waveform analysis, feature assembly and the
GMM-HMM bootstrap, LDA and MLP training stack.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .classifier import (
    GmmHmmSet,
    HmmTopology,
    MlpModel,
    StatePriors,
    align_states,
    decode,
    gmm_hmm_train,
    mlp_train,
)
from .config import PipelineConfig
from .epoch import EpochTrain, detect_epochs
from .errors import DimensionMismatch, MissingClass
from .features import (
    CmvnStats,
    EpochFeatures,
    FeatureMatrix,
    LdaTransform,
    add_deltas,
    cmvn,
    cmvn_pooled,
    combine,
    epoch_features,
    frame_epoch_features,
    lda_fit,
    mfcc,
    splice,
)
from .signal_core import Waveform
from .vad import SphContour, VoicedRegion, detect_voiced

log = logging.getLogger(__name__)


@dataclass
class Analysis:
    """Everything measured on one waveform."""

    n_samples: int
    sample_rate: int
    regions: list[VoicedRegion]
    contour: SphContour
    trains: list[EpochTrain]
    epochs: EpochFeatures
    mfcc13: FeatureMatrix
    epoch30: FeatureMatrix


def analyze(w: Waveform, cfg: PipelineConfig = PipelineConfig()) -> Analysis:
    regions, contour = detect_voiced(w, cfg.vad())
    trains = detect_epochs(w, regions, cfg.ztw(), keep_signals=True)
    feats = EpochFeatures.concat([epoch_features(t, w.sample_rate) for t in trains])
    m13 = mfcc(w, cfg.mfcc())
    e30 = frame_epoch_features(feats, len(w), w.sample_rate)
    return Analysis(len(w), w.sample_rate, regions, contour, trains, feats, m13, e30)


@dataclass
class RawFeatures:
    """Per-utterance features before any corpus-dependent normalization."""

    mfcc13: FeatureMatrix
    epoch30: FeatureMatrix

    def __post_init__(self):
        if self.mfcc13.frames != self.epoch30.frames:
            raise DimensionMismatch(f"MFCC has {self.mfcc13.frames} frames, epoch features {self.epoch30.frames}")


def normalized_mfcc39(raws: list[RawFeatures], speakers: list[str], scope: str) -> list[FeatureMatrix]:
    """CMVN (per utterance or pooled per speaker) followed by deltas."""
    if scope == "utterance":
        normed = [cmvn(r.mfcc13) for r in raws]
    else:
        normed = [None] * len(raws)
        for spk in sorted(set(speakers)):
            idx = [i for i, s in enumerate(speakers) if s == spk]
            for i, m in zip(idx, cmvn_pooled([raws[i].mfcc13 for i in idx])):
                normed[i] = m
    return [add_deltas(m) for m in normed]


def assemble(raws: list[RawFeatures], speakers: list[str], feature_set: str, scope: str,
             epoch_stats: CmvnStats | None) -> list[FeatureMatrix]:
    """
    Build the classifier input for ``feature_set``.

    Epoch features are standardized with corpus-level statistics
    (``epoch_stats``, estimated on training data), which keeps the
    between-utterance pitch and strength differences they encode.
    """
    out_m = normalized_mfcc39(raws, speakers, scope) if feature_set != "EPOCH30" else None
    out_e = [epoch_stats.apply(r.epoch30) for r in raws] if feature_set != "MFCC39" else None
    if feature_set == "MFCC39":
        return out_m
    if feature_set == "EPOCH30":
        return out_e
    return [combine(m, e) for m, e in zip(out_m, out_e)]


@dataclass
class HybridModel:
    """A trained classifier and the feature recipe it expects."""

    feature_set: str
    cmvn_scope: str
    splice_context: int
    scorer: str
    topology: HmmTopology
    gmm: GmmHmmSet | None
    epoch_stats: CmvnStats | None
    lda: LdaTransform | None = None
    mlp: MlpModel | None = None
    priors: StatePriors | None = None
    log: list = field(default_factory=list, repr=False)

    @property
    def input_dim(self) -> int:
        return {"MFCC39": 39, "EPOCH30": 30, "COMBINED69": 69}[self.feature_set]

    def network_input(self, m: FeatureMatrix) -> np.ndarray:
        x = splice(m, self.splice_context)
        return self.lda.transform(x).values if self.lda is not None else x.values

    def features(self, raws: list[RawFeatures], speakers: list[str]) -> list[FeatureMatrix]:
        return assemble(raws, speakers, self.feature_set, self.cmvn_scope, self.epoch_stats)

    def decode(self, m: FeatureMatrix):
        if m.dims != self.input_dim:
            raise DimensionMismatch(f"model expects {self.input_dim}-dim {self.feature_set} features, got {m.dims}")
        if self.scorer == "gmm" or self.mlp is None:
            return decode(m, self.gmm)
        return decode(self.network_input(m), self.mlp, self.topology, self.priors)

    def predict(self, raws: list[RawFeatures], speakers: list[str]) -> list[tuple[str, dict]]:
        return [self.decode(m) for m in self.features(raws, speakers)]


def train_model(raws: list[RawFeatures], emotions: list[str], speakers: list[str],
                cfg: PipelineConfig = PipelineConfig()) -> HybridModel:
    """GMM-HMM bootstrap, state alignment, splice + LDA and MLP training."""
    missing = [e for e in cfg.emotions if e not in set(emotions)]
    if missing:
        raise MissingClass(f"training data has no utterances for: {', '.join(missing)}")
    unknown = sorted(set(emotions) - set(cfg.emotions))
    if unknown:
        raise MissingClass(f"labels not in the configured emotion set: {', '.join(unknown)}")
    epoch_stats = None
    if cfg.feature_set != "MFCC39":
        epoch_stats = CmvnStats.fit(np.concatenate([r.epoch30.values for r in raws]))
    feats = assemble(raws, speakers, cfg.feature_set, cfg.cmvn_scope, epoch_stats)
    topo = HmmTopology(tuple(cfg.emotions), cfg.hmm_states)
    corpus = list(zip(feats, emotions))
    gmm = gmm_hmm_train(corpus, topo, cfg.gmm_mixes, cfg.gmm_max_iter, cfg.gmm_tol)
    train_log = [("gmm", e, k, it, ll) for e, k, it, ll in gmm.history]
    model = HybridModel(cfg.feature_set, cfg.cmvn_scope, cfg.splice_context, cfg.scorer,
                        gmm.topology, gmm, epoch_stats, log=train_log)
    if cfg.scorer == "gmm":
        return model
    labels = align_states(corpus, gmm)
    keep = [i for i, l in enumerate(labels) if l is not None]
    spliced = [splice(feats[i], cfg.splice_context) for i in keep]
    y = [labels[i] for i in keep]
    if cfg.use_lda:
        model.lda = lda_fit(spliced, y, cfg.lda_dim, n_classes=topo.n_labels)
        x = np.concatenate([model.lda.transform(s).values for s in spliced])
    else:
        x = np.concatenate([s.values for s in spliced])
    yy = np.concatenate(y)
    model.priors = StatePriors.from_labels(y, topo.n_labels)
    model.mlp, hist = mlp_train(x, yy, topo.n_labels, cfg.mlp())
    model.log.extend(("mlp", "", 0, ep, ce) for ep, _, ce in hist)
    return model
