"""Frame-level features: epoch-source features, MFCCs and their transforms."""

from .epoch_features import (
    EpochFeatures,
    epoch_features,
    frame_epoch_features,
    instantaneous_phase_at_epochs,
    instantaneous_pitch,
    strength_of_excitation,
)
from .lda import LdaTransform, ScatterStats, lda_fit, lda_from_stats
from .matrix import FeatureMatrix, frame_count
from .mfcc import MfccConfig, mel_filterbank, mfcc
from .transforms import CmvnStats, add_deltas, cmvn, cmvn_pooled, combine, splice

__all__ = [
    "EpochFeatures", "epoch_features", "frame_epoch_features", "instantaneous_phase_at_epochs",
    "instantaneous_pitch", "strength_of_excitation", "LdaTransform", "ScatterStats", "lda_fit",
    "lda_from_stats", "FeatureMatrix", "frame_count", "MfccConfig", "mel_filterbank", "mfcc",
    "CmvnStats", "add_deltas", "cmvn", "cmvn_pooled", "combine", "splice",
]
