"""Emotion classification with per-emotion HMMs over GMM or MLP observation scores."""

from .evaluation import CrossValidation, FoldResult, Metrics, cross_validate, evaluate, speaker_folds, unweighted_average
from .gmm import EmotionHmm, GmmHmmSet, GmmState, align_states, gmm_hmm_train, train_emotion_hmm
from .hmm import EMOTIONS, HmmTopology, left_to_right, viterbi
from .hybrid import StatePriors, decode, scaled_loglik
from .mlp import DESK, FULL_SCALE, MlpConfig, MlpModel, init_mlp, loss_and_grads, mlp_train

__all__ = [
    "CrossValidation", "FoldResult", "Metrics", "cross_validate", "evaluate", "speaker_folds",
    "unweighted_average", "EmotionHmm", "GmmHmmSet", "GmmState", "align_states", "gmm_hmm_train",
    "train_emotion_hmm", "EMOTIONS", "HmmTopology", "left_to_right", "viterbi", "StatePriors",
    "decode", "scaled_loglik", "DESK", "FULL_SCALE", "MlpConfig", "MlpModel", "init_mlp",
    "loss_and_grads", "mlp_train",
]
