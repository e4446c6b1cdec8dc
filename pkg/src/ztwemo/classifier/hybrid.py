"""Scaled likelihoods from network posteriors and utterance-level decoding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyUtterance, ZtwError
from .gmm import GmmHmmSet
from .hmm import HmmTopology, viterbi
from .mlp import MlpModel

PRIOR_FLOOR = 1e-8
_TINY = np.finfo(float).tiny


@dataclass
class StatePriors:
    """State priors, floored and normalized to unit sum on construction."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ZtwError("priors must be a non-empty vector of non-negative reals")
        if p.sum() <= 0:
            p = np.ones_like(p)
        p = np.maximum(p / p.sum(), PRIOR_FLOOR)
        self.p = p / p.sum()

    @classmethod
    def from_labels(cls, labels, n_states: int) -> "StatePriors":
        counts = np.bincount(np.concatenate([np.asarray(l, dtype=np.int64) for l in labels]),
                             minlength=n_states)
        return cls(counts[:n_states].astype(float))


def scaled_loglik(posteriors, priors: StatePriors) -> np.ndarray:
    """``log p(q|x) - log p(q)``: the frame likelihood up to a per-frame constant."""
    post = np.asarray(posteriors, dtype=float)
    return np.log(np.maximum(post, _TINY)) - np.log(priors.p)


def _pick(logliks: dict, emotions) -> str:
    best = max(logliks[e] for e in emotions)
    return min(e for e in emotions if logliks[e] == best)


def emotion_scores(obs_by_emotion: dict, topo: HmmTopology) -> dict:
    out = {}
    li = topo.log_init()
    s = topo.states_per_emotion
    for e in topo.emotions:
        obs = obs_by_emotion[e]
        end = s - 1 if obs.shape[0] >= s else None
        try:
            _, score = viterbi(obs, topo.log_transitions(e), li, end_state=end)
        except ZtwError:
            score = -np.inf
        out[e] = float(score)
    return out


def decode(features, model, topo: HmmTopology | None = None, priors: StatePriors | None = None):
    """
    Classify one utterance.

    Parameters
    ----------
    features : FeatureMatrix or (frames, dims) array
    model : MlpModel or GmmHmmSet
        With an MLP, emotion ``e`` scores the output slice
        ``[e * S, (e + 1) * S)`` after prior scaling.
    topo : HmmTopology, optional
        Required for the MLP; defaults to the GMM set's own topology.

    Returns
    -------
    emotion : str
        Best-scoring emotion; ties go to the alphabetically first label.
    logliks : dict
        Viterbi score per emotion.
    """
    x = np.asarray(getattr(features, "values", features), dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyUtterance("cannot decode an utterance without frames")
    if isinstance(model, GmmHmmSet):
        topo = topo or model.topology
        obs = {e: model[e].gmm.loglik(x) for e in topo.emotions}
    elif isinstance(model, MlpModel):
        if topo is None:
            raise ZtwError("MLP decoding needs the HMM topology")
        if priors is None:
            priors = StatePriors(np.ones(model.n_out))
        s = topo.states_per_emotion
        # log-softmax directly: avoids log(0) for confidently rejected states
        sl = model.log_proba(x) - np.log(priors.p)
        obs = {e: sl[:, i * s:(i + 1) * s] for i, e in enumerate(topo.emotions)}
    else:
        raise ZtwError(f"unsupported model type {type(model).__name__}")
    logliks = emotion_scores(obs, topo)
    if all(np.isneginf(v) for v in logliks.values()):
        raise ZtwError("utterance is undecodable under every emotion model")
    return _pick(logliks, topo.emotions), logliks
