"""
Diagonal-covariance GMM observation models trained by Viterbi-EM.

Each emotion's HMM starts from a uniform segmentation of its utterances.
Every iteration aligns the data with Viterbi, re-estimates transitions
from the path counts and takes one EM step for each state's mixture on
the frames aligned to it. Components are split (largest weight first)
until the requested mixture count is reached.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ..errors import MissingClass, ZtwError
from .hmm import HmmTopology, transitions_from_paths, uniform_segmentation, viterbi

log = logging.getLogger(__name__)

VAR_FLOOR = 1e-6
_LOG2PI = np.log(2.0 * np.pi)


@dataclass
class GmmState:
    """Mixtures for every state of one HMM: weights (S, K), means and variances (S, K, D)."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    @property
    def n_states(self) -> int:
        return self.weights.shape[0]

    @property
    def n_mix(self) -> int:
        return self.weights.shape[1]

    @property
    def dim(self) -> int:
        return self.means.shape[2]

    def component_loglik(self, x) -> np.ndarray:
        """Log of ``weight * N(x)`` for every component: shape (T, S, K)."""
        x = np.asarray(x, dtype=float)
        s, k, d = self.means.shape
        prec = 1.0 / self.variances.reshape(s * k, d)
        mu = self.means.reshape(s * k, d)
        const = -0.5 * (d * _LOG2PI + np.log(self.variances.reshape(s * k, d)).sum(axis=1)
                        + (mu * mu * prec).sum(axis=1))
        quad = -0.5 * ((x * x) @ prec.T) + x @ (mu * prec).T
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights.reshape(s * k))
        return (quad + const + logw).reshape(x.shape[0], s, k)

    def loglik(self, x) -> np.ndarray:
        """Per-frame, per-state log-likelihood, shape (T, S)."""
        return logsumexp(self.component_loglik(x), axis=2)


@dataclass
class EmotionHmm:
    gmm: GmmState
    transitions: np.ndarray

    def score(self, x, log_init=None) -> tuple[np.ndarray, float]:
        obs = self.gmm.loglik(x)
        end = self.gmm.n_states - 1 if obs.shape[0] >= self.gmm.n_states else None
        with np.errstate(divide="ignore"):
            lt = np.log(self.transitions)
        return viterbi(obs, lt, log_init, end_state=end)


@dataclass
class GmmHmmSet:
    """Trained per-emotion models plus the topology that carries their transitions."""

    topology: HmmTopology
    models: dict
    history: list

    def __getitem__(self, emotion: str) -> EmotionHmm:
        return self.models[emotion]


def _fit_single(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = x.mean(axis=0)
    var = ((x - mean) ** 2).mean(axis=0)
    return mean, np.maximum(var, VAR_FLOOR)


def _em_step(x: np.ndarray, w, mu, var):
    """One EM update of a single diagonal GMM on frames ``x``."""
    k = w.size
    if k == 1:
        m, v = _fit_single(x)
        return np.ones(1), m[None], v[None]
    g = GmmState(w[None], mu[None], var[None])
    comp = g.component_loglik(x)[:, 0, :]
    resp = np.exp(comp - logsumexp(comp, axis=1, keepdims=True))
    nk = resp.sum(axis=0)
    w_new, mu_new, var_new = w.copy(), mu.copy(), var.copy()
    ok = nk > 1e-10
    w_new = np.where(ok, nk / x.shape[0], 0.0)
    w_new /= w_new.sum()
    for j in np.flatnonzero(ok):
        r = resp[:, j]
        m = r @ x / nk[j]
        mu_new[j] = m
        var_new[j] = np.maximum(r @ ((x - m) ** 2) / nk[j], VAR_FLOOR)
    return w_new, mu_new, var_new


def _split(w, mu, var, target: int):
    """Split the heaviest components (means moved by +-0.2 sd) until ``target`` exist."""
    w, mu, var = list(w), list(mu), list(var)
    while len(w) < target:
        j = int(np.argmax(w))
        off = 0.2 * np.sqrt(var[j])
        w[j] /= 2.0
        w.append(w[j])
        mu.append(mu[j] + off)
        mu[j] = mu[j] - off
        var.append(var[j].copy())
    return np.array(w), np.array(mu), np.array(var)


def _align(utts, gmm: GmmState, trans: np.ndarray):
    n_states = gmm.n_states
    with np.errstate(divide="ignore"):
        lt = np.log(trans)
    paths, total = [], 0.0
    for x in utts:
        obs = gmm.loglik(x)
        end = n_states - 1 if x.shape[0] >= n_states else None
        p, sc = viterbi(obs, lt, end_state=end)
        paths.append(p)
        total += sc
    return paths, total


def _reestimate(utts, paths, gmm: GmmState) -> GmmState:
    x_all = np.concatenate(utts)
    s_all = np.concatenate(paths)
    w, mu, var = gmm.weights.copy(), gmm.means.copy(), gmm.variances.copy()
    for s in range(gmm.n_states):
        xs = x_all[s_all == s]
        if xs.shape[0] == 0:
            log.warning("state %d received no frames; keeping its parameters", s)
            continue
        w[s], mu[s], var[s] = _em_step(xs, w[s], mu[s], var[s])
    return GmmState(w, mu, var)


def train_emotion_hmm(utts: list[np.ndarray], n_states: int = 5, mixes: int = 1,
                      max_iter: int = 20, tol: float = 1e-4, label: str = ""):
    """
    Viterbi-EM for one emotion.

    Returns ``(EmotionHmm, history)`` where ``history`` holds one
    ``(n_mix, iteration, loglik_per_frame)`` tuple per alignment pass.
    """
    utts = [np.asarray(u, dtype=float) for u in utts if len(u)]
    if not utts:
        raise MissingClass(f"no frames for emotion {label!r}")
    n_frames = sum(u.shape[0] for u in utts)
    dim = utts[0].shape[1]
    paths = [uniform_segmentation(u.shape[0], n_states) for u in utts]
    trans = transitions_from_paths(paths, n_states)
    gmm = GmmState(np.ones((n_states, 1)), np.zeros((n_states, 1, dim)), np.ones((n_states, 1, dim)))
    gmm = _reestimate(utts, paths, gmm)
    history = []
    k = 1
    while True:
        prev = None
        for it in range(max_iter):
            paths, total = _align(utts, gmm, trans)
            history.append((k, it, total / n_frames))
            if prev is not None and (total - prev) / n_frames < tol:
                break
            prev = total
            trans = transitions_from_paths(paths, n_states, trans)
            gmm = _reestimate(utts, paths, gmm)
        if k >= mixes:
            break
        k = min(2 * k, mixes)
        parts = [_split(gmm.weights[s], gmm.means[s], gmm.variances[s], k) for s in range(n_states)]
        gmm = GmmState(np.stack([p[0] for p in parts]), np.stack([p[1] for p in parts]),
                       np.stack([p[2] for p in parts]))
    log.debug("emotion %s: %d alignment passes, final %.4f per frame", label, len(history), history[-1][2])
    return EmotionHmm(gmm, trans), history


def gmm_hmm_train(corpus, topo: HmmTopology = None, mixes: int = 1, max_iter: int = 20,
                  tol: float = 1e-4) -> GmmHmmSet:
    """
    Train one GMM-HMM per emotion.

    Parameters
    ----------
    corpus : iterable of (features, emotion)
        ``features`` is a FeatureMatrix or a 2-D array.
    """
    topo = topo or HmmTopology()
    by_emotion = {e: [] for e in topo.emotions}
    for feats, emo in corpus:
        if emo not in by_emotion:
            raise MissingClass(f"emotion {emo!r} is not in the topology {topo.emotions}")
        by_emotion[emo].append(getattr(feats, "values", feats))
    missing = [e for e, u in by_emotion.items() if not u]
    if missing:
        raise MissingClass(f"no training utterances for emotion(s): {', '.join(missing)}")
    models, history = {}, []
    for e in topo.emotions:
        model, hist = train_emotion_hmm(by_emotion[e], topo.states_per_emotion, mixes,
                                        max_iter, tol, label=e)
        models[e] = model
        history.extend((e, k, it, ll) for k, it, ll in hist)
        topo = topo.with_transitions(e, model.transitions)
    return GmmHmmSet(topo, models, history)


def align_states(corpus, models: GmmHmmSet) -> list:
    """
    Global frame labels ``emotion_index * n_states + state`` from forced alignment.

    Utterances that cannot be aligned yield ``None`` and a warning.
    """
    topo = models.topology
    out = []
    for i, (feats, emo) in enumerate(corpus):
        x = getattr(feats, "values", feats)
        try:
            path, _ = models[emo].score(x)
        except ZtwError as exc:
            log.warning("utterance %d (%s) could not be aligned: %s", i, emo, exc)
            out.append(None)
            continue
        out.append(topo.index(emo) * topo.states_per_emotion + path)
    return out
