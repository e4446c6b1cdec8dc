"""Left-to-right HMM topology and log-domain Viterbi decoding."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..errors import ConfigError, EmptyUtterance, UndecodableFrame

EMOTIONS = ("angry", "happy", "neutral", "sad")
TRANSITION_FLOOR = 1e-3


def left_to_right(n_states: int, p_stay: float = 0.5) -> np.ndarray:
    """Self-loop ``p_stay``, forward ``1 - p_stay``; the last state is absorbing."""
    a = np.zeros((n_states, n_states))
    for i in range(n_states - 1):
        a[i, i] = p_stay
        a[i, i + 1] = 1.0 - p_stay
    a[-1, -1] = 1.0
    return a


@dataclass
class HmmTopology:
    """
    Per-emotion left-to-right HMMs sharing one state count.

    ``transitions`` has shape ``(n_emotions, n_states, n_states)``. Global
    state labels run ``emotion_index * n_states + state``.
    """

    emotions: tuple = EMOTIONS
    states_per_emotion: int = 5
    transitions: np.ndarray = field(default=None)

    def __post_init__(self):
        self.emotions = tuple(self.emotions)
        if len(set(self.emotions)) != len(self.emotions) or not self.emotions:
            raise ConfigError("emotion labels must be unique and non-empty")
        if self.states_per_emotion < 1:
            raise ConfigError("need at least one state per emotion")
        if self.transitions is None:
            self.transitions = np.stack([left_to_right(self.states_per_emotion)] * len(self.emotions))
        self.transitions = np.asarray(self.transitions, dtype=float)
        self.validate()

    @property
    def n_emotions(self) -> int:
        return len(self.emotions)

    @property
    def n_labels(self) -> int:
        return self.n_emotions * self.states_per_emotion

    def validate(self):
        s = self.states_per_emotion
        if self.transitions.shape != (self.n_emotions, s, s):
            raise ConfigError(f"transitions must have shape {(self.n_emotions, s, s)}")
        if not np.allclose(self.transitions.sum(axis=2), 1.0, atol=1e-10, rtol=0):
            raise ConfigError("transition rows must sum to 1")
        band = np.triu(np.tril(np.ones((s, s)), 1))
        if np.any(self.transitions[:, band == 0] != 0) or np.any(self.transitions < 0):
            raise ConfigError("transitions must be left-to-right (self-loop and next state only)")

    def index(self, emotion: str) -> int:
        return self.emotions.index(emotion)

    def label(self, emotion: str | int, state: int) -> int:
        e = emotion if isinstance(emotion, (int, np.integer)) else self.index(emotion)
        return int(e) * self.states_per_emotion + int(state)

    def log_init(self) -> np.ndarray:
        li = np.full(self.states_per_emotion, -np.inf)
        li[0] = 0.0
        return li

    def log_transitions(self, emotion: str | int) -> np.ndarray:
        e = emotion if isinstance(emotion, (int, np.integer)) else self.index(emotion)
        with np.errstate(divide="ignore"):
            return np.log(self.transitions[e])

    def with_transitions(self, emotion: str | int, trans: np.ndarray) -> "HmmTopology":
        e = emotion if isinstance(emotion, (int, np.integer)) else self.index(emotion)
        t = self.transitions.copy()
        t[e] = trans
        return HmmTopology(self.emotions, self.states_per_emotion, t)


def viterbi(obs_loglik, log_trans, log_init=None, end_state: int | None = None):
    """
    Most likely state path.

    Parameters
    ----------
    obs_loglik : (frames, states) array
    log_trans : (states, states) array of log transition probabilities
    log_init : (states,) array, optional
        Defaults to entering in state 0.
    end_state : int, optional
        Force the path to finish in this state.

    Returns
    -------
    path : int64 array
    loglik : float
        Score of the best path. Ties go to the lower state index.
    """
    obs = np.asarray(obs_loglik, dtype=float)
    if obs.ndim != 2 or obs.shape[0] < 1:
        raise EmptyUtterance("Viterbi needs at least one frame")
    if np.isnan(obs).any():
        raise UndecodableFrame("observation scores contain NaN")
    dead = np.flatnonzero(np.all(np.isneginf(obs), axis=1))
    if dead.size:
        raise UndecodableFrame(f"frame {int(dead[0])} is impossible in every state")
    n_states = obs.shape[1]
    if log_init is None:
        log_init = np.full(n_states, -np.inf)
        log_init[0] = 0.0
    if end_state is not None:
        obs = obs.copy()
        mask = np.full(n_states, -np.inf)
        mask[end_state] = 0.0
        obs[-1] += mask
    path, score = kernels.viterbi_log(np.asarray(log_init, dtype=float),
                                      np.ascontiguousarray(log_trans, dtype=float),
                                      np.ascontiguousarray(obs))
    if not np.isfinite(score):
        raise UndecodableFrame("no state path has finite probability")
    return path, score


def uniform_segmentation(n_frames: int, n_states: int) -> np.ndarray:
    """Split ``n_frames`` into ``n_states`` nearly equal consecutive runs."""
    return np.minimum((np.arange(n_frames) * n_states) // max(n_frames, 1), n_states - 1).astype(np.int64)


def transitions_from_paths(paths, n_states: int, previous: np.ndarray | None = None) -> np.ndarray:
    """Maximum-likelihood left-to-right transitions from state paths, floored."""
    stay = np.zeros(n_states)
    move = np.zeros(n_states)
    for p in paths:
        p = np.asarray(p)
        if p.size < 2:
            continue
        same = p[1:] == p[:-1]
        np.add.at(stay, p[:-1][same], 1)
        np.add.at(move, p[:-1][~same], 1)
    out = left_to_right(n_states) if previous is None else previous.copy()
    for i in range(n_states - 1):
        total = stay[i] + move[i]
        if total == 0:
            continue
        ps = float(np.clip(stay[i] / total, TRANSITION_FLOOR, 1.0 - TRANSITION_FLOOR))
        out[i, i] = ps
        out[i, i + 1] = 1.0 - ps
    out[-1] = 0.0
    out[-1, -1] = 1.0
    return out
