"""Pure numpy implementations of the hot loops (reference and fallback)."""

import numpy as np


def peak_sum_rows(h, k):
    """Per row, the sum of the ``k`` largest strict interior local maxima (fewer if fewer exist)."""
    h = np.asarray(h, dtype=float)
    if h.ndim != 2:
        raise ValueError("expected a 2-D array")
    rows, cols = h.shape
    if cols < 3 or k < 1:
        return np.zeros(rows)
    mid = h[:, 1:-1]
    is_max = (mid > h[:, :-2]) & (mid > h[:, 2:])
    vals = np.where(is_max, mid, -np.inf)
    k = min(k, vals.shape[1])
    top = -np.partition(-vals, k - 1, axis=1)[:, :k]
    top[~np.isfinite(top)] = 0.0
    # sorted summation keeps the result identical to the compiled kernel
    top = np.sort(top, axis=1)[:, ::-1]
    out = np.zeros(rows)
    for j in range(k):
        out += top[:, j]
    return out


def viterbi_log(log_init, log_trans, obs):
    """
    Max-product decoding in the log domain.

    Ties go to the lower state index, both for back-pointers and for the
    final state. Returns ``(path, score)``; ``score`` is ``-inf`` when every
    path is impossible.
    """
    log_init = np.asarray(log_init, dtype=float)
    log_trans = np.asarray(log_trans, dtype=float)
    obs = np.asarray(obs, dtype=float)
    n_frames, n_states = obs.shape
    back = np.zeros((n_frames, n_states), dtype=np.int64)
    delta = log_init + obs[0]
    for t in range(1, n_frames):
        cand = delta[:, None] + log_trans
        # argmax returns the first (lowest) index among ties
        best = np.argmax(cand, axis=0)
        back[t] = best
        delta = cand[best, np.arange(n_states)] + obs[t]
    path = np.empty(n_frames, dtype=np.int64)
    path[-1] = int(np.argmax(delta))
    score = float(delta[path[-1]])
    for t in range(n_frames - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path, score
