"""
Feed-forward network: logistic-sigmoid hidden layers and a softmax output,
trained for frame cross-entropy with mini-batch SGD.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, log_softmax, softmax

from ..errors import DimensionMismatch, InvalidLabel

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MlpConfig:
    """
    Training schedule.

    The learning rate falls linearly from ``lr_start`` to ``lr_end`` over the
    first ``decay_epochs`` epochs and stays at ``lr_end`` for
    ``extra_epochs`` more. With ``grad_reduction="sum"`` the rate multiplies
    the gradient summed over the mini-batch (the usual convention for these
    small per-frame rates); ``"mean"`` averages instead.
    """

    hidden: tuple = (512, 512, 512, 512, 512)
    lr_start: float = 0.005
    lr_end: float = 0.0005
    decay_epochs: int = 25
    extra_epochs: int = 20
    batch_size: int = 512
    seed: int = 0
    grad_reduction: str = "sum"

    @property
    def epochs(self) -> int:
        return self.decay_epochs + self.extra_epochs

    def lr_at(self, epoch: int) -> float:
        """Learning rate of the 0-based ``epoch``."""
        if epoch >= self.decay_epochs or self.decay_epochs <= 1:
            return self.lr_end if epoch >= self.decay_epochs else self.lr_start
        return self.lr_start + (self.lr_end - self.lr_start) * epoch / (self.decay_epochs - 1)


#: Small network for laptops and tests; the class default is the full 512x5 shape.
DESK = MlpConfig(hidden=(64, 64))
FULL_SCALE = MlpConfig()


@dataclass
class MlpModel:
    weights: list = field(default_factory=list)
    biases: list = field(default_factory=list)

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def n_out(self) -> int:
        return self.weights[-1].shape[1]

    def activations(self, x) -> list[np.ndarray]:
        """Inputs followed by every layer's output (softmax probabilities last)."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.sizes[0]:
            raise DimensionMismatch(f"network expects {self.sizes[0]} inputs, got {x.shape[-1]}")
        acts = [x]
        h = x
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = expit(z) if i < len(self.weights) - 1 else softmax(z, axis=1)
            acts.append(h)
        return acts

    def logits(self, x) -> np.ndarray:
        h = np.asarray(x, dtype=float)
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = expit(h @ w + b)
        return h @ self.weights[-1] + self.biases[-1]

    def predict_proba(self, x) -> np.ndarray:
        return self.activations(x)[-1]

    def log_proba(self, x) -> np.ndarray:
        return log_softmax(self.logits(x), axis=1)


def init_mlp(sizes, seed: int = 0) -> MlpModel:
    """Glorot-uniform weights (scaled by 4 for sigmoid units), zero biases."""
    rng = np.random.default_rng(seed)
    ws, bs = [], []
    for i, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
        lim = np.sqrt(6.0 / (a + b))
        if i < len(sizes) - 2:
            lim *= 4.0
        ws.append(rng.uniform(-lim, lim, size=(a, b)))
        bs.append(np.zeros(b))
    return MlpModel(ws, bs)


def _check_labels(y, n_out: int) -> np.ndarray:
    y = np.asarray(y)
    if y.size and (not np.issubdtype(y.dtype, np.integer) or y.min() < 0 or y.max() >= n_out):
        raise InvalidLabel(f"labels must be integers in [0, {n_out})")
    return y.astype(np.int64)


def loss_and_grads(model: MlpModel, x, y, reduction: str = "mean"):
    """
    Cross-entropy and its gradients by back-propagation.

    Returns ``(loss, grad_w, grad_b)``; ``reduction`` is ``"mean"`` or
    ``"sum"`` over the batch.
    """
    y = _check_labels(y, model.n_out)
    acts = model.activations(x)
    n = y.size
    scale = 1.0 / n if reduction == "mean" else 1.0
    p = acts[-1]
    logp = log_softmax(model.logits(x), axis=1)
    loss = -logp[np.arange(n), y].sum() * scale
    delta = p.copy()
    delta[np.arange(n), y] -= 1.0
    delta *= scale
    gw = [None] * len(model.weights)
    gb = [None] * len(model.weights)
    for i in range(len(model.weights) - 1, -1, -1):
        gw[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i > 0:
            h = acts[i]
            delta = (delta @ model.weights[i].T) * h * (1.0 - h)
    return float(loss), gw, gb


def mlp_train(x, y, n_out: int, cfg: MlpConfig = FULL_SCALE, on_epoch=None) -> tuple[MlpModel, list]:
    """
    Train a fresh network on frames ``x`` with integer labels ``y``.

    Shuffling uses ``cfg.seed``, so equal inputs give equal weights.
    ``on_epoch(epoch, lr, mean_cross_entropy)`` is called after each epoch.
    Returns ``(model, history)`` with one ``(epoch, lr, ce)`` per epoch.
    """
    x = np.asarray(x, dtype=float)
    y = _check_labels(y, n_out)
    if x.shape[0] != y.size:
        raise DimensionMismatch(f"{x.shape[0]} frames but {y.size} labels")
    sizes = [x.shape[1], *cfg.hidden, n_out]
    model = init_mlp(sizes, cfg.seed)
    rng = np.random.default_rng(cfg.seed + 1)
    history = []
    for epoch in range(cfg.epochs):
        lr = cfg.lr_at(epoch)
        order = rng.permutation(y.size)
        total = 0.0
        for start in range(0, y.size, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, gw, gb = loss_and_grads(model, x[idx], y[idx], cfg.grad_reduction)
            total += loss if cfg.grad_reduction == "sum" else loss * idx.size
            for w, g in zip(model.weights, gw):
                w -= lr * g
            for b, g in zip(model.biases, gb):
                b -= lr * g
        ce = total / max(y.size, 1)
        history.append((epoch, lr, ce))
        if on_epoch is not None:
            on_epoch(epoch, lr, ce)
        log.debug("epoch %d lr %.5f ce %.4f", epoch, lr, ce)
    return model, history


def accuracy(model: MlpModel, x, y) -> float:
    return float(np.mean(np.argmax(model.logits(x), axis=1) == np.asarray(y)))
