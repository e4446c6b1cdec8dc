import numpy as np
import pytest

from ztwemo.classifier.mlp import MlpConfig, accuracy, init_mlp, loss_and_grads, mlp_train
from ztwemo.errors import DimensionMismatch, InvalidLabel


def numeric_grads(model, x, y, eps=1e-6):
    out = []
    for params in (model.weights, model.biases):
        gs = []
        for p in params:
            g = np.zeros_like(p)
            it = np.nditer(p, flags=["multi_index"])
            for _ in it:
                i = it.multi_index
                old = p[i]
                p[i] = old + eps
                lp = loss_and_grads(model, x, y)[0]
                p[i] = old - eps
                lm = loss_and_grads(model, x, y)[0]
                p[i] = old
                g[i] = (lp - lm) / (2 * eps)
            gs.append(g)
        out.append(gs)
    return out


def rel_err(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(a) + np.abs(b)), 1e-12)


def test_gradient_check_small(rng):
    model = init_mlp([6, 5, 4, 3], seed=2)
    x = rng.normal(size=(8, 6))
    y = rng.integers(0, 3, 8)
    _, gw, gb = loss_and_grads(model, x, y)
    nw, nb = numeric_grads(model, x, y)
    for a, b in zip(gw + gb, nw + nb):
        assert rel_err(a, b) < 1e-4


def test_sum_reduction_scales(rng):
    model = init_mlp([4, 3, 2], seed=0)
    x, y = rng.normal(size=(10, 4)), rng.integers(0, 2, 10)
    lm, gm, _ = loss_and_grads(model, x, y, "mean")
    ls, gs, _ = loss_and_grads(model, x, y, "sum")
    assert ls == pytest.approx(10 * lm)
    np.testing.assert_allclose(gs[0], 10 * gm[0])


def test_softmax_rows(rng):
    model = init_mlp([5, 7, 4], seed=1)
    p = model.predict_proba(rng.normal(size=(20, 5)) * 10)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(np.exp(model.log_proba(rng.normal(size=(3, 5)))).sum(axis=1), 1.0)


def test_separable_toy_learns(rng):
    x = np.vstack([rng.normal(-2, 0.5, (100, 2)), rng.normal(2, 0.5, (100, 2))])
    y = np.r_[np.zeros(100, int), np.ones(100, int)]
    cfg = MlpConfig(hidden=(8,), decay_epochs=25, extra_epochs=25, batch_size=32, lr_start=0.05, lr_end=0.01)
    model, hist = mlp_train(x, y, 2, cfg)
    assert len(hist) == 50
    assert accuracy(model, x, y) == 1.0


def test_deterministic(rng):
    x, y = rng.normal(size=(60, 3)), rng.integers(0, 3, 60)
    cfg = MlpConfig(hidden=(4,), decay_epochs=2, extra_epochs=1, batch_size=16)
    a, _ = mlp_train(x, y, 3, cfg)
    b, _ = mlp_train(x, y, 3, cfg)
    for u, v in zip(a.weights, b.weights):
        assert np.array_equal(u, v)


def test_schedule():
    cfg = MlpConfig()
    assert cfg.epochs == 45
    assert cfg.lr_at(0) == 0.005 and cfg.lr_at(24) == pytest.approx(0.0005)
    assert cfg.lr_at(44) == 0.0005
    assert cfg.lr_at(12) == pytest.approx(0.00275)


def test_bad_labels(rng):
    model = init_mlp([2, 2, 3])
    with pytest.raises(InvalidLabel):
        loss_and_grads(model, np.zeros((2, 2)), np.array([0, 3]))
    with pytest.raises(InvalidLabel):
        loss_and_grads(model, np.zeros((2, 2)), np.array([0.5, 1.0]))
    with pytest.raises(DimensionMismatch):
        model.predict_proba(np.zeros((2, 5)))


def test_presets():
    from ztwemo.classifier import DESK, FULL_SCALE

    assert MlpConfig().hidden == FULL_SCALE.hidden == (512,) * 5
    assert DESK.hidden == (64, 64)
    assert init_mlp([80, *FULL_SCALE.hidden, 20]).sizes == [80, 512, 512, 512, 512, 512, 20]
