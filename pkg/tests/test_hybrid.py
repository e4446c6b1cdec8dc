import numpy as np
import pytest

from ztwemo.classifier import HmmTopology, MlpModel, StatePriors, decode, scaled_loglik
from ztwemo.errors import EmptyUtterance


def peaked_model(target: int, n_out=20, dim=3):
    w = np.zeros((dim, n_out))
    b = np.zeros(n_out)
    b[target] = 10.0
    return MlpModel([w], [b])


def test_prior_scale_invariance():
    a = StatePriors(np.arange(1.0, 21.0))
    b = StatePriors(2 * np.arange(1.0, 21.0))
    np.testing.assert_allclose(a.p, b.p)
    post = np.random.default_rng(0).dirichlet(np.ones(20), 4)
    np.testing.assert_allclose(scaled_loglik(post, a), scaled_loglik(post, b))


def test_prior_floor():
    p = StatePriors(np.r_[0.0, np.ones(19)])
    assert p.p[0] > 0 and p.p.sum() == pytest.approx(1.0)


def test_state_seven_is_happy():
    topo = HmmTopology()
    emo, ll = decode(np.zeros((12, 3)), peaked_model(7), topo)
    assert emo == "happy"
    assert max(ll, key=ll.get) == "happy"


def test_flat_priors_do_not_change_decision():
    topo = HmmTopology()
    x = np.random.default_rng(1).normal(size=(15, 3))
    m = MlpModel([np.random.default_rng(2).normal(size=(3, 20))], [np.zeros(20)])
    assert decode(x, m, topo)[0] == decode(x, m, topo, StatePriors(np.full(20, 3.0)))[0]


def test_emotion_permutation_follows_labels():
    x = np.zeros((10, 3))
    topo = HmmTopology(("sad", "neutral", "happy", "angry"))
    assert decode(x, peaked_model(2), topo)[0] == "sad"
    assert decode(x, peaked_model(17), topo)[0] == "angry"


def test_tie_lexicographic():
    topo = HmmTopology(("sad", "angry", "happy", "neutral"))
    emo, _ = decode(np.zeros((10, 3)), MlpModel([np.zeros((3, 20))], [np.zeros(20)]), topo)
    assert emo == "angry"


def test_empty():
    with pytest.raises(EmptyUtterance):
        decode(np.zeros((0, 3)), peaked_model(0), HmmTopology())


def test_gmm_self_consistency(rng):
    from ztwemo.classifier import gmm_hmm_train

    corpus = [(rng.normal(size=(25, 2)) + 4 * i, e)
              for i, e in enumerate(("angry", "happy", "neutral", "sad")) for _ in range(4)]
    models = gmm_hmm_train(corpus)
    assert all(decode(x, models)[0] == e for x, e in corpus)
