import numpy as np
import pytest

from ztwemo.errors import FrameGridMismatch, Unnormalizable, ZtwError
from ztwemo.features import FeatureMatrix, add_deltas, cmvn, cmvn_pooled, combine, splice


def fm(v, layout):
    return FeatureMatrix(np.asarray(v, dtype=float), layout)


class TestFeatureMatrix:
    def test_layout_dims(self):
        with pytest.raises(ZtwError):
            fm(np.zeros((3, 12)), "MFCC13")

    def test_non_finite(self):
        v = np.zeros((2, 13))
        v[0, 0] = np.inf
        with pytest.raises(ZtwError):
            fm(v, "MFCC13")


class TestCmvn:
    def test_random(self, rng):
        out = cmvn(fm(rng.normal(3, 2, (200, 13)), "MFCC13")).values
        assert np.all(np.abs(out.mean(axis=0)) < 1e-10)
        np.testing.assert_allclose(out.var(axis=0), 1.0, atol=1e-10)

    def test_idempotent(self, rng):
        once = cmvn(fm(rng.standard_normal((50, 13)), "MFCC13"))
        twice = cmvn(once)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-12)

    def test_constant_column(self, rng):
        v = rng.standard_normal((10, 13))
        v[:, 3] = 7.0
        assert np.all(cmvn(fm(v, "MFCC13")).values[:, 3] == 0.0)

    def test_one_frame(self):
        with pytest.raises(Unnormalizable):
            cmvn(fm(np.zeros((1, 13)), "MFCC13"))

    def test_pooled(self, rng):
        a = fm(rng.normal(1, 1, (30, 13)), "MFCC13")
        b = fm(rng.normal(5, 1, (20, 13)), "MFCC13")
        na, nb = cmvn_pooled([a, b])
        both = np.concatenate([na.values, nb.values])
        assert np.all(np.abs(both.mean(axis=0)) < 1e-10)
        # the offset between utterances survives pooling
        assert nb.values.mean() > na.values.mean()


class TestDeltas:
    def test_constant(self):
        out = add_deltas(fm(np.full((10, 13), 2.0), "MFCC13"))
        assert out.layout == "MFCC39" and out.dims == 39
        assert np.all(out.values[:, 13:] == 0.0)

    def test_linear(self):
        t = np.arange(20, dtype=float)[:, None]
        out = add_deltas(fm(np.repeat(3.0 * t, 13, axis=1), "MFCC13")).values
        np.testing.assert_allclose(out[2:-2, 13:26], 3.0)
        np.testing.assert_allclose(out[4:-4, 26:], 0.0, atol=1e-12)

    def test_requires_mfcc13(self):
        with pytest.raises(ZtwError):
            add_deltas(fm(np.zeros((4, 30)), "EPOCH30"))


class TestSplice:
    @pytest.mark.parametrize("dims,layout", [(39, "MFCC39"), (69, "COMBINED69")])
    def test_dims(self, dims, layout, rng):
        out = splice(fm(rng.standard_normal((12, dims)), layout), 4)
        assert out.values.shape == (12, 9 * dims) and out.layout == "SPLICED"

    def test_edges_replicate(self):
        v = np.arange(5, dtype=float)[:, None] * np.ones((1, 30))
        out = splice(fm(v, "EPOCH30"), 4).values
        # first frame: 4 copies of frame 0 then frames 0..4
        np.testing.assert_array_equal(out[0, ::30], [0, 0, 0, 0, 0, 1, 2, 3, 4])
        np.testing.assert_array_equal(out[4, ::30], [0, 1, 2, 3, 4, 4, 4, 4, 4])


class TestCombine:
    def test_dims(self, rng):
        m = fm(rng.standard_normal((7, 39)), "MFCC39")
        e = fm(np.zeros((7, 30)), "EPOCH30")
        out = combine(m, e)
        assert out.dims == 69 and out.layout == "COMBINED69"
        assert np.array_equal(out.values[:, :39], m.values)

    def test_mismatch(self):
        with pytest.raises(FrameGridMismatch):
            combine(fm(np.zeros((7, 39)), "MFCC39"), fm(np.zeros((6, 30)), "EPOCH30"))
