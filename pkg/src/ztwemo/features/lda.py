"""Regularized Fisher LDA with mergeable scatter accumulation."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from ..errors import DimensionMismatch, InvalidLabel, MissingClass
from .matrix import FeatureMatrix

log = logging.getLogger(__name__)

REG_SCALE = 1e-4


class ScatterStats:
    """
    Per-class zeroth, first and second order sums.

    Shards accumulated separately combine exactly with :meth:`merge`, so the
    fit does not depend on how the data was split.
    """

    def __init__(self, n_classes: int, dim: int):
        self.n_classes = n_classes
        self.dim = dim
        self.count = np.zeros(n_classes)
        self.sum = np.zeros((n_classes, dim))
        self.sq = np.zeros((dim, dim))

    def add(self, x, labels) -> "ScatterStats":
        x = np.asarray(x, dtype=float)
        labels = np.asarray(labels, dtype=np.int64)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise DimensionMismatch(f"expected (*, {self.dim}) data, got {x.shape}")
        if labels.shape != (x.shape[0],):
            raise DimensionMismatch("one label per frame required")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_classes):
            raise InvalidLabel(f"labels must lie in [0, {self.n_classes})")
        self.count += np.bincount(labels, minlength=self.n_classes)
        np.add.at(self.sum, labels, x)
        self.sq += x.T @ x
        return self

    def merge(self, other: "ScatterStats") -> "ScatterStats":
        if (other.n_classes, other.dim) != (self.n_classes, self.dim):
            raise DimensionMismatch("cannot merge statistics of different shapes")
        self.count += other.count
        self.sum += other.sum
        self.sq += other.sq
        return self

    def scatter(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Within-class scatter, between-class scatter and global mean (all per frame)."""
        total = self.count.sum()
        mean = self.sum.sum(axis=0) / total
        present = self.count > 0
        cmeans = self.sum[present] / self.count[present, None]
        # sum_c n_c mu_c mu_c^T
        between_raw = (cmeans * self.count[present, None]).T @ cmeans
        sw = (self.sq - between_raw) / total
        diff = cmeans - mean
        sb = (diff * self.count[present, None]).T @ diff / total
        return (sw + sw.T) / 2, (sb + sb.T) / 2, mean


@dataclass
class LdaTransform:
    """``y = (x - mean) @ matrix.T`` with ``matrix`` of shape ``(lda_dim, input_dim)``."""

    matrix: np.ndarray
    mean: np.ndarray
    class_count: int
    eigenvalues: np.ndarray

    @property
    def input_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def lda_dim(self) -> int:
        return self.matrix.shape[0]

    def transform(self, m: FeatureMatrix | np.ndarray) -> FeatureMatrix:
        v = m.values if isinstance(m, FeatureMatrix) else np.asarray(m, dtype=float)
        if v.shape[1] != self.input_dim:
            raise DimensionMismatch(f"LDA expects {self.input_dim} dims, got {v.shape[1]}")
        return FeatureMatrix((v - self.mean) @ self.matrix.T, "LDA")


def lda_from_stats(stats: ScatterStats, lda_dim: int = 80) -> LdaTransform:
    missing = np.flatnonzero(stats.count == 0)
    if missing.size:
        raise MissingClass(f"classes without frames: {missing.tolist()}")
    if stats.n_classes < 2:
        raise MissingClass("LDA needs at least two classes")
    d = stats.dim
    if lda_dim > d:
        log.warning("lda_dim %d exceeds input dim %d; using %d", lda_dim, d, d)
        lda_dim = d
    if lda_dim > stats.n_classes - 1:
        log.warning("lda_dim %d exceeds between-class rank %d; trailing directions come "
                    "from the regularized within-class spectrum", lda_dim, stats.n_classes - 1)
    sw, sb, mean = stats.scatter()
    lam = REG_SCALE * np.trace(sw) / d
    if lam <= 0:
        lam = REG_SCALE
    vals, vecs = eigh(sb, sw + lam * np.eye(d))
    order = np.argsort(-vals, kind="stable")[:lda_dim]
    mat = vecs[:, order].T
    # fix the sign so the largest-magnitude entry of each row is positive
    pivot = np.argmax(np.abs(mat), axis=1)
    mat *= np.sign(mat[np.arange(lda_dim), pivot])[:, None]
    return LdaTransform(mat, mean, stats.n_classes, vals[order])


def lda_fit(data, labels, lda_dim: int = 80, n_classes: int | None = None) -> LdaTransform:
    """
    Fit LDA on one or more feature matrices with per-frame class labels.

    Parameters
    ----------
    data : FeatureMatrix, ndarray or list of either
    labels : int array or list of int arrays matching ``data``
    n_classes : int, optional
        Expected number of classes; defaults to ``max(label) + 1``. A class
        in range with no frames raises :class:`MissingClass`.
    """
    if isinstance(data, (list, tuple)):
        xs = [d.values if isinstance(d, FeatureMatrix) else np.asarray(d, dtype=float) for d in data]
        ys = [np.asarray(l, dtype=np.int64) for l in labels]
    else:
        xs = [data.values if isinstance(data, FeatureMatrix) else np.asarray(data, dtype=float)]
        ys = [np.asarray(labels, dtype=np.int64)]
    if n_classes is None:
        n_classes = int(max(int(y.max()) for y in ys if y.size)) + 1
    stats = ScatterStats(n_classes, xs[0].shape[1])
    for x, y in zip(xs, ys):
        stats.add(x, y)
    if stats.count.sum() <= stats.dim:
        log.warning("only %d frames for %d input dims", int(stats.count.sum()), stats.dim)
    return lda_from_stats(stats, lda_dim)
