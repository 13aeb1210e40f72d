# -*- coding: utf-8 -*-
#
"""
This module contains the model space: every fitted readout becomes a
point phi = [readout / sqrt(3) | bias], so that the squared Euclidean
distance of two points is the L2 distance of the two readout functions
over hidden states uniform on [-1, 1]:

    d(f1, f2) = (1/3) |W1 - W2|^2 + (a1 - a2)^2
"""
from __future__ import unicode_literals
from __future__ import absolute_import
from __future__ import division

import math
import logging
from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.linalg
import sklearn.metrics

from .utils import InputDataError, ParameterError, make_rng


__all__ = [
    "ModelVector",
    "ModelSpace",
    "PcaProjection",
    "embed",
    "model_distance",
    "sqrt_model_distance",
    "pairwise_distances",
    "pca_project",
    "monte_carlo_distance",
    "silhouette_scores",
    ]

_logger = logging.getLogger(__name__)

_SQRT3 = math.sqrt(3.0)


class ModelVector(object):
    """
    One point of the model space.

    >>> a = ModelVector([0.0, 0.0, 4.0])
    >>> a.n_units, a.readout.tolist(), a.bias
    (1, [0.0, 0.0], 4.0)
    """
    def __init__(self, phi, label=None, window_span=None, fingerprint=None):
        phi = np.array(phi, dtype=np.float64).reshape(-1)
        if phi.shape[0] < 3 or phi.shape[0] % 2 == 0:
            raise InputDataError(
                "a model vector has 2N+1 components, got %d" % phi.shape[0])
        if not np.all(np.isfinite(phi)):
            raise InputDataError("a model vector must be finite")
        phi.flags.writeable = False
        self.phi = phi
        self.label = label
        self.window_span = None if window_span is None else (
            int(window_span[0]), int(window_span[1]))
        self.fingerprint = fingerprint

    @property
    def n_units(self):
        return (self.phi.shape[0] - 1) // 2

    @property
    def readout(self):
        """[w_out_up | w_out_left] recovered from phi."""
        return self.phi[:-1] * _SQRT3

    @property
    def bias(self):
        return float(self.phi[-1])

    def with_label(self, label):
        return ModelVector(self.phi, label, self.window_span, self.fingerprint)

    def __repr__(self):
        return "ModelVector(n_units=%d, label=%r, window_span=%r)" % (
            self.n_units, self.label, self.window_span)


def embed(m, window_span=None, label=None):
    """
    >>> from diagnose_gpr_by_model_space.reservoir import FittedModel
    >>> embed(FittedModel([0.0], [0.0], 4.0)).phi.tolist()
    [0.0, 0.0, 4.0]
    """
    phi = np.concatenate([m.readout / _SQRT3, [m.bias]])
    return ModelVector(phi, label=label, window_span=window_span,
                       fingerprint=m.fingerprint)


def _check_comparable(a, b):
    if a.phi.shape != b.phi.shape:
        raise InputDataError(
            "model vectors of %d and %d units are not comparable" % (
                a.n_units, b.n_units))
    if a.fingerprint is not None and b.fingerprint is not None \
            and a.fingerprint != b.fingerprint:
        raise InputDataError(
            "model vectors from different reservoirs (%s, %s) are not comparable"
            % (a.fingerprint[:8], b.fingerprint[:8]))


def model_distance(a, b):
    """
    >>> model_distance(ModelVector([0, 0, 4]), ModelVector([0, 0, 0]))
    16.0
    >>> x = ModelVector([3 / math.sqrt(3.0), 0, 4])
    >>> round(model_distance(x, ModelVector([0, 0, 0])), 9)
    19.0
    """
    _check_comparable(a, b)
    d = a.phi - b.phi
    return float(d.dot(d))


def sqrt_model_distance(a, b):
    return math.sqrt(model_distance(a, b))


class ModelSpace(object):
    """
    Points fitted with one reservoir. Points of different reservoirs or
    different sizes are rejected on construction.
    """
    def __init__(self, points, n_units=None, reservoir_fingerprint=None):
        points = list(points)
        if n_units is None and points:
            n_units = points[0].n_units
        if reservoir_fingerprint is None:
            fps = set(p.fingerprint for p in points if p.fingerprint is not None)
            if len(fps) > 1:
                raise InputDataError(
                    "a model space cannot mix %d reservoirs" % len(fps))
            reservoir_fingerprint = fps.pop() if fps else None
        for i, p in enumerate(points):
            if p.n_units != n_units:
                raise InputDataError(
                    "point %d has %d units, the space has %d" % (
                        i, p.n_units, n_units))
            if p.fingerprint is not None and reservoir_fingerprint is not None \
                    and p.fingerprint != reservoir_fingerprint:
                raise InputDataError(
                    "point %d comes from another reservoir" % i)
        self.points = points
        self.n_units = n_units
        self.reservoir_fingerprint = reservoir_fingerprint

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def labels(self):
        return [p.label for p in self.points]

    def phi_matrix(self):
        if not self.points:
            return np.zeros((0, 2 * (self.n_units or 0) + 1))
        return np.vstack([p.phi for p in self.points])

    def with_labels(self, labels):
        labels = list(labels)
        if len(labels) != len(self.points):
            raise InputDataError(
                "%d labels for %d points" % (len(labels), len(self.points)))
        return ModelSpace(
            [p.with_label(l) for p, l in zip(self.points, labels)],
            self.n_units, self.reservoir_fingerprint)

    @staticmethod
    def concat(spaces):
        """One space of the points of ``spaces`` (all of one reservoir)."""
        points = []
        for s in spaces:
            points.extend(s.points)
        fps = set(s.reservoir_fingerprint for s in spaces
                  if s.reservoir_fingerprint is not None)
        if len(fps) > 1:
            raise InputDataError(
                "cannot combine model spaces of %d different reservoirs" % len(fps))
        return ModelSpace(points, reservoir_fingerprint=fps.pop() if fps else None)

    def __repr__(self):
        return "ModelSpace(points=%d, n_units=%r)" % (len(self), self.n_units)


def pairwise_distances(s, threads=1, block_rows=16):
    """
    Symmetric matrix of model_distance over the points of ``s``,
    computed in blocks of rows, ``threads`` blocks at a time.

    >>> p = ModelVector([0, 0, 1])
    >>> pairwise_distances(ModelSpace([p])).tolist()
    [[0.0]]
    """
    points = s.points
    n = len(points)
    if n < 1:
        raise ParameterError("pairwise_distances needs at least one point")
    out = np.zeros((n, n))

    def _block(start):
        for i in range(start, min(start + block_rows, n)):
            for j in range(i + 1, n):
                out[i, j] = model_distance(points[i], points[j])

    starts = list(range(0, n, block_rows))
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(_block, starts))
    else:
        for st in starts:
            _block(st)
    return out + out.T


PcaProjection = namedtuple(
    "PcaProjection", ["coords", "explained_variance", "degenerate"])


def pca_project(s, dims=3):
    """
    Project the phi vectors of ``s`` on their ``dims`` leading principal
    axes. Axes beyond the rank of the centered data are returned as
    zero columns and ``degenerate`` is set.
    """
    if not (1 <= dims <= 3):
        raise ParameterError("dims must be 1, 2 or 3")
    if len(s) < dims:
        raise ParameterError(
            "pca_project needs at least %d points, got %d" % (dims, len(s)))
    x = s.phi_matrix()
    xc = x - x.mean(axis=0)
    u, sv, vt = scipy.linalg.svd(xc, full_matrices=False)
    tol = sv.max() * max(xc.shape) * np.finfo(np.float64).eps if sv.size else 0.0
    rank = int(np.sum(sv > tol))
    k = min(dims, rank)
    coords = np.zeros((x.shape[0], dims))
    var = np.zeros(dims)
    if k:
        axes = vt[:k]
        # sign convention: the largest component of every axis is positive
        signs = np.sign(axes[np.arange(k), np.argmax(np.abs(axes), axis=1)])
        axes = axes * signs[:, np.newaxis]
        coords[:, :k] = xc.dot(axes.T)
        var[:k] = sv[:k] ** 2 / x.shape[0]
    degenerate = k < dims
    if degenerate:
        _logger.warning(
            "only %d informative axes for %d requested dimensions", k, dims)
    return PcaProjection(coords, var, degenerate)


def monte_carlo_distance(a, b, n_samples=100000, seed=0, chunk=10000):
    """
    Estimate E[(f_a(h) - f_b(h))^2] with h uniform on [-1, 1]^(2N),
    the integral whose closed form is model_distance.
    """
    _check_comparable(a, b)
    dw = a.readout - b.readout
    da = a.bias - b.bias
    rng = make_rng(seed, "monte_carlo_distance")
    total = 0.0
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        h = rng.uniform(-1.0, 1.0, size=(m, dw.shape[0]))
        total += float(np.sum((h.dot(dw) + da) ** 2))
        done += m
    return total / n_samples


def silhouette_scores(dist, labels):
    """
    Silhouette of every point under the distance matrix ``dist``; points
    alone in their group, and every point when there is only one group,
    get 0.

    >>> d = np.array([[0, 1, 4], [1, 0, 4], [4, 4, 0]], dtype=float)
    >>> silhouette_scores(d, ["a", "a", "b"]).tolist()
    [0.75, 0.75, 0.0]
    """
    dist = np.asarray(dist, dtype=np.float64)
    labels = list(labels)
    n = len(labels)
    if dist.shape != (n, n):
        raise ParameterError("distance matrix does not match %d labels" % n)
    index = {}
    codes = [index.setdefault(l, len(index)) for l in labels]
    if not 2 <= len(index) < n:
        return np.zeros(n)
    return sklearn.metrics.silhouette_samples(dist, codes, metric="precomputed")


if __name__ == '__main__':
    import doctest
    doctest.testmod()
