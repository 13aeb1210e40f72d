# -*- coding: utf-8 -*-
#
"""
This module contains the classifiers working in the model space:

* the one-class SVM (trained by SMO with second order working set
  selection) which learns the support of normal windows,
* incremental one-class learning, which spawns a new one-class SVM
  for every group of windows rejected by all existing ones,
* a k-nearest-neighbor classifier for labeled model spaces.

The kernel of the one-class SVM is an RBF over the model distance,
k(u, v) = exp(-gamma * d(u, v)).
"""
from __future__ import unicode_literals
from __future__ import absolute_import
from __future__ import division

import io
import json
import logging

import numpy as np
import scipy.cluster.hierarchy
import scipy.spatial.distance

from .utils import InputDataError, ParameterError, json_load
from .model_space import (
    ModelSpace,
    ModelVector,
    model_distance)


__all__ = [
    "OcsvmModel",
    "IncrementalState",
    "KnnModel",
    "median_gamma",
    "train_ocsvm",
    "heldout_scores",
    "ocsvm_classify",
    "incremental_diagnose",
    "train_knn",
    "knn_predict",
    "knn_classify",
    "save_detector",
    "load_detector",
    ]

_logger = logging.getLogger(__name__)

_TAU = 1e-12
# ratio of the last single linkage merge to the one before it from
# which a pool counts as two groups
_SPLIT_GAP = 4.0
# lowest accept threshold of a calibrated classifier, in units of -rho
_THRESHOLD_FLOOR = 0.9


def _as_space(points):
    if isinstance(points, ModelSpace):
        return points
    return ModelSpace(points)


def _phi(p):
    return p.phi if isinstance(p, ModelVector) else np.asarray(p, dtype=np.float64)


def _sq_dists(x, y):
    """Squared distances between the rows of x and the rows of y."""
    d = np.empty((x.shape[0], y.shape[0]))
    for i in range(x.shape[0]):
        diff = y - x[i]
        d[i] = np.einsum("ij,ij->i", diff, diff)
    return d


def median_gamma(points):
    """
    1 / median of the pairwise model distances; 1.0 when the median is 0.

    >>> median_gamma([ModelVector([0, 0, 0]), ModelVector([0, 0, 2])])
    0.25
    """
    x = _as_space(points).phi_matrix()
    if x.shape[0] < 2:
        return 1.0
    d = _sq_dists(x, x)[np.triu_indices(x.shape[0], 1)]
    med = float(np.median(d))
    return 1.0 / med if med > 0 else 1.0


# ================================================================
#
# One-class SVM
#
class OcsvmModel(object):
    """
    decision(x) = sum_i alphas[i] * exp(-gamma * d(sv_i, x)) - rho

    A point is accepted when decision(x) >= threshold. Without a
    calibrated threshold that is -tol.
    """
    def __init__(self, support_vectors, alphas, rho, nu, gamma,
                 tol=1e-4, degenerate=False, n_train=None, fingerprint=None,
                 threshold=None):
        self.support_vectors = np.array(support_vectors, dtype=np.float64)
        self.alphas = np.array(alphas, dtype=np.float64)
        self.rho = float(rho)
        self.nu = float(nu)
        self.gamma = float(gamma)
        self.tol = float(tol)
        self.degenerate = bool(degenerate)
        self.n_train = int(n_train if n_train is not None else len(self.alphas))
        self.fingerprint = fingerprint
        self.threshold = None if threshold is None else float(threshold)

    @property
    def accept_threshold(self):
        return -self.tol if self.threshold is None else self.threshold

    def decision_function(self, x):
        """Decision values of the rows of ``x`` (phi vectors)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        k = np.exp(-self.gamma * _sq_dists(x, self.support_vectors))
        return k.dot(self.alphas) - self.rho

    def to_dict(self):
        return {
            "kind": "ocsvm",
            "support_vectors": self.support_vectors.tolist(),
            "alphas": self.alphas.tolist(),
            "rho": self.rho,
            "nu": self.nu,
            "gamma": self.gamma,
            "tol": self.tol,
            "degenerate": self.degenerate,
            "n_train": self.n_train,
            "fingerprint": self.fingerprint,
            "threshold": self.threshold,
            }

    @staticmethod
    def from_dict(d):
        try:
            return OcsvmModel(
                d["support_vectors"], d["alphas"], d["rho"], d["nu"],
                d["gamma"], d.get("tol", 1e-4), d.get("degenerate", False),
                d.get("n_train"), d.get("fingerprint"), d.get("threshold"))
        except KeyError as e:
            raise InputDataError("one-class SVM without key %s" % e)

    def __repr__(self):
        return "OcsvmModel(n_sv=%d, nu=%g, gamma=%g, rho=%g, threshold=%g%s)" % (
            len(self.alphas), self.nu, self.gamma, self.rho,
            self.accept_threshold, ", degenerate" if self.degenerate else "")


def _select_working_set(alpha, grad, q, bound, tol):
    """
    Second order working set selection. ``i`` is the index whose
    alpha may grow with the smallest gradient, ``j`` the one whose alpha
    may shrink giving the largest decrease of the objective. Returns
    (-1, -1) when the KKT gap is below ``tol``.
    """
    up = alpha < bound
    low = alpha > 0
    neg = np.where(up, -grad, -np.inf)
    i = int(np.argmax(neg))
    g_max = neg[i]
    g_min = np.min(np.where(low, -grad, np.inf))
    if g_max - g_min < tol:
        return -1, -1
    b = g_max + grad
    cand = low & (b > 0)
    if not np.any(cand):
        return -1, -1
    a = q[i, i] + np.diag(q) - 2.0 * q[i]
    a = np.where(a > 0, a, _TAU)
    obj = np.where(cand, -(b * b) / a, np.inf)
    j = int(np.argmin(obj))
    return i, j


def _smo(q, bound, tol, max_iter):
    """
    min 0.5 a'Qa  subject to 0 <= a_i <= bound, sum a_i = 1.
    """
    n = q.shape[0]
    alpha = np.zeros(n)
    remaining = 1.0
    for t in range(n):
        alpha[t] = min(bound, remaining)
        remaining -= alpha[t]
        if remaining <= 0:
            break
    grad = q.dot(alpha)
    it = 0
    while it < max_iter:
        i, j = _select_working_set(alpha, grad, q, bound, tol)
        if j == -1:
            break
        it += 1
        a = q[i, i] + q[j, j] - 2.0 * q[i, j]
        if a <= 0:
            a = _TAU
        delta = (grad[j] - grad[i]) / a
        old_i, old_j = alpha[i], alpha[j]
        total = old_i + old_j
        alpha[i] = min(max(old_i + delta, 0.0), bound)
        alpha[j] = min(max(total - alpha[i], 0.0), bound)
        alpha[i] = total - alpha[j]
        grad += q[:, i] * (alpha[i] - old_i) + q[:, j] * (alpha[j] - old_j)
    else:
        _logger.warning("SMO stopped at the iteration cap %d", max_iter)
    _logger.debug("SMO converged after %d iterations", it)
    return alpha, grad


def _offset(alpha, grad, bound):
    """(rho, degenerate) of a solved dual."""
    sv = alpha > 0
    free = sv & (alpha < bound)
    if not np.any(free):
        return float(np.max(grad[sv])), True
    return float(np.mean(grad[free])), False


def _overlaps(a, b):
    return a is not None and b is not None and a[0] < b[1] and b[0] < a[1]


def heldout_scores(points, nu, gamma, tol=1e-4, folds=5, max_iter=None):
    """
    Decision values of every point under a one-class SVM trained
    without it.

    The points are cut into ``folds`` contiguous blocks in their order.
    Each block is scored by a model trained on the other points, minus
    every point whose window span overlaps a window of the block, so
    that a held-out window shares no columns with the training ones.
    Blocks left with fewer than 2 training points are not scored.
    """
    space = _as_space(points)
    n = len(space)
    if folds < 2 or folds > n:
        raise ParameterError("folds must lie in [2, %d], got %d" % (n, folds))
    x = space.phi_matrix()
    q = np.exp(-gamma * _sq_dists(x, x))
    spans = [p.window_span for p in space]
    scores = []
    for held in np.array_split(np.arange(n), folds):
        held_set = set(held.tolist())
        train = np.array([
            i for i in range(n)
            if i not in held_set
            and not any(_overlaps(spans[i], spans[h]) for h in held)],
            dtype=int)
        if len(train) < 2:
            _logger.debug("held-out block %d..%d has no training points",
                          held[0], held[-1])
            continue
        bound = 1.0 / (nu * len(train))
        alpha, grad = _smo(
            q[np.ix_(train, train)], bound, tol,
            max_iter if max_iter is not None else 10000 * len(train))
        rho, _ = _offset(alpha, grad, bound)
        scores.extend((q[np.ix_(held, train)].dot(alpha) - rho).tolist())
    return scores


def train_ocsvm(points, nu=0.05, gamma=None, tol=1e-4, max_iter=None,
                calibration_folds=0):
    """
    Train a one-class SVM on ``points`` (ModelVectors or a ModelSpace).
    ``gamma`` None selects median_gamma(points).

    With ``calibration_folds`` >= 2 the accept threshold is lowered to
    the smallest held-out score (see heldout_scores), but never below
    -_THRESHOLD_FLOOR * rho.
    """
    space = _as_space(points)
    n = len(space)
    if n < 2:
        raise ParameterError("a one-class SVM needs at least 2 points, got %d" % n)
    if not (0.0 < nu <= 1.0):
        raise ParameterError("nu must lie in (0, 1]")
    if gamma is None:
        gamma = median_gamma(space)
    if not gamma > 0:
        raise ParameterError("gamma must be > 0")
    if calibration_folds == 1 or calibration_folds < 0:
        raise ParameterError("calibration_folds must be 0 or >= 2")
    x = space.phi_matrix()
    q = np.exp(-gamma * _sq_dists(x, x))
    bound = 1.0 / (nu * n)
    if max_iter is None:
        max_iter = 10000 * n
    alpha, grad = _smo(q, bound, tol, max_iter)

    sv = alpha > 0
    rho, degenerate = _offset(alpha, grad, bound)
    if degenerate:
        _logger.warning(
            "no margin support vector (nu=%g, n=%d); rho from the bound ones",
            nu, n)
    threshold = None
    if calibration_folds:
        held = heldout_scores(
            space, nu, gamma, tol, min(calibration_folds, n), max_iter)
        threshold = -tol
        if held:
            threshold = min(threshold, min(held))
        if rho > 0:
            threshold = max(threshold, -_THRESHOLD_FLOOR * rho)
        threshold = min(threshold, -tol)
        _logger.debug("accept threshold %g from %d held-out scores (rho %g)",
                      threshold, len(held), rho)
    return OcsvmModel(
        x[sv], alpha[sv], rho, nu, gamma, tol=tol, degenerate=degenerate,
        n_train=n, fingerprint=space.reservoir_fingerprint,
        threshold=threshold)


def ocsvm_classify(m, p):
    """
    (is_inlier, score) of one point; is_inlier when score reaches the
    model's accept threshold.
    """
    if isinstance(p, ModelVector) and p.fingerprint is not None \
            and m.fingerprint is not None and p.fingerprint != m.fingerprint:
        raise InputDataError("the point comes from another reservoir than the model")
    score = float(m.decision_function(_phi(p))[0])
    return score >= m.accept_threshold, score


# ================================================================
#
# Incremental one-class learning
#
class IncrementalState(object):
    """
    Anomaly classifiers spawned so far, in creation order, and the pool
    of points every classifier has rejected.

    ``claimed`` maps the stream position of every pooled point which a
    later classifier took over to (label, score) of that classifier.
    """
    def __init__(self, min_pool=15):
        if min_pool < 2:
            raise ParameterError("min_pool must be >= 2")
        self.classifiers = []
        self.pending = []  # (stream position, ModelVector)
        self.min_pool = int(min_pool)
        self.next_label = 1
        self.n_seen = 0
        self.claimed = {}

    @property
    def labels(self):
        return [l for l, _ in self.classifiers]

    def __repr__(self):
        return "IncrementalState(classifiers=%r, pending=%d)" % (
            self.labels, len(self.pending))


def _coherent_group(x, idx, min_size):
    """
    Indices (into ``x``) of a group of at least ``min_size`` points
    which does not split into two well separated halves, or None.

    A pool splits where the last single linkage merge is at least
    _SPLIT_GAP times higher than every other merge; a chain of windows
    sliding into one anomaly never does.
    """
    if len(idx) < min_size:
        return None
    if len(idx) < 3:
        return idx
    heights = None
    sub = scipy.spatial.distance.pdist(x[idx])
    if np.any(sub > 0):
        tree = scipy.cluster.hierarchy.linkage(sub, method="single")
        heights = tree[:, 2]
    if heights is None or heights[-1] < _SPLIT_GAP * heights[-2]:
        return idx
    assign = scipy.cluster.hierarchy.fcluster(tree, 2, criterion="maxclust")
    halves = [idx[assign == g] for g in (1, 2)]
    halves.sort(key=lambda h: (-len(h), int(h[0])))
    for h in halves:
        found = _coherent_group(x, h, min_size)
        if found is not None:
            return found
    return None


def _spawn(state, nu, gamma, tol, calibration_folds=0):
    """
    Train a new classifier from a coherent group of the pool and hand
    it every pooled point it accepts. Returns (label, accepted list of
    (position, score)) or None.
    """
    x = np.vstack([p.phi for _, p in state.pending])
    group = _coherent_group(x, np.arange(len(state.pending)), state.min_pool)
    if group is None:
        return None
    model = train_ocsvm(
        [state.pending[k][1] for k in group], nu=nu, gamma=gamma, tol=tol,
        calibration_folds=min(calibration_folds, len(group)))
    label = "anomaly-%d" % state.next_label
    state.next_label += 1
    state.classifiers.append((label, model))
    accepted, keep = [], []
    for pos, p in state.pending:
        inl, score = ocsvm_classify(model, p)
        if inl:
            accepted.append((pos, score))
            state.claimed[pos] = (label, score)
        else:
            keep.append((pos, p))
    state.pending = keep
    _logger.info(
        "spawned %s from %d pooled points, %d claimed, %d still pending",
        label, len(group), len(accepted), len(keep))
    return label, accepted


def incremental_diagnose(stream, base, state=None, nu=None, gamma=None,
                         calibration_folds=0):
    """
    Label every point of ``stream`` in order:

    * "normal" when ``base`` accepts it,
    * the label of the first spawned classifier accepting it,
    * "pending" when every classifier rejects it; it joins the pool.

    Once the pool holds ``state.min_pool`` points forming one group,
    a new one-class SVM ("anomaly-<n>") is trained on that group and
    the pooled points it accepts are relabeled. ``nu`` defaults to the
    base's, ``gamma`` None picks the median heuristic per class and
    ``calibration_folds`` is handed to train_ocsvm for every new class.

    Returns (labels, scores, state). A score is the decision value of
    the accepting classifier, or of ``base`` for pending points.
    """
    if state is None:
        state = IncrementalState()
    if nu is None:
        nu = base.nu
    offset = state.n_seen
    labels, scores = [], []
    for k, p in enumerate(stream):
        inl, score = ocsvm_classify(base, p)
        if inl:
            labels.append("normal")
            scores.append(score)
            continue
        base_score = score
        for label, model in state.classifiers:
            inl, score = ocsvm_classify(model, p)
            if inl:
                labels.append(label)
                scores.append(score)
                break
        else:
            labels.append("pending")
            scores.append(base_score)
            state.pending.append((offset + k, p))
            while len(state.pending) >= state.min_pool:
                spawned = _spawn(state, nu, gamma, base.tol, calibration_folds)
                if spawned is None:
                    break
                label, accepted = spawned
                for pos, s in accepted:
                    if pos >= offset:
                        labels[pos - offset] = label
                        scores[pos - offset] = s
    state.n_seen = offset + len(labels)
    return labels, scores, state


# ================================================================
#
# k nearest neighbors
#
class KnnModel(object):
    """
    Labeled training points; classification by majority of the ``k``
    nearest under the model distance.
    """
    def __init__(self, train_points, k=5):
        space = _as_space(train_points)
        if len(space) < 1:
            raise ParameterError("a KNN model needs training points")
        if not (1 <= k <= len(space)):
            raise ParameterError(
                "k must lie in [1, %d], got %d" % (len(space), k))
        if any(p.label is None for p in space):
            raise InputDataError("every KNN training point needs a label")
        self.space = space
        self.k = int(k)
        self._x = space.phi_matrix()
        self._labels = space.labels
        self._order = []
        for l in self._labels:
            if l not in self._order:
                self._order.append(l)

    @property
    def train_points(self):
        return self.space.points

    @property
    def classes(self):
        return list(self._order)

    def to_dict(self):
        return {
            "kind": "knn",
            "k": self.k,
            "fingerprint": self.space.reservoir_fingerprint,
            "phi": self._x.tolist(),
            "labels": list(self._labels),
            }

    @staticmethod
    def from_dict(d):
        try:
            points = [ModelVector(phi, label, fingerprint=d.get("fingerprint"))
                      for phi, label in zip(d["phi"], d["labels"])]
            return KnnModel(points, d["k"])
        except KeyError as e:
            raise InputDataError("KNN model without key %s" % e)

    def __repr__(self):
        return "KnnModel(n=%d, k=%d, classes=%r)" % (
            len(self._labels), self.k, self._order)


def train_knn(points, k=5):
    return KnnModel(points, k)


def knn_predict(m, p, exclude=None):
    """
    (label, fraction of the k neighbors voting for it). The label is the
    majority among the k nearest training points; ties go to the
    smaller mean distance, then to the class seen first in training.
    ``exclude`` drops one training index (leave-one-out).
    """
    if isinstance(p, ModelVector):
        if p.fingerprint is not None and m.space.reservoir_fingerprint is not None \
                and p.fingerprint != m.space.reservoir_fingerprint:
            raise InputDataError(
                "the point comes from another reservoir than the model")
        dist = np.array([model_distance(p, q) for q in m.space.points])
    else:
        dist = _sq_dists(np.atleast_2d(_phi(p)), m._x)[0]
    idx = np.arange(len(dist))
    if exclude is not None:
        idx = idx[idx != exclude]
        if m.k > len(idx):
            raise ParameterError("k exceeds the remaining training points")
    near = idx[np.argsort(dist[idx], kind="mergesort")[:m.k]]
    votes = {}
    for t in near:
        votes.setdefault(m._labels[t], []).append(dist[t])
    best = sorted(
        votes.items(),
        key=lambda kv: (-len(kv[1]), float(np.mean(kv[1])), m._order.index(kv[0])))
    return best[0][0], len(best[0][1]) / len(near)


def knn_classify(m, p, exclude=None):
    return knn_predict(m, p, exclude)[0]


# ================================================================
#
# persistence
#
def save_detector(model, path):
    with io.open(path, "w", encoding="utf-8") as fo:
        fo.write(json.dumps(model.to_dict(), indent=1, sort_keys=True))


def load_detector(path):
    d = json_load(path)
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind == "ocsvm":
        return OcsvmModel.from_dict(d)
    if kind == "knn":
        return KnnModel.from_dict(d)
    raise InputDataError("'%s' is not a saved detector" % path)


if __name__ == '__main__':
    import doctest
    doctest.testmod()
