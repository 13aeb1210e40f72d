# -*- coding: utf-8 -*-
#
"""
This module contains the scoring of diagnosis results against a known
ground truth: window-level precision / recall / F1 with and without
transition windows, region matching by interval IoU, and the
separation measures of a labeled model space.
"""
from __future__ import unicode_literals
from __future__ import absolute_import
from __future__ import division

import logging
from collections import Counter

import numpy as np
import sklearn.metrics

from .utils import ParameterError
from .model_space import silhouette_scores
from .detectors import KnnModel, knn_classify


__all__ = [
    "NORMAL",
    "TRANSITION",
    "window_overlap_fraction",
    "window_truth",
    "window_scores",
    "interval_iou",
    "match_regions",
    "separation_ratio",
    "silhouette_scores",
    "knn_leave_one_out",
    "cluster_agreement",
    ]

_logger = logging.getLogger(__name__)

NORMAL = "normal"
TRANSITION = "transition"

# labels which do not claim an anomaly
_NOT_ANOMALOUS = ("normal", "train")


def _overlaps(start, end, ground_truth):
    for (g0, g1), kind in ground_truth:
        ov = min(end, g1) - max(start, g0)
        if ov > 0:
            yield ov, kind


def window_overlap_fraction(start_col, width, ground_truth):
    """
    Fraction of the window's columns inside any ground-truth span.

    >>> window_overlap_fraction(0, 100, [((50, 400), "cavity")])
    0.5
    """
    covered = np.zeros(width, dtype=bool)
    for (g0, g1), _ in ground_truth:
        lo, hi = max(g0 - start_col, 0), min(g1 - start_col, width)
        if hi > lo:
            covered[lo:hi] = True
    return float(covered.mean())


def window_truth(windows, ground_truth):
    """
    Per (start_col, width): "normal" without overlap, "transition" when
    under half of the window is anomalous, else the kind covering most
    of it.

    >>> window_truth([(0, 10), (4, 10), (10, 10)], [((10, 20), "cavity")])
    ['normal', 'transition', 'cavity']
    """
    result = []
    for start, width in windows:
        f = window_overlap_fraction(start, width, ground_truth)
        if f == 0:
            result.append(NORMAL)
        elif f < 0.5:
            result.append(TRANSITION)
        else:
            best = Counter()
            for ov, kind in _overlaps(start, start + width, ground_truth):
                best[kind] += ov
            result.append(sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))[0][0])
    return result


def window_scores(predicted_labels, truth, exclude_transitions=True):
    """
    Window-level detection scores; a prediction is anomalous unless it
    is "normal" or "train". With ``exclude_transitions`` False the
    transition windows count as anomalies.
    """
    if len(predicted_labels) != len(truth):
        raise ParameterError("%d predictions for %d truths" % (
            len(predicted_labels), len(truth)))
    kept = [(true != NORMAL, pred not in _NOT_ANOMALOUS)
            for pred, true in zip(predicted_labels, truth)
            if pred != "train"
            and not (true == TRANSITION and exclude_transitions)]
    if not kept:
        return {"precision": 1.0, "recall": 1.0, "f1": 1.0,
                "tp": 0, "fp": 0, "fn": 0, "tn": 0}
    y_true, y_pred = zip(*kept)
    tn, fp, fn, tp = sklearn.metrics.confusion_matrix(
        y_true, y_pred, labels=[False, True]).ravel()
    # an empty class scores 1, as for a road without anomalies
    precision, recall, f1, _ = sklearn.metrics.precision_recall_fscore_support(
        y_true, y_pred, average="binary", pos_label=True, zero_division=1)
    return {"precision": float(precision), "recall": float(recall),
            "f1": float(f1), "tp": int(tp), "fp": int(fp), "fn": int(fn),
            "tn": int(tn)}


def interval_iou(a, b):
    """
    >>> interval_iou((0, 10), (5, 15))
    0.3333333333333333
    """
    inter = max(0, min(a[1], b[1]) - max(a[0], b[0]))
    union = (a[1] - a[0]) + (b[1] - b[0]) - inter
    return inter / union if union > 0 else 0.0


def match_regions(regions, ground_truth, min_iou=0.5):
    """
    For every ground-truth span, the regions whose IoU with it reaches
    ``min_iou``, as a list of (span, kind, [(region, iou), ...]).
    """
    result = []
    for span, kind in ground_truth:
        hits = []
        for r in regions:
            iou = interval_iou(span, r.span)
            if iou >= min_iou:
                hits.append((r, iou))
        result.append((span, kind, hits))
    return result


def separation_ratio(dist, labels):
    """
    Mean distance between points of different labels over the mean
    distance between distinct points of one label.
    """
    dist = np.asarray(dist, dtype=np.float64)
    labels = np.asarray(labels, dtype=object)
    same = labels[:, np.newaxis] == labels[np.newaxis, :]
    off = ~np.eye(len(labels), dtype=bool)
    intra = dist[same & off]
    inter = dist[~same]
    if intra.size == 0 or inter.size == 0:
        raise ParameterError("separation needs two labels with two points each")
    mi = float(intra.mean())
    return float(inter.mean()) / mi if mi > 0 else float("inf")


def knn_leave_one_out(points, k=5):
    """Accuracy of knn_classify on each point with that point left out."""
    model = KnnModel(points, k=min(k, len(points)))
    if model.k >= len(points):
        raise ParameterError("leave-one-out needs more than k points")
    hits = 0
    for i, p in enumerate(model.train_points):
        hits += knn_classify(model, p, exclude=i) == p.label
    return hits / len(model.train_points)


def cluster_agreement(labels, truth, ignore=("normal", "pending", "train")):
    """
    Map every predicted label (except ``ignore``) to the true kind most
    of its windows carry; returns (mapping, fraction of windows whose
    truth is an anomaly kind and whose label maps onto that kind).
    """
    per_label = {}
    for l, t in zip(labels, truth):
        if l in ignore:
            continue
        per_label.setdefault(l, Counter())[t] += 1
    mapping = {}
    for l, counts in per_label.items():
        mapping[l] = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
    relevant = [(l, t) for l, t in zip(labels, truth)
                if t not in (NORMAL, TRANSITION)]
    if not relevant:
        return mapping, 1.0
    agree = sum(1 for l, t in relevant if mapping.get(l) == t)
    return mapping, agree / len(relevant)
