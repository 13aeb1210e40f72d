# -*- coding: utf-8 -*-
#
"""
This module contains the sliding window over the traces of a B-scan
and the merging of labeled windows into anomaly regions.
"""
from __future__ import unicode_literals
from __future__ import absolute_import
from __future__ import division

import logging

import numpy as np

from .utils import InputDataError, ParameterError
from .pipeline_params import WindowSpec


__all__ = [
    "WindowSpec",
    "AnomalyRegion",
    "SKIP_LABELS",
    "window_starts",
    "slide_windows",
    "merge_regions",
    ]

_logger = logging.getLogger(__name__)

# labels which never form a region
SKIP_LABELS = ("normal", "pending", "train")


class AnomalyRegion(object):
    """
    Half-open span [start_col, end_col) of traces carrying one label,
    merged from ``support`` windows.
    """
    def __init__(self, start_col, end_col, label, support=1, mean_score=0.0):
        if not start_col < end_col:
            raise InputDataError(
                "a region needs start_col < end_col, got [%d, %d)" % (
                    start_col, end_col))
        if support < 1:
            raise InputDataError("a region needs support >= 1")
        self.start_col = int(start_col)
        self.end_col = int(end_col)
        self.label = label
        self.support = int(support)
        self.mean_score = float(mean_score)

    @property
    def span(self):
        return (self.start_col, self.end_col)

    def start_cm(self, col_spacing_cm):
        return self.start_col * col_spacing_cm

    def end_cm(self, col_spacing_cm):
        return self.end_col * col_spacing_cm

    def to_dict(self):
        return dict(self.__dict__)

    def __eq__(self, other):
        return isinstance(other, AnomalyRegion) and \
            self.to_dict() == other.to_dict()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return "AnomalyRegion([%d, %d), %r, support=%d, mean_score=%g)" % (
            self.start_col, self.end_col, self.label, self.support,
            self.mean_score)


def window_starts(cols, window_spec):
    """
    Start columns of the windows over ``cols`` traces; the last window
    is pinned to the right edge when the stride does not land there.

    >>> window_starts(340, WindowSpec(width_cols=300, stride_cols=20))
    [0, 20, 40]
    >>> window_starts(310, WindowSpec(width_cols=300, stride_cols=20))
    [0, 10]
    >>> window_starts(300, WindowSpec(width_cols=300, stride_cols=20))
    [0]
    """
    window_spec.validate()
    if cols < window_spec.width_cols:
        raise InputDataError(
            "the image (%d columns) is narrower than the window (%d)" % (
                cols, window_spec.width_cols))
    starts = list(range(0, cols - window_spec.width_cols + 1, window_spec.stride_cols))
    if starts[-1] != cols - window_spec.width_cols:
        starts.append(cols - window_spec.width_cols)
    return starts


def slide_windows(img, window_spec=None):
    """
    List of (start_col, window image) from left to right.
    """
    if window_spec is None:
        window_spec = WindowSpec()
    return [(s, img.window(s, window_spec.width_cols))
            for s in window_starts(img.cols, window_spec)]


def merge_regions(labeled, gap_cols=0, skip_labels=SKIP_LABELS):
    """
    Merge (start_col, width, label, score) windows into regions. Two
    windows of one label merge when the later one starts no later than
    the open region of that label ends plus ``gap_cols``; windows of
    other labels in between do not break a region.

    >>> merge_regions([(0, 300, "A", 1.0), (20, 300, "A", 3.0)])
    [AnomalyRegion([0, 320), 'A', support=2, mean_score=2)]
    >>> len(merge_regions([(0, 10, "A", 0), (10, 10, "normal", 0), (30, 10, "A", 0)]))
    2
    """
    if gap_cols < 0:
        raise ParameterError("gap_cols must be >= 0")
    skip = set(skip_labels)
    opened = {}  # label -> [start, end, scores]
    result = []

    def _close(label):
        start, end, scores = opened.pop(label)
        result.append(AnomalyRegion(
            start, end, label, len(scores), float(np.mean(scores))))

    for start, width, label, score in sorted(labeled, key=lambda t: t[0]):
        if label in skip:
            continue
        end = start + width
        cur = opened.get(label)
        if cur is not None and start <= cur[1] + gap_cols:
            cur[1] = max(cur[1], end)
            cur[2].append(score)
            continue
        if cur is not None:
            _close(label)
        opened[label] = [start, end, [score]]
    for label in list(opened.keys()):
        _close(label)
    result.sort(key=lambda r: (r.start_col, r.end_col, "%s" % r.label))
    return result


if __name__ == '__main__':
    import doctest
    doctest.testmod()
