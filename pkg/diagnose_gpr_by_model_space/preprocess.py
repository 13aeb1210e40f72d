# -*- coding: utf-8 -*-
#
"""
This module contains the B-scan image type and the cleaning steps
applied to a raw radargram before it is cut into windows: removal of
the surface echo, median filtering, time-varying gain and
normalization into [-1, 1].

All functions are pure: they return a new image and never modify
their input.
"""
from __future__ import unicode_literals
from __future__ import absolute_import
from __future__ import division

import logging

import numpy as np
import scipy.ndimage

from .utils import InputDataError, ParameterError
from .pipeline_params import GainParams, PreprocessParams


__all__ = [
    "BScanImage",
    "GainParams",
    "PreprocessParams",
    "DEFAULT_COL_SPACING_CM",
    "remove_background",
    "median_filter",
    "gain_curve",
    "apply_gain",
    "normalize",
    "preprocess",
    ]

_logger = logging.getLogger(__name__)

# two adjacent traces of the survey are 0.141 cm apart
DEFAULT_COL_SPACING_CM = 0.141


class BScanImage(object):
    """
    A radargram: ``rows`` time/depth samples by ``cols`` traces of gray
    values, plus the distance between traces and the declared range of
    the stored values.

    >>> img = BScanImage([[1, 3], [2, 2]])
    >>> img.rows, img.cols, img.value_range
    (2, 2, (1.0, 3.0))
    >>> BScanImage([[1], [2]])
    Traceback (most recent call last):
    ...
    diagnose_gpr_by_model_space.utils.InputDataError: a B-scan needs rows >= 2 and cols >= 2, got 2x1
    """
    def __init__(self, data, col_spacing_cm=DEFAULT_COL_SPACING_CM,
                 value_range=None):
        data = np.array(data, dtype=np.float64)
        if data.ndim != 2:
            raise InputDataError(
                "a B-scan must be two-dimensional, got %d dimension(s)" % data.ndim)
        if data.shape[0] < 2 or data.shape[1] < 2:
            raise InputDataError(
                "a B-scan needs rows >= 2 and cols >= 2, got %dx%d" % data.shape)
        if not np.all(np.isfinite(data)):
            raise InputDataError("a B-scan must contain finite values only")
        if not (col_spacing_cm > 0):
            raise InputDataError("col_spacing_cm must be > 0")
        data.flags.writeable = False
        self._data = data
        self.col_spacing_cm = float(col_spacing_cm)
        if value_range is None:
            value_range = (float(data.min()), float(data.max()))
        self.value_range = (float(value_range[0]), float(value_range[1]))

    @property
    def data(self):
        return self._data

    @property
    def rows(self):
        return self._data.shape[0]

    @property
    def cols(self):
        return self._data.shape[1]

    @property
    def shape(self):
        return self._data.shape

    def with_data(self, data):
        """
        New image with the same trace spacing and ``data``.
        """
        return BScanImage(data, col_spacing_cm=self.col_spacing_cm)

    def window(self, start_col, width_cols):
        if start_col < 0 or start_col + width_cols > self.cols:
            raise InputDataError(
                "window [%d, %d) lies outside the image of %d columns" % (
                    start_col, start_col + width_cols, self.cols))
        return BScanImage(
            self._data[:, start_col:start_col + width_cols],
            col_spacing_cm=self.col_spacing_cm)

    def __repr__(self):
        return "BScanImage(rows=%d, cols=%d, col_spacing_cm=%g)" % (
            self.rows, self.cols, self.col_spacing_cm)


def remove_background(img):
    """
    Subtract the mean trace: every row loses its mean over all columns,
    which removes the surface echo and any other flat reflector.

    >>> remove_background(BScanImage([[1, 3], [2, 2]])).data.tolist()
    [[-1.0, 1.0], [0.0, 0.0]]
    """
    data = img.data
    return img.with_data(data - data.mean(axis=1, keepdims=True))


def median_filter(img, k):
    """
    k x k median filter with edge replication at the borders.

    >>> z = np.zeros((3, 3)); z[1, 1] = 9
    >>> float(median_filter(BScanImage(z), 3).data.max())
    0.0
    """
    if int(k) != k or k < 1 or k % 2 == 0:
        raise ParameterError("median filter size must be an odd count, got %r" % (k,))
    if k > min(img.rows, img.cols):
        raise ParameterError(
            "median filter size %d exceeds the image (%dx%d)" % (
                k, img.rows, img.cols))
    if k == 1:
        return img.with_data(img.data)
    return img.with_data(
        scipy.ndimage.median_filter(img.data, size=int(k), mode="nearest"))


def gain_curve(rows, p):
    """
    Gain of every row; row 0 gets 1, the last row gets the full
    (1 + linear_coeff) * exp(exp_coeff), clamped to [1, max_gain].

    >>> gain_curve(2, GainParams(linear_coeff=1, exp_coeff=0, max_gain=10)).tolist()
    [1.0, 2.0]
    """
    r = np.arange(rows, dtype=np.float64) / max(rows - 1, 1)
    g = (1.0 + p.linear_coeff * r) * np.exp(p.exp_coeff * r)
    return np.clip(g, 1.0, p.max_gain)


def apply_gain(img, p):
    p.validate()
    return img.with_data(img.data * gain_curve(img.rows, p)[:, np.newaxis])


def normalize(img):
    """
    Map [min, max] affinely onto [-1, 1]; a constant image becomes zeros.

    >>> normalize(BScanImage([[0, 128, 255], [0, 128, 255]])).data[0].round(5).tolist()
    [-1.0, 0.00392, 1.0]
    """
    data = img.data
    vmin, vmax = data.min(), data.max()
    if vmax <= vmin:
        return img.with_data(np.zeros_like(data))
    out = 2.0 * (data - vmin) / (vmax - vmin) - 1.0
    return img.with_data(np.clip(out, -1.0, 1.0))


def preprocess(img, params=None):
    """
    Run the enabled steps of ``params`` (PreprocessParams) in their
    configured order.
    """
    if params is None:
        params = PreprocessParams()
    params.validate()
    steps = {
        "remove_background": lambda im: remove_background(im),
        "median_filter": lambda im: median_filter(im, params.median_k),
        "apply_gain": lambda im: apply_gain(im, params.gain),
        "normalize": lambda im: normalize(im),
        }
    for name in params.order:
        if getattr(params, name):
            _logger.debug("%s on %dx%d", name, img.rows, img.cols)
            img = steps[name](img)
    return img


if __name__ == '__main__':
    import doctest
    doctest.testmod()
