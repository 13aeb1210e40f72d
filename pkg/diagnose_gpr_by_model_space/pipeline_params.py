#! /usr/bin/env python
# -*- coding: utf-8 -*-
"""
This module contains only classes for parameters of the diagnosis
pipeline: the sliding window, the reservoir, the preprocessing and
the detectors, and the pipeline configuration nesting all of them.

Every class can be built from keyword arguments or from JSON (comments
allowed), and unknown keys are rejected.
"""
from __future__ import unicode_literals
from __future__ import absolute_import

import copy
import json
import logging
import numbers

from .utils import (
    ParameterError,
    json_loads,
    validate_dict_one_by_template)


__all__ = [
    'WindowSpec',
    'ReservoirConfig',
    'GainParams',
    'PreprocessParams',
    'DetectorParams',
    'PipelineConfig',
    'PREPROCESS_STEPS',
    ]

_logger = logging.getLogger(__name__)


PREPROCESS_STEPS = (
    "remove_background", "median_filter", "apply_gain", "normalize")


def _is_count(v, minimum=0):
    return isinstance(v, numbers.Integral) and not isinstance(v, bool) \
        and v >= minimum


def _is_real(v):
    return isinstance(v, numbers.Real) and not isinstance(v, bool)


class _JsonParams(object):
    def to_dict(self):
        return copy.deepcopy(self.__dict__)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d, depthstr=""):
        tmpl = cls()
        validate_dict_one_by_template(
            d, tmpl.__dict__, depthstr=depthstr or cls.__name__)
        result = cls(**d)
        result.validate()
        return result

    @classmethod
    def from_json(cls, s):
        if s:
            return cls.from_dict(json_loads(s))
        return cls()

    def __eq__(self, other):
        return type(self) == type(other) and self.to_dict() == other.to_dict()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return "%s(%s)" % (type(self).__name__, ", ".join(
                "%s=%r" % (k, v) for k, v in sorted(self.__dict__.items())))


class WindowSpec(_JsonParams):
    """
    Sliding window over the traces (columns) of a B-scan.

    * width_cols:
        Number of traces in one window. The full depth of the image is
        always used, so a window is rows x width_cols pixels.

    * stride_cols:
        Distance between the start columns of consecutive windows.
        1 <= stride_cols <= width_cols.
    """
    def __init__(self, **kwargs):
        self.width_cols = kwargs.get("width_cols", 300)
        self.stride_cols = kwargs.get("stride_cols", 20)

    def validate(self):
        if not _is_count(self.width_cols, 1):
            raise ParameterError("width_cols must be a count >= 1")
        if not _is_count(self.stride_cols, 1) or \
                self.stride_cols > self.width_cols:
            raise ParameterError(
                "stride_cols must satisfy 1 <= stride_cols <= width_cols")
        return self


class ReservoirConfig(_JsonParams):
    """
    Parameter of one 2D-ESN reservoir.

    * n_units:
        Number of hidden units N. The fitted readout of a window has
        2N weights and one bias.

    * alpha:
        Spectral radius both reservoir matrices are scaled to, in (0, 1).
        A small value gives a short memory, which keeps the model
        sensitive to sudden changes of texture.

    * input_scale:
        Factor applied to the random input weights.

    * density:
        Fraction of nonzero entries of each reservoir matrix;
        density * n_units must be at least 1.

    * ridge_lambda:
        Regularization factor of the readout; lambda^2 is added to the
        diagonal of the normal equations (the bias is not regularized).

    * seed:
        Seed of the random weights. Same seed, same weights.
    """
    def __init__(self, **kwargs):
        self.n_units = kwargs.get("n_units", 50)
        self.alpha = kwargs.get("alpha", 0.1)
        self.input_scale = kwargs.get("input_scale", 1.0)
        self.density = kwargs.get("density", 0.1)
        self.ridge_lambda = kwargs.get("ridge_lambda", 1e-6)
        self.seed = kwargs.get("seed", 0)

    def validate(self):
        if not _is_count(self.n_units, 1):
            raise ParameterError("n_units must be a count >= 1")
        if not _is_real(self.alpha) or not (0.0 < self.alpha < 1.0):
            raise ParameterError("alpha must lie in (0, 1)")
        if not _is_real(self.input_scale) or self.input_scale <= 0:
            raise ParameterError("input_scale must be > 0")
        if not _is_real(self.density) or not (0.0 < self.density <= 1.0):
            raise ParameterError("density must lie in (0, 1]")
        if self.density * self.n_units < 1:
            raise ParameterError("density * n_units must be >= 1")
        if not _is_real(self.ridge_lambda) or self.ridge_lambda < 0:
            raise ParameterError("ridge_lambda must be >= 0")
        if not _is_count(self.seed, 0):
            raise ParameterError("seed must be a non-negative integer")
        return self


class GainParams(_JsonParams):
    """
    Time-varying gain compensating propagation losses:

        gain(row) = (1 + linear_coeff * r) * exp(exp_coeff * r),
        r = row / (rows - 1)

    with r = 0 for a one-row image, clamped to [1, max_gain]. The deepest
    row gets the full gain. linear_coeff compensates geometric spreading,
    exp_coeff the attenuation of the medium.
    """
    def __init__(self, **kwargs):
        self.linear_coeff = kwargs.get("linear_coeff", 1.0)
        self.exp_coeff = kwargs.get("exp_coeff", 1.0)
        self.max_gain = kwargs.get("max_gain", 10.0)

    def validate(self):
        if not _is_real(self.linear_coeff) or self.linear_coeff < 0:
            raise ParameterError("linear_coeff must be >= 0")
        if not _is_real(self.exp_coeff) or self.exp_coeff < 0:
            raise ParameterError("exp_coeff must be >= 0")
        if not _is_real(self.max_gain) or self.max_gain < 1:
            raise ParameterError("max_gain must be >= 1")
        return self


class PreprocessParams(_JsonParams):
    """
    Which cleaning steps run before segmentation, and in which order.

    * remove_background, median_filter, apply_gain, normalize:
        Toggles of the four steps.

    * median_k:
        Odd size of the square median filter neighborhood.

    * order:
        Order of the steps; the default is background removal, median
        filter, gain, normalization.

    * gain:
        GainParams as a dictionary.
    """
    def __init__(self, **kwargs):
        self.remove_background = kwargs.get("remove_background", True)
        self.median_filter = kwargs.get("median_filter", True)
        self.median_k = kwargs.get("median_k", 3)
        self.apply_gain = kwargs.get("apply_gain", True)
        self.normalize = kwargs.get("normalize", True)
        self.order = list(kwargs.get("order", PREPROCESS_STEPS))
        gain = kwargs.get("gain", GainParams())
        if isinstance(gain, dict):
            gain = GainParams.from_dict(gain, "preprocess.gain")
        self.gain = gain

    def to_dict(self):
        d = copy.deepcopy(self.__dict__)
        d["gain"] = self.gain.to_dict()
        return d

    def validate(self):
        if sorted(self.order) != sorted(PREPROCESS_STEPS):
            raise ParameterError(
                "order must be a permutation of %s" % ", ".join(PREPROCESS_STEPS))
        if not _is_count(self.median_k, 1) or self.median_k % 2 == 0:
            raise ParameterError("median_k must be an odd count >= 1")
        self.gain.validate()
        return self


class DetectorParams(_JsonParams):
    """
    Parameter of the classifiers working in the model space.

    * nu:
        Upper bound on the fraction of training outliers (and lower bound
        on the fraction of support vectors) of every one-class SVM, in
        (0, 1].

    * gamma:
        Width of the RBF kernel over the model distance. null selects
        1 / median of the pairwise training distances.

    * min_pool:
        Number of windows rejected by every classifier that have to
        accumulate before a new anomaly class is spawned.

    * k:
        Number of neighbors of the supervised KNN classifier.

    * normal_span:
        [start_col, end_col) of a stretch of the road known to be normal;
        the base classifier is trained on the windows inside it when no
        trained model is given.

    * kkt_tol:
        Stopping tolerance of the SMO solver.

    * calibration_folds:
        Contiguous folds of held-out windows from which the accept
        threshold of the base and of every spawned classifier is set
        (the smallest held-out score); 0 keeps the threshold at -kkt_tol.
    """
    def __init__(self, **kwargs):
        self.nu = kwargs.get("nu", 0.05)
        self.gamma = kwargs.get("gamma", None)
        self.min_pool = kwargs.get("min_pool", 15)
        self.k = kwargs.get("k", 5)
        self.normal_span = kwargs.get("normal_span", None)
        self.kkt_tol = kwargs.get("kkt_tol", 1e-4)
        self.calibration_folds = kwargs.get("calibration_folds", 5)

    def validate(self):
        if not _is_real(self.nu) or not (0.0 < self.nu <= 1.0):
            raise ParameterError("nu must lie in (0, 1]")
        if self.gamma is not None and (
                not _is_real(self.gamma) or self.gamma <= 0):
            raise ParameterError("gamma must be > 0 or null")
        if not _is_count(self.min_pool, 2):
            raise ParameterError("min_pool must be a count >= 2")
        if not _is_count(self.k, 1):
            raise ParameterError("k must be a count >= 1")
        if self.normal_span is not None:
            ns = self.normal_span
            if len(ns) != 2 or not all(_is_count(v, 0) for v in ns) \
                    or ns[0] >= ns[1]:
                raise ParameterError(
                    "normal_span must be [start_col, end_col) with start < end")
            self.normal_span = [int(ns[0]), int(ns[1])]
        if not _is_real(self.kkt_tol) or self.kkt_tol <= 0:
            raise ParameterError("kkt_tol must be > 0")
        if not _is_count(self.calibration_folds, 0) or self.calibration_folds == 1:
            raise ParameterError("calibration_folds must be 0 or a count >= 2")
        return self


class PipelineConfig(_JsonParams):
    """
    Whole configuration of a diagnosis run, as one JSON document:

        {
          "window": {...WindowSpec...},
          "reservoir": {...ReservoirConfig...},
          "preprocess": {...PreprocessParams...},
          "detector": {...DetectorParams...},
          "threads": 0,
          "input_path": "road.pgm",
          "model_dir": "models",
          "report_dir": "report",
          "merge_gap_cols": 0
        }

    Sections not given take their defaults. The reservoir section of a
    pipeline defaults to ridge_lambda = 1.0: with alpha = 0.1 the hidden
    states are nearly linear in the inputs and almost collinear, and a
    vanishing ridge term lets the ill-determined directions of the
    readout dominate the model distance.

    threads = 0 uses every available core. merge_gap_cols is the gap
    between two windows of one label that still merges them into one
    region.
    """
    _sections = {
        "window": WindowSpec,
        "reservoir": ReservoirConfig,
        "preprocess": PreprocessParams,
        "detector": DetectorParams,
        }
    pipeline_ridge_lambda = 1.0

    def __init__(self, **kwargs):
        for name, cls in sorted(self._sections.items()):
            v = kwargs.get(name)
            if v is None:
                v = cls()
                if name == "reservoir":
                    v.ridge_lambda = self.pipeline_ridge_lambda
            elif isinstance(v, dict):
                if name == "reservoir" and "ridge_lambda" not in v:
                    v = dict(v, ridge_lambda=self.pipeline_ridge_lambda)
                v = cls.from_dict(v, name)
            setattr(self, name, v)
        self.threads = kwargs.get("threads", 0)
        self.input_path = kwargs.get("input_path", None)
        self.model_dir = kwargs.get("model_dir", None)
        self.report_dir = kwargs.get("report_dir", None)
        self.merge_gap_cols = kwargs.get("merge_gap_cols", 0)

    def to_dict(self):
        d = copy.deepcopy(self.__dict__)
        for name in self._sections:
            d[name] = getattr(self, name).to_dict()
        return d

    def validate(self):
        for name in self._sections:
            getattr(self, name).validate()
        if not _is_count(self.threads, 0):
            raise ParameterError("threads must be a count >= 0 (0: all cores)")
        if not _is_count(self.merge_gap_cols, 0):
            raise ParameterError("merge_gap_cols must be a count >= 0")
        return self


if __name__ == "__main__":
    import doctest
    doctest.testmod()
