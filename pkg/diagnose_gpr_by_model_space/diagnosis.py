# -*- coding: utf-8 -*-
#
"""
This module contains the diagnoser class which runs the whole chain on
one B-scan:

    preprocess -> sliding windows -> 2D-ESN fit per window -> model space
    -> one-class / incremental classification -> merged anomaly regions

and the report it produces.
"""
from __future__ import unicode_literals
from __future__ import absolute_import
from __future__ import division

import io
import os
import json
import time
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from tqdm import tqdm

from . import _cache
from . import bscan_io
from .utils import InputDataError, ParameterError, array_digest
from .pipeline_params import PipelineConfig
from .preprocess import preprocess
from .reservoir import init_reservoir, fit_window
from .model_space import ModelSpace, ModelVector, embed
from .segmentation import slide_windows, merge_regions
from .detectors import (
    IncrementalState,
    incremental_diagnose,
    ocsvm_classify,
    train_ocsvm)


__all__ = [
    "DiagnosisReport",
    "BScanDiagnoser",
    "latency_summary",
    "windows_inside",
    "train_base",
    ]

_logger = logging.getLogger(__name__)


def latency_summary(seconds):
    """
    mean / p50 / p90 / max of per-window wall times.

    >>> latency_summary([0.1, 0.2, 0.3])["max"]
    0.3
    """
    if not len(seconds):
        return {"count": 0, "mean": 0.0, "p50": 0.0, "p90": 0.0, "max": 0.0}
    s = np.asarray(seconds, dtype=np.float64)
    return {
        "count": int(s.size),
        "mean": float(s.mean()),
        "p50": float(np.percentile(s, 50)),
        "p90": float(np.percentile(s, 90)),
        "max": float(s.max()),
        }


def windows_inside(space, normal_span):
    """Indices of the points whose window lies fully inside ``normal_span``."""
    return [i for i, p in enumerate(space)
            if p.window_span is not None
            and p.window_span[0] >= normal_span[0]
            and p.window_span[1] <= normal_span[1]]


def train_base(space, normal_span, params):
    """
    One-class SVM (DetectorParams ``params``) on the windows lying fully
    inside ``normal_span``.
    """
    if normal_span is None:
        raise ParameterError(
            "a normal column span is needed to train the base classifier")
    normal = [space[i] for i in windows_inside(space, normal_span)]
    if len(normal) < 2:
        raise InputDataError(
            "the normal span [%d, %d) holds %d whole windows, at least 2 "
            "are needed" % (normal_span[0], normal_span[1], len(normal)))
    _logger.info("training the base classifier on %d windows", len(normal))
    return train_ocsvm(
        normal, nu=params.nu, gamma=params.gamma, tol=params.kkt_tol,
        calibration_folds=min(params.calibration_folds, len(normal)))


class DiagnosisReport(object):
    """
    Result of BScanDiagnoser.diagnose.

    * windows: list of (start_col, end_col, label, score)
    * regions: merged AnomalyRegions
    * classifiers: labels of the spawned anomaly classifiers
    * degenerate: labels of the classifiers whose offset came from
      bound support vectors only
    * fit_seconds, classify_seconds: wall time per streamed window
    """
    def __init__(self, windows, regions, classifiers, degenerate,
                 fit_seconds, classify_seconds, col_spacing_cm, fingerprint):
        self.windows = windows
        self.regions = regions
        self.classifiers = classifiers
        self.degenerate = degenerate
        self.fit_seconds = fit_seconds
        self.classify_seconds = classify_seconds
        self.col_spacing_cm = col_spacing_cm
        self.fingerprint = fingerprint

    @property
    def labels(self):
        return [w[2] for w in self.windows]

    def summary(self):
        counts = {}
        for l in self.labels:
            counts[l] = counts.get(l, 0) + 1
        return {
            "n_windows": len(self.windows),
            "label_counts": counts,
            "n_regions": len(self.regions),
            "classifiers": list(self.classifiers),
            "degenerate": list(self.degenerate),
            "reservoir_fingerprint": self.fingerprint,
            }

    def timings(self):
        per_window = [f + c for f, c in zip(self.fit_seconds, self.classify_seconds)]
        return {
            "fit": latency_summary(self.fit_seconds),
            "classify": latency_summary(self.classify_seconds),
            "per_window": latency_summary(per_window),
            }

    def write(self, report_dir):
        """
        windows.csv, regions.csv and summary.json depend on the inputs
        only; wall times go to timings.json.
        """
        if not os.path.isdir(report_dir):
            os.makedirs(report_dir)
        bscan_io.write_windows(self.windows, os.path.join(report_dir, "windows.csv"))
        bscan_io.write_regions(
            self.regions, self.col_spacing_cm,
            os.path.join(report_dir, "regions.csv"))
        for name, d in (("summary.json", self.summary()),
                        ("timings.json", self.timings())):
            with io.open(os.path.join(report_dir, name), "w", encoding="utf-8") as fo:
                fo.write(json.dumps(d, indent=2, sort_keys=True))
                fo.write("\n")


class BScanDiagnoser(object):
    """
    Diagnoses B-scans with one configuration (PipelineConfig). The
    reservoir is drawn once per diagnoser (or given as ``weights``);
    every image diagnosed by one diagnoser lives in the same model space.
    """
    def __init__(self, config=None, weights=None, use_cache=True,
                 clear_cache=False, progress=False):
        if config is None:
            config = PipelineConfig()
        self.config = config.validate()
        if weights is None:
            weights = init_reservoir(config.reservoir)
        self.weights = weights
        self._use_cache = use_cache
        self._progress = progress
        if clear_cache:
            _cache.clean("fit_model_space")

    @property
    def threads(self):
        return self.config.threads or os.cpu_count() or 1

    def _cache_key(self, img):
        return _cache.make_cache_key(
            image=array_digest(img.data, col_spacing_cm=img.col_spacing_cm),
            preprocess=self.config.preprocess.to_json(),
            window=self.config.window.to_json(),
            reservoir=self.weights.fingerprint)

    def fit_model_space(self, img):
        """
        Returns (ModelSpace of every window of ``img``, fit seconds per
        window).
        """
        _logger.info("fit_model_space %dx%d begin", img.rows, img.cols)
        ck = self._cache_key(img) if self._use_cache else None
        cv = _cache.load_model_space("fit_model_space", ck) if ck else None
        if cv is not None:
            phis, spans, seconds = cv
            points = [ModelVector(phi, window_span=span,
                                  fingerprint=self.weights.fingerprint)
                      for phi, span in zip(phis, spans)]
            _logger.info("fit_model_space end (%d windows from cache)", len(points))
            return ModelSpace(points, self.weights.n_units,
                              self.weights.fingerprint), seconds.tolist()

        clean = preprocess(img, self.config.preprocess)
        windows = slide_windows(clean, self.config.window)
        width = self.config.window.width_cols

        def _each(item):
            start, win = item
            t0 = time.time()
            m = fit_window(self.weights, win, window_id=start)
            return embed(m, window_span=(start, start + width)), time.time() - t0

        with ThreadPoolExecutor(max_workers=self.threads) as ex:
            results = list(tqdm(
                ex.map(_each, windows), total=len(windows), unit="window",
                desc="fit", disable=not self._progress))
        points = [p for p, _ in results]
        seconds = [s for _, s in results]
        if ck:
            _cache.store_model_space(
                "fit_model_space", ck, [p.phi for p in points],
                [p.window_span for p in points], seconds)
        _logger.info("fit_model_space end (%d windows)", len(points))
        return ModelSpace(points, self.weights.n_units,
                          self.weights.fingerprint), seconds

    def train_base(self, space, normal_span=None):
        if normal_span is None:
            normal_span = self.config.detector.normal_span
        return train_base(space, normal_span, self.config.detector)

    def diagnose(self, img, base=None):
        """
        Diagnose ``img``. Without ``base`` the base classifier is trained
        on the normal span of the configuration, and the windows used
        for that are reported with the label "train".
        """
        det = self.config.detector
        space, fit_seconds = self.fit_model_space(img)
        train = set()
        if base is None:
            base = self.train_base(space)
            train = set(windows_inside(space, det.normal_span))
        elif base.fingerprint not in (None, self.weights.fingerprint):
            raise InputDataError(
                "the base classifier was trained with another reservoir")

        state = IncrementalState(min_pool=det.min_pool)
        labels, scores = [], []
        stream_fit, stream_classify = [], []
        positions = {}
        _logger.info("classification begin")
        for i, p in enumerate(space):
            if i in train:
                labels.append("train")
                scores.append(ocsvm_classify(base, p)[1])
                continue
            t0 = time.time()
            l, s, state = incremental_diagnose(
                [p], base, state, nu=det.nu,
                calibration_folds=det.calibration_folds)
            stream_classify.append(time.time() - t0)
            stream_fit.append(fit_seconds[i])
            positions[state.n_seen - 1] = i
            labels.append(l[0])
            scores.append(s[0])
        for pos, (label, score) in state.claimed.items():
            labels[positions[pos]] = label
            scores[positions[pos]] = score
        _logger.info("classification end: %d classifiers, %d pending",
                     len(state.classifiers), len(state.pending))

        width = self.config.window.width_cols
        windows = [(p.window_span[0], p.window_span[1], l, float(s))
                   for p, l, s in zip(space, labels, scores)]
        regions = merge_regions(
            [(w[0], width, w[2], w[3]) for w in windows],
            gap_cols=self.config.merge_gap_cols)
        degenerate = [l for l, m in state.classifiers if m.degenerate]
        if base.degenerate:
            degenerate.insert(0, "normal")
        return DiagnosisReport(
            windows, regions, state.labels, degenerate,
            stream_fit, stream_classify, img.col_spacing_cm,
            self.weights.fingerprint)
