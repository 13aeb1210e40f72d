# -*- coding: utf-8 -*-
#
"""
This module contains a small convolutional B-scan simulator: every
trace is a reflectivity series (flat layers, point scatterers giving
hyperbolas, weak random clutter and injected anomalies) convolved with
a Ricker wavelet, plus white noise.

Three anomaly kinds are known:

* moisture_blob: smooth bright patch with tapered ends (water-rich soil),
* loose_texture: high-variance speckle (loose subgrade),
* cavity: bright top edge over a shadowed interior.

The ground truth is the column span of every anomaly; no anomaly energy
leaves its span because traces are convolved along the depth only.
"""
from __future__ import unicode_literals
from __future__ import absolute_import
from __future__ import division

import logging

import numpy as np
import scipy.ndimage
import scipy.signal

from .utils import ParameterError, make_rng
from .pipeline_params import _JsonParams, _is_count, _is_real
from .preprocess import BScanImage, DEFAULT_COL_SPACING_CM


__all__ = [
    "ANOMALY_KINDS",
    "SceneSpec",
    "ricker",
    "ricker_kernel",
    "generate_bscan",
    "road_scene",
    ]

_logger = logging.getLogger(__name__)

ANOMALY_KINDS = ("moisture_blob", "loose_texture", "cavity")

# interior of a cavity keeps this fraction of its amplitude
_CAVITY_SHADOW = 0.2
# share of a moisture patch width spent rising and falling, both ends together
_MOISTURE_TAPER = 0.05

# default depth band of each kind, as fractions of the image height
_DEFAULT_ROW_BANDS = {
    "moisture_blob": (0.3, 0.8),
    "loose_texture": (0.4, 0.9),
    "cavity": (0.4, 0.8),
    }


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else v


def _entries(v, nested=False):
    if not isinstance(v, (list, tuple)):
        return v
    if nested:
        return [[_as_list(x) for x in e] if isinstance(e, (list, tuple)) else e
                for e in v]
    return [_as_list(e) for e in v]


def _check_entry(entry, arity, what, check=_is_real):
    if not isinstance(entry, list) or len(entry) != arity \
            or not all(check(v) for v in entry):
        raise ParameterError(
            "%s must be a list of %d numbers, got %r" % (what, arity, entry))


def ricker(t, f):
    """
    (1 - 2 pi^2 f^2 t^2) exp(-pi^2 f^2 t^2)

    >>> float(ricker(0.0, 0.1))
    1.0
    >>> abs(float(ricker(1 / (np.pi * 0.1 * np.sqrt(2)), 0.1))) < 1e-12
    True
    """
    if not f > 0:
        raise ParameterError("the wavelet frequency must be > 0")
    pft2 = (np.pi * f * np.asarray(t, dtype=np.float64)) ** 2
    return (1.0 - 2.0 * pft2) * np.exp(-pft2)


def ricker_kernel(f):
    """
    Sampled wavelet over +-1.5 periods, odd length, peak in the middle.
    """
    half = int(np.ceil(1.5 / f))
    return ricker(np.arange(-half, half + 1, dtype=np.float64), f)


class SceneSpec(_JsonParams):
    """
    Synthetic road section.

    * rows, cols:
        Size of the B-scan.

    * wavelet_freq:
        Center frequency of the Ricker wavelet, in cycles per row.

    * layers:
        List of [depth_row, reflect_amp]: flat interfaces.

    * scatterers:
        List of [col, depth, velocity_px, amp]. A scatterer at offset
        dc columns reflects at row 2 * sqrt(depth^2 + (dc * col_step)^2)
        / velocity_px, with amplitude amp / travel time.

    * col_step:
        Horizontal distance between traces in the units of ``depth``.

    * anomalies:
        List of [kind, [start_col, end_col], [start_row, end_row], intensity]
        with kind one of moisture_blob, loose_texture, cavity.

    * clutter:
        Standard deviation of weak random reflectors everywhere.

    * noise_sigma:
        Standard deviation of the additive white noise.

    * col_spacing_cm:
        Trace spacing written into the image.

    * seed:
        Seed of every random draw.
    """
    def __init__(self, **kwargs):
        self.rows = kwargs.get("rows", 64)
        self.cols = kwargs.get("cols", 600)
        self.wavelet_freq = kwargs.get("wavelet_freq", 0.1)
        self.layers = _entries(kwargs.get("layers", []))
        self.scatterers = _entries(kwargs.get("scatterers", []))
        self.col_step = kwargs.get("col_step", 1.0)
        self.anomalies = _entries(kwargs.get("anomalies", []), nested=True)
        self.clutter = kwargs.get("clutter", 0.0)
        self.noise_sigma = kwargs.get("noise_sigma", 0.0)
        self.col_spacing_cm = kwargs.get("col_spacing_cm", DEFAULT_COL_SPACING_CM)
        self.seed = kwargs.get("seed", 0)

    def validate(self):
        if not _is_count(self.rows, 2) or not _is_count(self.cols, 2):
            raise ParameterError("rows and cols must be counts >= 2")
        if not _is_real(self.wavelet_freq) or self.wavelet_freq <= 0:
            raise ParameterError("wavelet_freq must be > 0")
        for name in ("layers", "scatterers", "anomalies"):
            if not isinstance(getattr(self, name), list):
                raise ParameterError("%s must be a list" % name)
        for layer in self.layers:
            _check_entry(layer, 2, "a layer [depth_row, reflect_amp]")
            depth = layer[0]
            if not (0 <= depth < self.rows):
                raise ParameterError(
                    "layer depth %r lies outside [0, %d)" % (depth, self.rows))
        for s in self.scatterers:
            _check_entry(s, 4, "a scatterer [col, depth, velocity_px, amp]")
            col, depth, vel, amp = s
            if not (0 <= col < self.cols) or depth < 0 or not vel > 0:
                raise ParameterError("bad scatterer %r" % (s,))
        if not _is_real(self.col_step) or self.col_step <= 0:
            raise ParameterError("col_step must be > 0")
        for a in self.anomalies:
            if not isinstance(a, list) or len(a) != 4:
                raise ParameterError(
                    "an anomaly is [kind, [start_col, end_col], "
                    "[start_row, end_row], intensity], got %r" % (a,))
            kind, cspan, rspan, intensity = a
            _check_entry(cspan, 2, "an anomaly column span", _is_count)
            _check_entry(rspan, 2, "an anomaly row span", _is_count)
            if kind not in ANOMALY_KINDS:
                raise ParameterError(
                    "unknown anomaly kind %r (known: %s)" % (
                        kind, ", ".join(ANOMALY_KINDS)))
            if not (0 <= cspan[0] < cspan[1] <= self.cols):
                raise ParameterError(
                    "anomaly column span %r lies outside the image" % (cspan,))
            if not (0 <= rspan[0] < rspan[1] <= self.rows):
                raise ParameterError(
                    "anomaly row span %r lies outside the image" % (rspan,))
            if not _is_real(intensity) or intensity < 0:
                raise ParameterError("anomaly intensity must be >= 0")
        if not _is_real(self.clutter) or self.clutter < 0:
            raise ParameterError("clutter must be >= 0")
        if not _is_real(self.noise_sigma) or self.noise_sigma < 0:
            raise ParameterError("noise_sigma must be >= 0")
        if not _is_count(self.seed, 0):
            raise ParameterError("seed must be a non-negative integer")
        return self

    def ground_truth(self):
        return [((int(c[0]), int(c[1])), kind)
                for kind, c, _, _ in self.anomalies]


def _reflectivity(scene):
    rows, cols = scene.rows, scene.cols
    refl = np.zeros((rows, cols))
    for depth, amp in scene.layers:
        refl[int(round(depth)), :] += amp
    c = np.arange(cols, dtype=np.float64)
    for col, depth, vel, amp in scene.scatterers:
        t = 2.0 * np.sqrt(depth ** 2 + ((c - col) * scene.col_step) ** 2) / vel
        r = np.rint(t).astype(int)
        ok = r < rows
        refl[r[ok], c[ok].astype(int)] += amp / np.maximum(t[ok], 1.0)
    if scene.clutter > 0:
        for j in range(cols):
            refl[:, j] += make_rng(scene.seed, "clutter", j).normal(
                0.0, scene.clutter, rows)
    for n, (kind, (c0, c1), (r0, r1), intensity) in enumerate(scene.anomalies):
        if kind == "loose_texture":
            for j in range(c0, c1):
                refl[r0:r1, j] += make_rng(scene.seed, "loose", n, j).normal(
                    0.0, intensity, r1 - r0)
        elif kind == "cavity":
            refl[r0, c0:c1] += intensity
    return refl


def _moisture_patch(rows, cols, cspan, rspan, intensity):
    """Gaussian in depth, flat along the road with tapered ends."""
    (c0, c1), (r0, r1) = cspan, rspan
    rr = np.arange(r0, r1, dtype=np.float64)
    sr = max((r1 - r0) / 4.0, 0.5)
    depth = np.exp(-0.5 * ((rr - (r0 + r1 - 1) / 2.0) / sr) ** 2)
    along = scipy.signal.windows.tukey(c1 - c0, _MOISTURE_TAPER)
    out = np.zeros((rows, cols))
    out[r0:r1, c0:c1] = intensity * np.outer(depth, along)
    return out


def generate_bscan(scene):
    """
    Returns (BScanImage, ground truth as a list of ((start_col, end_col), kind)).
    """
    scene.validate()
    refl = _reflectivity(scene)
    img = scipy.ndimage.convolve1d(
        refl, ricker_kernel(scene.wavelet_freq), axis=0, mode="constant")
    for kind, cspan, rspan, intensity in scene.anomalies:
        if kind == "moisture_blob":
            img += _moisture_patch(scene.rows, scene.cols, cspan, rspan, intensity)
        elif kind == "cavity":
            (c0, c1), (r0, r1) = cspan, rspan
            if r1 > r0 + 1:
                img[r0 + 1:r1, c0:c1] *= _CAVITY_SHADOW
    if scene.noise_sigma > 0:
        for j in range(scene.cols):
            img[:, j] += make_rng(scene.seed, "noise", j).normal(
                0.0, scene.noise_sigma, scene.rows)
    _logger.debug(
        "generated %dx%d B-scan with %d anomalies",
        scene.rows, scene.cols, len(scene.anomalies))
    return (BScanImage(img, col_spacing_cm=scene.col_spacing_cm),
            scene.ground_truth())


def road_scene(rows=64, cols=2000, anomalies=(), seed=0, noise_sigma=0.05,
               clutter=0.1, wavelet_freq=0.1, scatterers=()):
    """
    SceneSpec of a road section: three flat interfaces, weak clutter and
    the given ``anomalies`` as (kind, (start_col, end_col), intensity);
    their depth band is picked per kind.
    """
    layers = [[0.1 * rows, 1.0], [0.35 * rows, 0.6], [0.7 * rows, 0.4]]
    full = []
    for kind, cspan, intensity in anomalies:
        lo, hi = _DEFAULT_ROW_BANDS.get(kind, (0.3, 0.8))
        full.append([kind, list(cspan),
                     [int(lo * rows), int(hi * rows)], intensity])
    return SceneSpec(
        rows=rows, cols=cols, wavelet_freq=wavelet_freq, layers=layers,
        scatterers=[list(s) for s in scatterers], anomalies=full,
        clutter=clutter, noise_sigma=noise_sigma, seed=seed).validate()


if __name__ == '__main__':
    import doctest
    doctest.testmod()
