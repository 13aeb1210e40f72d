# -*- coding: utf-8 -*-
#
"""
This module contains the file formats of this package:

* B-scans as binary PGM (P5, 8 or 16 bit) or CSV of reals, each with
  a sidecar ``<stem>.json`` holding {"col_spacing_cm", "vmin", "vmax"},
* ground truth CSV (start_col, end_col, kind),
* model space CSV (phi..., label, start_col, end_col) headed by a
  ``# fingerprint=<hex> n_units=<N>`` line,
* projection CSV, region CSV and per-window report CSV.
"""
from __future__ import unicode_literals
from __future__ import absolute_import
from __future__ import division

import io
import os
import re
import csv
import json
import logging

import numpy as np

from .utils import InputDataError, ParameterError, json_load
from .preprocess import BScanImage, DEFAULT_COL_SPACING_CM
from .model_space import ModelSpace, ModelVector
from .segmentation import AnomalyRegion


__all__ = [
    "sidecar_path",
    "read_bscan",
    "write_bscan",
    "read_ground_truth",
    "write_ground_truth",
    "read_model_space",
    "write_model_space",
    "write_projection",
    "read_regions",
    "write_regions",
    "read_windows",
    "write_windows",
    ]

_logger = logging.getLogger(__name__)


def _fmt(v):
    # shortest repr which reads back to the same float
    return "%r" % float(v)


def _label_cell(label):
    return "" if label is None else "%s" % label


def _open_csv_for_write(path):
    return io.open(path, "w", encoding="utf-8", newline="")


def _read_csv_rows(path):
    try:
        with io.open(path, encoding="utf-8", newline="") as fi:
            return [row for row in csv.reader(fi)]
    except (IOError, OSError) as e:
        raise InputDataError("cannot read '%s': %s" % (path, e))


# ================================================================
#
# B-scan images
#
def sidecar_path(path):
    return os.path.splitext(path)[0] + ".json"


def _read_sidecar(path):
    sc = sidecar_path(path)
    if not os.path.isfile(sc):
        return {}
    meta = json_load(sc)
    if not isinstance(meta, dict):
        raise InputDataError("'%s' must hold a JSON object" % sc)
    unknown = set(meta.keys()) - {"col_spacing_cm", "vmin", "vmax"}
    if unknown:
        _logger.warning("ignoring keys %s of '%s'", ", ".join(sorted(unknown)), sc)
    return meta


_PGM_TOKEN = re.compile(br"(#[^\n]*\n)|(\S+)")


def _parse_pgm(raw, path):
    """(width, height, maxval, offset of the pixel data) of a P5 file."""
    tokens = []
    pos = 0
    while len(tokens) < 4:
        m = _PGM_TOKEN.search(raw, pos)
        if m is None:
            raise InputDataError("'%s': truncated PGM header" % path)
        pos = m.end()
        if m.group(2) is not None:
            tokens.append(m.group(2))
    if tokens[0] != b"P5":
        raise InputDataError("'%s' is not a binary PGM (P5) file" % path)
    try:
        width, height, maxval = [int(t) for t in tokens[1:]]
    except ValueError:
        raise InputDataError("'%s': malformed PGM header" % path)
    if not (0 < maxval < 65536):
        raise InputDataError("'%s': PGM maxval %d out of range" % (path, maxval))
    # exactly one whitespace byte separates the header from the pixels
    return width, height, maxval, pos + 1


def read_bscan(path):
    """
    Read a B-scan from ``.pgm`` or ``.csv``. PGM levels are mapped
    linearly onto [vmin, vmax] of the sidecar; without one they stay
    raw integer levels.
    """
    meta = _read_sidecar(path)
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        try:
            with io.open(path, "rb") as fi:
                raw = fi.read()
        except (IOError, OSError) as e:
            raise InputDataError("cannot read '%s': %s" % (path, e))
        width, height, maxval, offset = _parse_pgm(raw, path)
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = width * height * dtype.itemsize
        if len(raw) - offset < need:
            raise InputDataError("'%s': truncated PGM pixel data" % path)
        levels = np.frombuffer(raw, dtype=dtype, count=width * height,
                               offset=offset).reshape(height, width)
        data = levels.astype(np.float64)
        if "vmin" in meta and "vmax" in meta:
            vmin, vmax = float(meta["vmin"]), float(meta["vmax"])
            data = vmin + data / maxval * (vmax - vmin)
    elif ext == ".csv":
        try:
            data = np.loadtxt(path, delimiter=",", ndmin=2)
        except (IOError, OSError, ValueError) as e:
            raise InputDataError("cannot read '%s' as a CSV of reals: %s" % (path, e))
    else:
        raise InputDataError(
            "'%s': unknown B-scan format (expected .pgm or .csv)" % path)
    value_range = None
    if "vmin" in meta and "vmax" in meta:
        value_range = (meta["vmin"], meta["vmax"])
    return BScanImage(
        data,
        col_spacing_cm=meta.get("col_spacing_cm", DEFAULT_COL_SPACING_CM),
        value_range=value_range)


def write_bscan(img, path, bits=16):
    """
    Write ``img`` as PGM (``bits`` 8 or 16, big-endian) or CSV by the
    extension of ``path``, plus its sidecar.
    """
    ext = os.path.splitext(path)[1].lower()
    vmin, vmax = float(img.data.min()), float(img.data.max())
    if ext == ".pgm":
        if bits not in (8, 16):
            raise ParameterError("PGM depth must be 8 or 16 bits")
        maxval = 255 if bits == 8 else 65535
        if vmax > vmin:
            levels = np.rint((img.data - vmin) / (vmax - vmin) * maxval)
        else:
            levels = np.zeros(img.shape)
        dtype = ">u2" if bits == 16 else "u1"
        with io.open(path, "wb") as fo:
            fo.write(("P5\n%d %d\n%d\n" % (img.cols, img.rows, maxval)).encode("ascii"))
            fo.write(levels.astype(dtype).tobytes())
    elif ext == ".csv":
        with io.open(path, "w", encoding="utf-8") as fo:
            for row in img.data:
                fo.write(",".join(_fmt(v) for v in row))
                fo.write("\n")
    else:
        raise ParameterError(
            "'%s': unknown B-scan format (expected .pgm or .csv)" % path)
    with io.open(sidecar_path(path), "w", encoding="utf-8") as fo:
        fo.write(json.dumps(
            {"col_spacing_cm": img.col_spacing_cm, "vmin": vmin, "vmax": vmax},
            indent=1, sort_keys=True))


# ================================================================
#
# Ground truth
#
def read_ground_truth(path):
    """List of ((start_col, end_col), kind)."""
    result = []
    for n, row in enumerate(_read_csv_rows(path)):
        if not row or row[0].startswith("#") or (n == 0 and row[0] == "start_col"):
            continue
        try:
            start, end, kind = int(row[0]), int(row[1]), row[2]
        except (IndexError, ValueError):
            raise InputDataError("'%s' line %d: expected start_col,end_col,kind" % (
                path, n + 1))
        if not start < end:
            raise InputDataError("'%s' line %d: empty span" % (path, n + 1))
        result.append(((start, end), kind))
    return result


def write_ground_truth(ground_truth, path):
    with _open_csv_for_write(path) as fo:
        w = csv.writer(fo, lineterminator="\n")
        w.writerow(["start_col", "end_col", "kind"])
        for (start, end), kind in ground_truth:
            w.writerow([start, end, kind])


# ================================================================
#
# Model space
#
_FP_LINE = re.compile(r"^#\s*fingerprint=(\S*)\s+n_units=(\d+)")


def write_model_space(space, path):
    n = space.n_units or 0
    with _open_csv_for_write(path) as fo:
        fo.write("# fingerprint=%s n_units=%d\n" % (
            space.reservoir_fingerprint or "", n))
        w = csv.writer(fo, lineterminator="\n")
        w.writerow(["phi_%d" % i for i in range(2 * n + 1)]
                   + ["label", "start_col", "end_col"])
        for p in space:
            span = p.window_span or ("", "")
            w.writerow([_fmt(v) for v in p.phi]
                       + [_label_cell(p.label), span[0], span[1]])


def read_model_space(path):
    rows = _read_csv_rows(path)
    m = _FP_LINE.match(",".join(rows[0])) if rows else None
    if m is None:
        raise InputDataError(
            "'%s' does not start with '# fingerprint=... n_units=...'" % path)
    fingerprint = m.group(1) or None
    n = int(m.group(2))
    width = 2 * n + 1
    points = []
    for k, row in enumerate(rows[2:]):
        if not row:
            continue
        if len(row) != width + 3:
            raise InputDataError("'%s' line %d: expected %d fields" % (
                path, k + 3, width + 3))
        try:
            phi = [float(v) for v in row[:width]]
            span = None
            if row[width + 1] != "":
                span = (int(row[width + 1]), int(row[width + 2]))
        except ValueError:
            raise InputDataError("'%s' line %d: malformed number" % (path, k + 3))
        label = row[width] if row[width] != "" else None
        points.append(ModelVector(phi, label, span, fingerprint))
    return ModelSpace(points, n_units=n, reservoir_fingerprint=fingerprint)


def write_projection(coords, labels, path):
    coords = np.atleast_2d(coords)
    with _open_csv_for_write(path) as fo:
        w = csv.writer(fo, lineterminator="\n")
        w.writerow(["pc_%d" % (i + 1) for i in range(coords.shape[1])] + ["label"])
        for c, l in zip(coords, labels):
            w.writerow([_fmt(v) for v in c] + [_label_cell(l)])


# ================================================================
#
# Reports
#
_REGION_HEADER = ["start_col", "end_col", "start_cm", "end_cm",
                  "label", "support", "mean_score"]


def write_regions(regions, col_spacing_cm, path):
    with _open_csv_for_write(path) as fo:
        w = csv.writer(fo, lineterminator="\n")
        w.writerow(_REGION_HEADER)
        for r in regions:
            w.writerow([r.start_col, r.end_col,
                        _fmt(r.start_cm(col_spacing_cm)),
                        _fmt(r.end_cm(col_spacing_cm)),
                        r.label, r.support, _fmt(r.mean_score)])


def read_regions(path):
    result = []
    for n, row in enumerate(_read_csv_rows(path)):
        if n == 0 or not row:
            continue
        try:
            result.append(AnomalyRegion(
                int(row[0]), int(row[1]), row[4], int(row[5]), float(row[6])))
        except (IndexError, ValueError):
            raise InputDataError("'%s' line %d: malformed region" % (path, n + 1))
    return result


def write_windows(windows, path):
    """``windows``: (start_col, end_col, label, score) per window."""
    with _open_csv_for_write(path) as fo:
        w = csv.writer(fo, lineterminator="\n")
        w.writerow(["start_col", "end_col", "label", "score"])
        for start, end, label, score in windows:
            w.writerow([start, end, label, _fmt(score)])


def read_windows(path):
    result = []
    for n, row in enumerate(_read_csv_rows(path)):
        if n == 0 or not row:
            continue
        try:
            result.append((int(row[0]), int(row[1]), row[2], float(row[3])))
        except (IndexError, ValueError):
            raise InputDataError("'%s' line %d: malformed window" % (path, n + 1))
    return result
