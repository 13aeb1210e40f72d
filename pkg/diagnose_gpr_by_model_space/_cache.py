# -*- coding: utf-8 -*-
"""
On-disk store of fitted model spaces. One entry per (image, preprocessing,
window layout, reservoir) holds the phi matrix of the windows, their
column spans and the fit time of every window, as a numpy ``.npz``
archive.
"""
from __future__ import unicode_literals
from __future__ import absolute_import

import sys
import os
import hashlib
import shutil
import zipfile
import logging

import numpy as np

from . import __version__


_logger = logging.getLogger(__name__)

try:
    cache_root_dir
except NameError:
    pkgroot = "diagnose_gpr_by_model_space"
    if sys.platform == "win32":
        cache_root_dir = os.path.join(
            os.environ.get("LOCALAPPDATA", os.path.expanduser("~")),
            pkgroot, "%s" % __version__, "Cache")
    else:
        cache_root_dir = os.path.join(
            os.path.expanduser("~"),
            "." + pkgroot, "%s" % __version__, "Cache")

_SUFFIX = ".npz"


def make_cache_key(**for_cache_key):
    """
    md5 of the sorted ``name=repr(value)`` pairs.

    >>> make_cache_key(a=1, b="x") == make_cache_key(b="x", a=1)
    True
    """
    s = ",".join(["%s=%r" % (k, for_cache_key[k])
                  for k in sorted(for_cache_key.keys())])
    return hashlib.md5(s.encode("utf-8")).hexdigest()


def _entry_path(group, key):
    return os.path.join(cache_root_dir, group, key + _SUFFIX)


def clean(group):
    try:
        shutil.rmtree(os.path.join(cache_root_dir, group))
    except OSError:
        pass


def load_model_space(group, key):
    """
    Returns (phi matrix, spans as a (windows, 2) int array, seconds per
    window) or None when there is no usable entry.
    """
    fn = _entry_path(group, key)
    if not os.path.exists(fn):
        return None
    try:
        with np.load(fn, allow_pickle=False) as z:
            phi, spans, seconds = z["phi"], z["spans"], z["seconds"]
    except (OSError, EOFError, ValueError, KeyError, zipfile.BadZipFile):
        # half-written by an interrupted run
        _logger.warning("dropping broken cache entry %s", fn)
        os.remove(fn)
        return None
    if not (len(phi) == len(spans) == len(seconds)):
        _logger.warning("dropping inconsistent cache entry %s", fn)
        os.remove(fn)
        return None
    _logger.debug("cache hit %s (%d windows)", fn, len(phi))
    return phi, spans, seconds


def store_model_space(group, key, phi, spans, seconds):
    cd = os.path.join(cache_root_dir, group)
    if not os.path.exists(cd):
        os.makedirs(cd)
    fn = _entry_path(group, key)
    tmp_fn = fn + ".part"
    with open(tmp_fn, "wb") as fo:
        np.savez(
            fo,
            phi=np.asarray(phi, dtype=np.float64),
            spans=np.asarray(spans, dtype=np.int64).reshape(-1, 2),
            seconds=np.asarray(seconds, dtype=np.float64))
    os.replace(tmp_fn, fn)
