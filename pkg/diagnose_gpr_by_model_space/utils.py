# -*- coding: utf-8 -*-
#
"""
This module contains tiny extra helpers: the exception hierarchy,
JSON configuration loading and validation, and seeded random streams.
"""
from __future__ import unicode_literals
from __future__ import absolute_import

import os
import io
import re
import json
import hashlib
import logging

import numpy as np


__all__ = [
    "DiagnosisError",
    "ParameterError",
    "InputDataError",
    "NumericError",
    "check_and_decode_filenames",
    "json_load",
    "json_loads",
    "validate_type_one_by_template",
    "validate_dict_one_by_template",
    "splitmix64",
    "make_rng",
    "array_digest",
    ]

_logger = logging.getLogger(__name__)


# ================================================================
#
# Errors
#
class DiagnosisError(Exception):
    """
    Base of every error this package raises on purpose. The CLI
    prints ``code`` and the message on one line, then exits with
    ``exit_code``.
    """
    code = "E_FAILED"
    exit_code = 1


class ParameterError(DiagnosisError, ValueError):
    code = "E_ARGS"
    exit_code = 2


class InputDataError(DiagnosisError, ValueError):
    code = "E_DATA"
    exit_code = 3


class NumericError(DiagnosisError, ArithmeticError):
    code = "E_NUMERIC"
    exit_code = 4


def check_and_decode_filenames(files, min_num_files=0):
    """
    Return absolute paths of ``files``; raise InputDataError if any of
    them does not exist or there are fewer than ``min_num_files``.
    """
    result = list(map(os.path.abspath, files))
    nf_files = [path for path in result if not os.path.isfile(path)]
    if nf_files:
        for nf in nf_files:
            _logger.error("{}: No such file.".format(nf))
        raise InputDataError("No such file: {}".format(", ".join(nf_files)))
    if min_num_files and len(result) < min_num_files:
        raise InputDataError(
            "At least {} files are necessary.".format(min_num_files))
    return result


# ================================================================
#
# Configuration related
#
def json_loads(jsonsting):
    """
    ``json.loads`` which allows C-style comments.

    >>> json_loads('{"nu": /* tight */ 0.05, "note": "/* kept */"}') == {
    ...     "nu": 0.05, "note": "/* kept */"}
    True
    """
    _pat = re.compile(
        r'''/\*.*?\*/|"(?:\\.|[^\\"])*"''',
        re.DOTALL | re.MULTILINE)

    def _repl(m):
        s = m.group(0)
        if s.startswith("/"):
            return " "
        else:
            return s
    try:
        return json.loads(re.sub(_pat, _repl, jsonsting))
    except ValueError as e:
        raise ParameterError("malformed JSON: %s" % e)


def json_load(jsonfilename):
    try:
        raw = io.open(jsonfilename, encoding="utf-8").read()
    except (IOError, OSError) as e:
        raise InputDataError("cannot read '%s': %s" % (jsonfilename, e))
    return json_loads(raw)


# ---------------------------------------
#
# Validation helpers
#
def validate_type_one_by_template(
    chktrg, tmpl, depthstr="",
    size_min=1, size_max=-1):
    """
    >>> validate_type_one_by_template({"a": 1}, {})
    True
    >>> validate_type_one_by_template([], [{}], "windows")
    Traceback (most recent call last):
    ...
    diagnose_gpr_by_model_space.utils.ParameterError: The length of windows must be greater equal than 1
    """
    if type(chktrg) != type(tmpl):
        raise ParameterError("""%s must be %s""" % (
                depthstr, type(tmpl).__name__))
    if ((size_min > 0 and len(chktrg) < size_min) or (
            size_max > 0 and len(chktrg) > size_max)):
        if size_min > 0 and size_max <= 0:
            bs = "greater equal than %d" % size_min
        elif size_min <= 0 and size_max > 0:
            bs = "less equal than %d" % size_max
        elif size_min == size_max:
            bs = "%d" % (size_min)
        else:
            bs = "between %d and %d" % (size_min, size_max)
        raise ParameterError("""The length of %s must be %s""" % (
                depthstr, bs))
    return True


def validate_dict_one_by_template(
    chktrg, tmpl, mandkeys=[], depthstr="", not_empty=False):
    """
    >>> validate_dict_one_by_template({"nu": 0.1}, {"nu": 0.05, "k": 5})
    True
    >>> validate_dict_one_by_template({"mu": 0.1}, {"nu": 0.05}, depthstr="detector")
    Traceback (most recent call last):
    ...
    diagnose_gpr_by_model_space.utils.ParameterError: Unknown keys in detector: mu
    """
    validate_type_one_by_template(
        chktrg, tmpl, depthstr,
        size_min=1 if (not_empty or mandkeys) else 0)
    depthstr = "in %s" % depthstr if depthstr else ""
    for mk in mandkeys:
        if mk not in chktrg:
            raise ParameterError("""Missing key '%s' %s""" % (
                    mk, depthstr))
    allow_keys = tmpl.keys()
    unk = set(chktrg.keys()) - set(allow_keys)
    if unk:
        raise ParameterError("""Unknown keys %s: %s""" % (
                depthstr, ", ".join(sorted(unk))))
    return True


# ================================================================
#
# Seeded random streams
#
_MASK64 = (1 << 64) - 1


def splitmix64(x):
    """
    One step of the splitmix64 mixer; maps any integer to a 64-bit one.

    >>> splitmix64(7) == splitmix64(7 + (1 << 64))
    True
    >>> splitmix64(1) != splitmix64(2)
    True
    """
    z = (int(x) + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def make_rng(seed, *stream):
    """
    Return a numpy Generator seeded through splitmix64 from ``seed``
    and an optional path of substream ids (e.g. ``(seed, "w_in")`` or
    ``(seed, col)``), so independent parts of a computation never
    share a stream.
    """
    s = splitmix64(seed)
    for k in stream:
        if not isinstance(k, int):
            k = int(hashlib.md5(("%s" % k).encode("utf-8")).hexdigest()[:16], 16)
        s = splitmix64(s ^ (k & _MASK64))
    return np.random.Generator(np.random.PCG64(s))


def array_digest(*arrays, **extra):
    """
    md5 hex digest of the bytes of ``arrays`` and the repr of ``extra``.
    """
    d = hashlib.md5()
    for a in arrays:
        a = np.ascontiguousarray(a, dtype=np.float64)
        d.update(("%r" % (a.shape,)).encode("utf-8"))
        d.update(a.tobytes())
    for k in sorted(extra.keys()):
        d.update(("%s=%r" % (k, extra[k])).encode("utf-8"))
    return d.hexdigest()


if __name__ == '__main__':
    import doctest
    doctest.testmod()
