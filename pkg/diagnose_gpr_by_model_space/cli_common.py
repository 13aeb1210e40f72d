# -*- coding: utf-8 -*-
#
"""
This module contains helpers for realizing common parts
in the CLI provided by this package
"""
from __future__ import unicode_literals
from __future__ import absolute_import

import sys
import argparse
import textwrap
import logging

from .pipeline_params import PipelineConfig
from . import _cache
from .utils import ParameterError, json_load


__all__ = [
    "logger_config",
    "GprArgumentParser",
    "build_config",
    ]

_logger = logging.getLogger(__name__)


# ##################################
#
# logging
#
def logger_config(level=logging.INFO):
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(created)f|%(levelname)5s:%(module)s#%(funcName)s:%(message)s")


# ##################################
#
# argparse
#

# ----------------------
#
# create ArgumentParser and add common options
#
class GprArgumentParser(argparse.ArgumentParser):
    def __init__(self, description="", **kwargs):
        kwargs.setdefault("formatter_class", argparse.RawDescriptionHelpFormatter)
        argparse.ArgumentParser.__init__(
            self, description=textwrap.dedent(description), **kwargs)

    def error(self, message):
        sys.stderr.write("E_ARGS: %s\n" % message.replace("\n", " "))
        sys.exit(ParameterError.exit_code)

    def add_common_arguments(self):
        self.add_argument(
            "--config",
            type=str,
            help="""\
Pipeline configuration as a JSON file (C-style comments allowed). Its layout
is as follows, every section and key optional:

%s""" % PipelineConfig.__doc__)
        self.add_argument(
            "--seed", type=int,
            help="Seed of the reservoir weights (overrides reservoir.seed).")
        self.add_argument(
            "--threads", type=int,
            help="Number of window fitting workers; 0 uses every core.")
        self.add_argument(
            "-o", "--out", dest="out",
            help="Output file or directory of the subcommand.")
        self.add_argument(
            "--clear_cache",
            action="store_true",
            help='''Normally, fitted model spaces are stored in the cache ("%s")
and reused. If you want to clear the cache for some reason, specify this.''' % (
                _cache.cache_root_dir))
        self.add_argument(
            "--no_cache", action="store_true",
            help="Neither read nor write the cache.")
        self.add_argument(
            "-v", "--verbose", action="store_true",
            help="Log debug messages.")
        self.add_argument(
            "-q", "--quiet", action="store_true",
            help="Log warnings and errors only, no progress bar.")

    # ----------------------
    #
    # interpret common options
    #
    def parse_args(self, args=None, namespace=None):
        args = argparse.ArgumentParser.parse_args(self, args, namespace)
        if getattr(args, "verbose", False):
            args.log_level = logging.DEBUG
        elif getattr(args, "quiet", False):
            args.log_level = logging.WARNING
        else:
            args.log_level = logging.INFO
        return args


def build_config(args, overrides=None):
    """
    PipelineConfig from defaults < ``--config`` file < flags. Flags are
    the common ones of ``args`` plus ``overrides``, a dict of
    (section, key) -> value with section None for top level keys. A
    value None means "not given".
    """
    d = {}
    if getattr(args, "config", None):
        d = json_load(args.config)
        if not isinstance(d, dict):
            raise ParameterError("'%s' must hold a JSON object" % args.config)
    flags = {("reservoir", "seed"): getattr(args, "seed", None),
             (None, "threads"): getattr(args, "threads", None)}
    flags.update(overrides or {})
    for (section, key), v in sorted(flags.items(), key=lambda kv: (kv[0][0] or "", kv[0][1])):
        if v is None:
            continue
        if section is None:
            d[key] = v
        else:
            d[section] = dict(d.get(section) or {}, **{key: v})
    return PipelineConfig.from_dict(d, "config")


if __name__ == '__main__':
    import doctest
    doctest.testmod()
