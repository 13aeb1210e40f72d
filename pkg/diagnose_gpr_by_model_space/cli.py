# -*- coding: utf-8 -*-
#
"""
Command line interface: one console script with subcommands

    generate, preprocess, fit, train-ocsvm, train-knn,
    diagnose, classify, project, evaluate

Every failure ends with one line "<CODE>: <message>" on stderr and
exit status 2 (E_ARGS), 3 (E_DATA) or 4 (E_NUMERIC).
"""
from __future__ import print_function
from __future__ import unicode_literals
from __future__ import absolute_import

import io
import os
import sys
import json
import logging

from . import cli_common
from . import bscan_io
from .utils import (
    DiagnosisError,
    InputDataError,
    ParameterError,
    check_and_decode_filenames,
    json_load)
from .preprocess import preprocess
from .reservoir import load_weights, save_weights
from .model_space import ModelSpace, pca_project
from .detectors import (
    KnnModel,
    OcsvmModel,
    knn_predict,
    load_detector,
    save_detector,
    train_knn)
from .diagnosis import BScanDiagnoser, train_base
from .synthgpr import ANOMALY_KINDS, SceneSpec, generate_bscan, road_scene
from .evaluation import (
    match_regions,
    window_scores,
    window_truth)


__all__ = [
    "main",
    ]

_logger = logging.getLogger(__name__)


def _is_model_space_csv(path):
    try:
        with io.open(path, encoding="utf-8", errors="replace") as fi:
            return fi.readline().lstrip().startswith("# fingerprint=")
    except (IOError, OSError) as e:
        raise InputDataError("cannot read '%s': %s" % (path, e))


def _input_path(args, config):
    path = getattr(args, "input", None) or config.input_path
    if not path:
        raise ParameterError("no input file given (argument or input_path of --config)")
    return check_and_decode_filenames([path])[0]


def _output_path(args, config, default_name, under=None):
    if args.out:
        return args.out
    base = getattr(config, under) if under else None
    if not base:
        return default_name
    if not os.path.isdir(base):
        os.makedirs(base)
    return os.path.join(base, default_name)


def _diagnoser(args, config):
    weights = None
    if getattr(args, "weights", None):
        weights = load_weights(args.weights)
    return BScanDiagnoser(
        config, weights=weights,
        use_cache=not args.no_cache,
        clear_cache=args.clear_cache,
        progress=not args.quiet and sys.stderr.isatty())


def _model_space_of(args, config, path):
    if _is_model_space_csv(path):
        return bscan_io.read_model_space(path)
    return _diagnoser(args, config).fit_model_space(bscan_io.read_bscan(path))[0]


# ================================================================
#
# subcommands
#
def _parse_anomaly(s):
    try:
        kind, c0, c1, intensity = s.split(":")
        return kind, (int(c0), int(c1)), float(intensity)
    except ValueError:
        raise ParameterError(
            "--anomaly takes KIND:START_COL:END_COL:INTENSITY, got %r" % s)


def cmd_generate(args, config):
    if args.scene:
        scene = SceneSpec.from_dict(json_load(args.scene), "scene")
    else:
        scene = road_scene(
            rows=args.rows, cols=args.cols,
            anomalies=[_parse_anomaly(a) for a in args.anomaly or []],
            seed=args.seed if args.seed is not None else 0,
            noise_sigma=args.noise_sigma, clutter=args.clutter)
    img, truth = generate_bscan(scene)
    out = _output_path(args, config, "scene.pgm")
    bscan_io.write_bscan(img, out, bits=args.bits)
    truth_path = args.ground_truth or os.path.splitext(out)[0] + "_truth.csv"
    bscan_io.write_ground_truth(truth, truth_path)
    print("wrote %s (%dx%d) and %s (%d anomalies)" % (
        out, img.rows, img.cols, truth_path, len(truth)))


def cmd_preprocess(args, config):
    img = bscan_io.read_bscan(_input_path(args, config))
    clean = preprocess(img, config.preprocess)
    out = _output_path(args, config, "preprocessed.csv")
    bscan_io.write_bscan(clean, out)
    print("wrote %s" % out)


def cmd_fit(args, config):
    path = _input_path(args, config)
    diag = _diagnoser(args, config)
    space, seconds = diag.fit_model_space(bscan_io.read_bscan(path))
    if args.ground_truth:
        truth = bscan_io.read_ground_truth(args.ground_truth)
        width = config.window.width_cols
        space = space.with_labels(
            window_truth([(p.window_span[0], width) for p in space], truth))
    out = _output_path(args, config, "model_space.csv", "model_dir")
    bscan_io.write_model_space(space, out)
    if args.save_weights:
        save_weights(diag.weights, args.save_weights)
    print("wrote %s (%d windows, %d units, reservoir %s)" % (
        out, len(space), space.n_units, space.reservoir_fingerprint))


def cmd_train_ocsvm(args, config):
    path = _input_path(args, config)
    space = _model_space_of(args, config, path)
    model = train_base(space, config.detector.normal_span, config.detector)
    out = _output_path(args, config, "ocsvm.json", "model_dir")
    save_detector(model, out)
    print("wrote %s (%d support vectors of %d, rho=%g%s)" % (
        out, len(model.alphas), model.n_train, model.rho,
        ", degenerate" if model.degenerate else ""))


def cmd_train_knn(args, config):
    spaces = []
    for path in check_and_decode_filenames(args.inputs, min_num_files=1):
        spaces.append(bscan_io.read_model_space(path))
    space = ModelSpace.concat(spaces)
    drop = set(args.drop_label or ["transition"])
    points = [p for p in space if p.label is not None and p.label not in drop]
    if not points:
        raise InputDataError("no labeled windows left to train on")
    model = train_knn(points, k=args.k or config.detector.k)
    out = _output_path(args, config, "knn.json", "model_dir")
    save_detector(model, out)
    print("wrote %s (%d windows of classes %s, k=%d)" % (
        out, len(points), ", ".join(model.classes), model.k))


def cmd_diagnose(args, config):
    path = _input_path(args, config)
    base = None
    if args.model:
        base = load_detector(args.model)
        if not isinstance(base, OcsvmModel):
            raise InputDataError("'%s' is not a one-class SVM" % args.model)
    elif config.detector.normal_span is None:
        raise ParameterError("diagnose needs --model or --normal_span")
    report = _diagnoser(args, config).diagnose(bscan_io.read_bscan(path), base)
    out = args.out or config.report_dir or "report"
    report.write(out)
    for r in report.regions:
        print("%s: columns [%d, %d) = %.1f .. %.1f cm, %d windows" % (
            r.label, r.start_col, r.end_col,
            r.start_cm(report.col_spacing_cm), r.end_cm(report.col_spacing_cm),
            r.support))
    if not report.regions:
        print("no anomaly found")
    t = report.timings()["per_window"]
    print("mean latency per window: %.4f s (%d windows)" % (t["mean"], t["count"]))
    print("report written to %s" % out)


def cmd_classify(args, config):
    model = load_detector(args.model)
    if not isinstance(model, KnnModel):
        raise InputDataError("'%s' is not a KNN model" % args.model)
    space = _model_space_of(args, config, _input_path(args, config))
    windows = []
    for p in space:
        label, frac = knn_predict(model, p)
        span = p.window_span or (-1, -1)
        windows.append((span[0], span[1], label, frac))
    out = _output_path(args, config, "classified.csv", "report_dir")
    bscan_io.write_windows(windows, out)
    print("wrote %s (%d windows)" % (out, len(windows)))


def cmd_project(args, config):
    space = bscan_io.read_model_space(_input_path(args, config))
    proj = pca_project(space, dims=args.dims)
    out = _output_path(args, config, "projection.csv", "report_dir")
    bscan_io.write_projection(proj.coords, space.labels, out)
    print("wrote %s (explained variance %s)" % (
        out, ", ".join("%.4g" % v for v in proj.explained_variance)))


def cmd_evaluate(args, config):
    report_dir = args.input or config.report_dir
    if not report_dir or not os.path.isdir(report_dir):
        raise InputDataError("'%s' is not a report directory" % report_dir)
    windows = bscan_io.read_windows(os.path.join(report_dir, "windows.csv"))
    regions = bscan_io.read_regions(os.path.join(report_dir, "regions.csv"))
    truth = bscan_io.read_ground_truth(args.ground_truth)
    wtruth = window_truth([(w[0], w[1] - w[0]) for w in windows], truth)
    predicted = [w[2] for w in windows]
    result = {
        "excluding_transitions": window_scores(predicted, wtruth, True),
        "including_transitions": window_scores(predicted, wtruth, False),
        "regions": [
            {"span": list(span), "kind": kind,
             "matches": [dict(r.to_dict(), iou=iou) for r, iou in hits]}
            for span, kind, hits in match_regions(regions, truth)],
        }
    text = json.dumps(result, indent=2, sort_keys=True)
    if args.out:
        with io.open(args.out, "w", encoding="utf-8") as fo:
            fo.write(text + "\n")
    print(text)


# ================================================================
#
# parser
#
def _make_parser():
    parser = cli_common.GprArgumentParser(description="""\
Diagnoses anomalies of GPR B-scans in the model space of a 2-direction
echo state network: every sliding window of the image is fitted by the
readout of one fixed random reservoir, and windows are compared and
classified by the distance of their readouts.
""")
    sub = parser.add_subparsers(
        dest="command", parser_class=cli_common.GprArgumentParser)
    sub.required = True

    def _add(name, func, help, input_help=None):
        p = sub.add_parser(name, help=help, description=help)
        p.add_common_arguments()
        if input_help:
            p.add_argument("input", nargs="?", help=input_help)
        p.set_defaults(func=func)
        return p

    p = _add("generate", cmd_generate, "Synthesize a road B-scan and its ground truth.")
    p.add_argument("--scene", help="SceneSpec as a JSON file; overrides the flags below.")
    p.add_argument("--rows", type=int, default=64)
    p.add_argument("--cols", type=int, default=2000)
    p.add_argument(
        "--anomaly", action="append",
        help="KIND:START_COL:END_COL:INTENSITY, KIND one of %s. Repeatable." % (
            ", ".join(ANOMALY_KINDS)))
    p.add_argument("--noise_sigma", type=float, default=0.05)
    p.add_argument("--clutter", type=float, default=0.1)
    p.add_argument("--bits", type=int, choices=[8, 16], default=16)
    p.add_argument("--ground_truth", help="Ground truth CSV (default: <out>_truth.csv).")

    _add("preprocess", cmd_preprocess,
         "Remove the background, filter, gain and normalize a B-scan.",
         "B-scan (.pgm or .csv)")

    p = _add("fit", cmd_fit, "Fit every window and write the model space CSV.",
             "B-scan (.pgm or .csv)")
    p.add_argument("--ground_truth", help="Label the windows from this ground truth CSV.")
    p.add_argument("--weights", help="Reservoir weights saved by --save_weights.")
    p.add_argument("--save_weights", help="Write the reservoir weights to this JSON file.")

    p = _add("train-ocsvm", cmd_train_ocsvm,
             "Train the base one-class SVM on a normal column span.",
             "B-scan or model space CSV")
    p.add_argument("--normal_span", type=int, nargs=2, metavar=("START_COL", "END_COL"))
    p.add_argument("--nu", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--weights", help="Reservoir weights saved by fit --save_weights.")

    p = _add("train-knn", cmd_train_knn,
             "Train a KNN classifier from labeled model space CSVs.")
    p.add_argument("inputs", nargs="+", help="Labeled model space CSVs.")
    p.add_argument("--k", type=int)
    p.add_argument("--drop_label", action="append",
                   help="Label not to train on (default: transition). Repeatable.")

    p = _add("diagnose", cmd_diagnose,
             "Diagnose a B-scan and write a report directory.",
             "B-scan (.pgm or .csv)")
    p.add_argument("--model", help="Base one-class SVM written by train-ocsvm.")
    p.add_argument("--normal_span", type=int, nargs=2, metavar=("START_COL", "END_COL"))
    p.add_argument("--nu", type=float)
    p.add_argument("--min_pool", type=int)
    p.add_argument("--merge_gap_cols", type=int)
    p.add_argument("--weights", help="Reservoir weights saved by fit --save_weights.")

    p = _add("classify", cmd_classify,
             "Classify the windows of a B-scan or model space with a KNN model.",
             "B-scan or model space CSV")
    p.add_argument("--model", required=True, help="KNN model written by train-knn.")
    p.add_argument("--weights", help="Reservoir weights saved by fit --save_weights.")

    p = _add("project", cmd_project,
             "Project a model space CSV onto its principal axes.",
             "model space CSV")
    p.add_argument("--dims", type=int, default=3)

    p = _add("evaluate", cmd_evaluate,
             "Score a report directory against a ground truth CSV.",
             "report directory")
    p.add_argument("--ground_truth", required=True)
    return parser


def _overrides(args):
    o = {}
    for section, key in (("detector", "nu"), ("detector", "gamma"),
                         ("detector", "min_pool")):
        o[(section, key)] = getattr(args, key, None)
    span = getattr(args, "normal_span", None)
    o[("detector", "normal_span")] = list(span) if span else None
    o[(None, "merge_gap_cols")] = getattr(args, "merge_gap_cols", None)
    return o


def main(args=sys.argv):
    parser = _make_parser()
    args = parser.parse_args(args[1:])
    cli_common.logger_config(args.log_level)
    try:
        config = cli_common.build_config(args, _overrides(args))
        args.func(args, config)
    except DiagnosisError as e:
        sys.stderr.write("%s: %s\n" % (e.code, e))
        sys.exit(e.exit_code)
    except (IOError, OSError) as e:
        sys.stderr.write("%s: %s\n" % (InputDataError.code, e))
        sys.exit(InputDataError.exit_code)
    return 0


if __name__ == "__main__":
    main()
