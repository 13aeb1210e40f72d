# -*- coding: utf-8 -*-
#
"""
This module contains the two-direction echo state network (2D-ESN):
frozen random reservoir weights, the hidden-state iteration over the
pixel grid of a window, and the ridge-fitted readout predicting every
pixel from the states of its upper and left neighbors.

A minimal one-direction ESN running over the columns of a window is
kept as well; it exists to compare the readout size of both networks.
"""
from __future__ import unicode_literals
from __future__ import absolute_import
from __future__ import division

import io
import os
import json
import math
import logging

import numpy as np
import scipy.linalg

from .utils import (
    InputDataError,
    NumericError,
    ParameterError,
    array_digest,
    make_rng,
    json_load)
from .pipeline_params import ReservoirConfig


__all__ = [
    "ReservoirConfig",
    "ReservoirWeights",
    "HiddenGrid",
    "FittedModel",
    "BaselineEsnModel",
    "init_reservoir",
    "spectral_radius",
    "scale_to_radius",
    "run_grid",
    "design_matrix",
    "fit_readout",
    "fit_window",
    "fit_baseline_esn",
    "predict_baseline",
    "save_weights",
    "load_weights",
    ]

_logger = logging.getLogger(__name__)

_MAX_MASK_ATTEMPTS = 32


def _as_grid(window):
    data = getattr(window, "data", window)
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise InputDataError("a window must be two-dimensional")
    if not np.all(np.isfinite(data)):
        raise InputDataError("the window contains non-finite values")
    return data


def _readonly(a):
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


# ================================================================
#
# Weights
#
class ReservoirWeights(object):
    """
    One frozen 2D-ESN instance: the input weights w_in (N x 1) and the
    two reservoir matrices acting on the upper (w_res_up) and the left
    (w_res_left) neighbor state.
    """
    def __init__(self, w_in, w_res_up, w_res_left, config):
        self.w_in = _readonly(w_in).reshape(-1, 1)
        self.w_res_up = _readonly(w_res_up)
        self.w_res_left = _readonly(w_res_left)
        n = self.w_in.shape[0]
        if self.w_res_up.shape != (n, n) or self.w_res_left.shape != (n, n):
            raise InputDataError(
                "reservoir matrices must be %dx%d to match w_in" % (n, n))
        self.config = config
        self._fingerprint = None

    @property
    def n_units(self):
        return self.w_in.shape[0]

    @property
    def fingerprint(self):
        """
        md5 of the weights and the configuration; models fitted with
        different fingerprints are not comparable.
        """
        if self._fingerprint is None:
            self._fingerprint = array_digest(
                self.w_in, self.w_res_up, self.w_res_left,
                **self.config.to_dict())
        return self._fingerprint

    def __eq__(self, other):
        return isinstance(other, ReservoirWeights) and \
            self.fingerprint == other.fingerprint

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return "ReservoirWeights(n_units=%d, alpha=%g, seed=%d)" % (
            self.n_units, self.config.alpha, self.config.seed)


def spectral_radius(m, max_iter=1000, rtol=1e-6, min_iter=50):
    """
    Estimate max |eigenvalue| of the square matrix ``m`` by normalized
    power iteration. The estimate is the geometric mean of the per-step
    norm growth over the second half of the iterations, so a complex
    dominant pair (whose iterates rotate) is handled too.

    >>> round(spectral_radius(np.eye(3)), 6)
    1.0
    >>> round(spectral_radius(np.diag([2.0, 1.0])), 6)
    2.0
    >>> spectral_radius(np.zeros((4, 4)))
    0.0
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ParameterError("spectral_radius needs a square matrix")
    if not np.all(np.isfinite(m)):
        raise InputDataError("spectral_radius needs a finite matrix")
    n = m.shape[0]
    v = make_rng(0, "spectral_radius", n).uniform(-1.0, 1.0, size=n)
    v /= np.linalg.norm(v)
    prefix = [0.0]  # cumulative sums of log growth
    history = [0.0]  # estimate after every iteration
    for k in range(1, max_iter + 1):
        w = m.dot(v)
        g = np.linalg.norm(w)
        if g == 0.0:
            # the iterate fell into the null space: nilpotent part only
            return 0.0
        prefix.append(prefix[-1] + math.log(g))
        v = w / g
        half = k // 2
        new = math.exp((prefix[k] - prefix[half]) / (k - half))
        history.append(new)
        # compared with half as many iterations ago: an oscillating
        # estimate may repeat itself from one step to the next
        if k >= min_iter and abs(new - history[half]) <= rtol * new:
            return new
    return history[-1]


def scale_to_radius(m, alpha):
    """
    >>> scale_to_radius(np.diag([2.0, 1.0]), 0.5).round(6).tolist()
    [[0.5, 0.0], [0.0, 0.25]]
    """
    r = spectral_radius(m)
    if r == 0.0:
        raise NumericError(
            "cannot scale a matrix with spectral radius 0 to %g" % alpha)
    return np.asarray(m, dtype=np.float64) * (alpha / r)


def _sparse_reservoir(rng, config, name):
    n = config.n_units
    nnz = max(1, int(round(config.density * n * n)))
    for attempt in range(_MAX_MASK_ATTEMPTS):
        m = rng.uniform(-0.5, 0.5, size=n * n)
        mask = np.zeros(n * n, dtype=bool)
        mask[rng.choice(n * n, size=nnz, replace=False)] = True
        m = np.where(mask, m, 0.0).reshape(n, n)
        r = spectral_radius(m)
        if r > 0.0:
            return m * (config.alpha / r)
        _logger.warning(
            "%s: sparsity mask %d gives a nilpotent matrix, resampling",
            name, attempt)
    raise NumericError(
        "%s: no sparsity mask with nonzero spectral radius after %d attempts "
        "(raise density)" % (name, _MAX_MASK_ATTEMPTS))


def init_reservoir(config=None):
    """
    Draw the weights of one 2D-ESN. Every matrix has its own random
    stream derived from ``config.seed``; the same config always gives
    the same bytes.
    """
    if config is None:
        config = ReservoirConfig()
    config.validate()
    n = config.n_units
    w_in = make_rng(config.seed, "w_in").uniform(-0.5, 0.5, size=(n, 1))
    w_in *= config.input_scale
    w_up = _sparse_reservoir(
        make_rng(config.seed, "w_res_up"), config, "w_res_up")
    w_left = _sparse_reservoir(
        make_rng(config.seed, "w_res_left"), config, "w_res_left")
    return ReservoirWeights(w_in, w_up, w_left, config)


# ================================================================
#
# Grid iteration and readout
#
class HiddenGrid(object):
    """
    States h(i, j) of every pixel of a window, shape (rows, cols, N).
    """
    def __init__(self, states):
        self.states = _readonly(states)

    @property
    def rows(self):
        return self.states.shape[0]

    @property
    def cols(self):
        return self.states.shape[1]

    @property
    def n_units(self):
        return self.states.shape[2]


def run_grid(w, window, top=None, left=None):
    """
    h(i,j) = tanh(W_up h(i-1,j) + W_left h(i,j-1) + w_in x(i,j))

    ``top`` (cols x N) and ``left`` (rows x N) are the virtual states
    above the first row and left of the first column; both default to
    zero. Pixels on one anti-diagonal only depend on the previous one,
    so each anti-diagonal is computed in one step.

    >>> cfg = ReservoirConfig(n_units=2, density=1.0)
    >>> bool(np.all(run_grid(init_reservoir(cfg), np.zeros((3, 4))).states == 0))
    True
    """
    x = _as_grid(window)
    rows, cols = x.shape
    n = w.n_units
    h = np.zeros((rows + 1, cols + 1, n))
    if top is not None:
        h[0, 1:] = np.asarray(top, dtype=np.float64).reshape(cols, n)
    if left is not None:
        h[1:, 0] = np.asarray(left, dtype=np.float64).reshape(rows, n)
    drive = x[:, :, np.newaxis] * w.w_in[:, 0]
    up_t = w.w_res_up.T
    left_t = w.w_res_left.T
    for d in range(2, rows + cols + 1):
        ii = np.arange(max(1, d - cols), min(rows, d - 1) + 1)
        jj = d - ii
        h[ii, jj] = np.tanh(
            h[ii - 1, jj].dot(up_t) + h[ii, jj - 1].dot(left_t)
            + drive[ii - 1, jj - 1])
    return HiddenGrid(h[1:, 1:])


def design_matrix(grid, window):
    """
    Regression samples of a window: one row [h(i-1,j) | h(i,j-1) | 1]
    per pixel with a real upper and left neighbor, and the pixel values
    as targets.
    """
    x = _as_grid(window)
    rows, cols = x.shape
    if grid.states.shape[:2] != (rows, cols):
        raise InputDataError(
            "hidden grid %dx%d does not match the window %dx%d" % (
                grid.rows, grid.cols, rows, cols))
    if rows < 2 or cols < 2:
        raise InputDataError("a window needs rows >= 2 and cols >= 2")
    n = grid.n_units
    s = grid.states
    up = s[0:rows - 1, 1:cols].reshape(-1, n)
    lft = s[1:rows, 0:cols - 1].reshape(-1, n)
    features = np.hstack([up, lft, np.ones((up.shape[0], 1))])
    return features, x[1:, 1:].reshape(-1)


def _ridge_solve(features, targets, ridge_lambda):
    """
    Solve (F'F + lambda^2 D) W = F'Y where D is the identity with the
    entry of the trailing bias column zeroed.
    """
    n_samples, n_feat = features.shape
    if n_samples < n_feat:
        _logger.warning(
            "under-determined readout: %d samples for %d weights",
            n_samples, n_feat)
    a = features.T.dot(features)
    reg = np.full(n_feat, float(ridge_lambda) ** 2)
    reg[-1] = 0.0
    a[np.diag_indices(n_feat)] += reg
    b = features.T.dot(targets)
    try:
        c_and_lower = scipy.linalg.cho_factor(a)
        sol = scipy.linalg.cho_solve(c_and_lower, b)
    except scipy.linalg.LinAlgError:
        raise NumericError(
            "singular readout system at ridge_lambda=%g; use ridge_lambda > 0"
            % ridge_lambda)
    if not np.all(np.isfinite(sol)):
        raise NumericError(
            "readout diverged at ridge_lambda=%g; use a larger ridge_lambda"
            % ridge_lambda)
    return sol


def _nrmse(pred, target):
    rmse = float(np.sqrt(np.mean((pred - target) ** 2)))
    std = float(np.std(target))
    return rmse / std if std > 0 else rmse


class FittedModel(object):
    """
    Readout of one window: y(i,j) = w_out_up . h(i-1,j) + w_out_left . h(i,j-1) + bias.
    """
    def __init__(self, w_out_up, w_out_left, bias, train_nrmse=0.0,
                 window_id=None, fingerprint=None, alpha=None, seed=None):
        self.w_out_up = _readonly(w_out_up).reshape(-1)
        self.w_out_left = _readonly(w_out_left).reshape(-1)
        if self.w_out_up.shape != self.w_out_left.shape:
            raise InputDataError("w_out_up and w_out_left differ in length")
        self.bias = float(bias)
        self.train_nrmse = float(train_nrmse)
        if not (np.all(np.isfinite(self.w_out_up))
                and np.all(np.isfinite(self.w_out_left))
                and math.isfinite(self.bias)):
            raise NumericError("fitted readout is not finite")
        self.window_id = window_id
        self.fingerprint = fingerprint
        self.alpha = alpha
        self.seed = seed

    @property
    def n_units(self):
        return self.w_out_up.shape[0]

    @property
    def readout(self):
        """[w_out_up | w_out_left], length 2N."""
        return np.concatenate([self.w_out_up, self.w_out_left])

    @property
    def n_params(self):
        return 2 * self.n_units + 1

    def predict(self, grid):
        """Predictions for every pixel with i >= 2 and j >= 2, row-major."""
        s = grid.states
        return (s[:-1, 1:].dot(self.w_out_up) + s[1:, :-1].dot(self.w_out_left)
                + self.bias).reshape(-1)

    def to_dict(self):
        return {
            "n_units": self.n_units,
            "alpha": self.alpha,
            "seed": self.seed,
            "fingerprint": self.fingerprint,
            "window_id": self.window_id,
            "w_out_up": self.w_out_up.tolist(),
            "w_out_left": self.w_out_left.tolist(),
            "bias": self.bias,
            "train_nrmse": self.train_nrmse,
            }

    @staticmethod
    def from_dict(d):
        try:
            m = FittedModel(
                d["w_out_up"], d["w_out_left"], d["bias"],
                d.get("train_nrmse", 0.0), d.get("window_id"),
                d.get("fingerprint"), d.get("alpha"), d.get("seed"))
        except KeyError as e:
            raise InputDataError("fitted model without key %s" % e)
        if "n_units" in d and d["n_units"] != m.n_units:
            raise InputDataError(
                "n_units=%r but the readout has %d units" % (
                    d["n_units"], m.n_units))
        return m

    def __repr__(self):
        return "FittedModel(n_units=%d, bias=%g, train_nrmse=%g, window_id=%r)" % (
            self.n_units, self.bias, self.train_nrmse, self.window_id)


def fit_readout(grid, window, ridge_lambda):
    features, targets = design_matrix(grid, window)
    sol = _ridge_solve(features, targets, ridge_lambda)
    n = grid.n_units
    return FittedModel(
        sol[:n], sol[n:2 * n], sol[2 * n],
        train_nrmse=_nrmse(features.dot(sol), targets))


def fit_window(w, window, window_id=None):
    """
    Map one window into the model space: run the grid, fit the readout
    with ``w.config.ridge_lambda``.
    """
    grid = run_grid(w, window)
    m = fit_readout(grid, window, w.config.ridge_lambda)
    m.window_id = window_id
    m.fingerprint = w.fingerprint
    m.alpha = w.config.alpha
    m.seed = w.config.seed
    return m


# ================================================================
#
# One-direction baseline
#
class BaselineEsnModel(object):
    """
    Classic ESN over the columns of a window: h(n) = tanh(W h(n-1) + W_in x(n)),
    readout x(n+1) ~ w_out h(n) + bias with one output per row, so the
    readout has M x N weights and M biases.
    """
    def __init__(self, w_in, w_res, w_out, bias, config):
        self.w_in = _readonly(w_in)
        self.w_res = _readonly(w_res)
        self.w_out = _readonly(w_out)
        self.bias = _readonly(bias)
        self.config = config

    @property
    def n_params(self):
        return self.w_out.size + self.bias.size

    def run(self, columns):
        """
        Hidden states after each column of ``columns`` (cols x M), from h(0) = 0.
        """
        columns = np.asarray(columns, dtype=np.float64)
        h = np.zeros(self.w_res.shape[0])
        states = np.empty((columns.shape[0], h.shape[0]))
        for t, col in enumerate(columns):
            h = np.tanh(self.w_res.dot(h) + self.w_in.dot(col))
            states[t] = h
        return states


def fit_baseline_esn(window, config=None):
    if config is None:
        config = ReservoirConfig()
    config.validate()
    x = _as_grid(window)
    rows, cols = x.shape
    if cols < 2:
        raise InputDataError("the baseline ESN needs at least 2 columns")
    n = config.n_units
    w_in = make_rng(config.seed, "baseline_w_in").uniform(
        -0.5, 0.5, size=(n, rows)) * config.input_scale
    w_res = _sparse_reservoir(
        make_rng(config.seed, "baseline_w_res"), config, "baseline_w_res")
    model = BaselineEsnModel(
        w_in, w_res, np.zeros((rows, n)), np.zeros(rows), config)
    states = model.run(x.T)
    features = np.hstack([states[:-1], np.ones((cols - 1, 1))])
    sol = _ridge_solve(features, x.T[1:], config.ridge_lambda)
    return BaselineEsnModel(w_in, w_res, sol[:n].T, sol[n], config)


def predict_baseline(model, window):
    """
    Predicted column n+1 from the state after column n, for n = 1..cols-1;
    shape (cols - 1, M).
    """
    x = _as_grid(window)
    states = model.run(x.T)
    return states[:-1].dot(model.w_out.T) + model.bias


# ================================================================
#
# Persistence
#
def _array_to_json(a, path, name, blob_min_size):
    if blob_min_size is not None and a.size >= blob_min_size:
        blob = "%s.%s.f64" % (os.path.splitext(os.path.basename(path))[0], name)
        np.ascontiguousarray(a, dtype="<f8").tofile(
            os.path.join(os.path.dirname(os.path.abspath(path)), blob))
        return {"blob": blob, "shape": list(a.shape)}
    return a.tolist()


def _array_from_json(v, path):
    if isinstance(v, dict):
        fn = os.path.join(os.path.dirname(os.path.abspath(path)), v["blob"])
        try:
            a = np.fromfile(fn, dtype="<f8")
        except (IOError, OSError) as e:
            raise InputDataError("cannot read weight blob '%s': %s" % (fn, e))
        shape = tuple(v["shape"])
        if a.size != int(np.prod(shape)):
            raise InputDataError("weight blob '%s' has a wrong size" % fn)
        return a.reshape(shape).astype(np.float64)
    return np.asarray(v, dtype=np.float64)


def save_weights(w, path, blob_min_size=None):
    """
    Write ``w`` as JSON. Matrices with at least ``blob_min_size`` entries
    go to raw little-endian float64 files next to ``path``, referenced
    by name.
    """
    d = {
        "n_units": w.n_units,
        "alpha": w.config.alpha,
        "seed": w.config.seed,
        "config": w.config.to_dict(),
        "fingerprint": w.fingerprint,
        }
    for name in ("w_in", "w_res_up", "w_res_left"):
        d[name] = _array_to_json(getattr(w, name), path, name, blob_min_size)
    with io.open(path, "w", encoding="utf-8") as fo:
        fo.write(json.dumps(d, indent=1, sort_keys=True))


def load_weights(path):
    d = json_load(path)
    try:
        config = ReservoirConfig.from_dict(d["config"], "config")
        w = ReservoirWeights(
            _array_from_json(d["w_in"], path),
            _array_from_json(d["w_res_up"], path),
            _array_from_json(d["w_res_left"], path),
            config)
    except KeyError as e:
        raise InputDataError("'%s' lacks key %s" % (path, e))
    if d.get("fingerprint") not in (None, w.fingerprint):
        raise InputDataError("'%s': weights do not match their fingerprint" % path)
    return w


if __name__ == '__main__':
    import doctest
    doctest.testmod()
