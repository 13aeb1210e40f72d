# -*- coding: utf-8 -*-
import math

import numpy as np
import pytest

from diagnose_gpr_by_model_space.model_space import (
    ModelSpace,
    ModelVector,
    embed,
    model_distance,
    monte_carlo_distance,
    pairwise_distances,
    pca_project,
    silhouette_scores,
    sqrt_model_distance)
from diagnose_gpr_by_model_space.reservoir import FittedModel, fit_window
from diagnose_gpr_by_model_space.utils import InputDataError, ParameterError


def _random_vector(rng, n_units=4, **kwargs):
    return ModelVector(rng.normal(size=2 * n_units + 1), **kwargs)


class TestModelVector(object):
    def test_embed_scales_readout(self):
        m = FittedModel([3.0, 0.0], [0.0, 1.0], 2.0)
        v = embed(m, window_span=(0, 10), label="x")
        assert np.allclose(v.phi, [3 / math.sqrt(3), 0, 0, 1 / math.sqrt(3), 2.0])
        assert np.allclose(v.readout, m.readout)
        assert v.bias == 2.0
        assert v.window_span == (0, 10)
        assert v.label == "x"

    @pytest.mark.parametrize("phi", [[1.0, 2.0], [1.0], [0.0, np.nan, 1.0]])
    def test_invalid(self, phi):
        with pytest.raises(InputDataError):
            ModelVector(phi)

    def test_with_label_keeps_rest(self):
        v = ModelVector([1, 2, 3], window_span=(4, 5), fingerprint="f")
        w = v.with_label("a")
        assert (w.label, w.window_span, w.fingerprint) == ("a", (4, 5), "f")
        assert v.label is None


class TestDistance(object):
    def test_metric_properties(self):
        rng = np.random.default_rng(0)
        a, b, c = [_random_vector(rng) for _ in range(3)]
        assert model_distance(a, a) == 0.0
        assert model_distance(a, b) == model_distance(b, a)
        assert sqrt_model_distance(a, c) <= \
            sqrt_model_distance(a, b) + sqrt_model_distance(b, c) + 1e-12

    def test_bias_only(self):
        assert model_distance(ModelVector([0, 0, 1]), ModelVector([0, 0, 3])) == 4.0

    def test_incomparable(self):
        with pytest.raises(InputDataError):
            model_distance(ModelVector([0, 0, 1]), ModelVector([0, 0, 0, 0, 1]))
        with pytest.raises(InputDataError):
            model_distance(ModelVector([0, 0, 1], fingerprint="a"),
                           ModelVector([0, 0, 1], fingerprint="b"))

    def test_monte_carlo_agrees(self):
        rng = np.random.default_rng(1)
        a, b = _random_vector(rng, 3), _random_vector(rng, 3)
        est = monte_carlo_distance(a, b, n_samples=200000)
        assert est == pytest.approx(model_distance(a, b), rel=0.02)

    def test_monte_carlo_deterministic(self):
        rng = np.random.default_rng(1)
        a, b = _random_vector(rng, 2), _random_vector(rng, 2)
        assert monte_carlo_distance(a, b, n_samples=5000, seed=3) == pytest.approx(
            monte_carlo_distance(a, b, n_samples=5000, seed=3, chunk=777), rel=1e-12)


class TestModelSpace(object):
    def test_mixed_reservoirs_rejected(self):
        with pytest.raises(InputDataError):
            ModelSpace([ModelVector([0, 0, 1], fingerprint="a"),
                        ModelVector([0, 0, 1], fingerprint="b")])

    def test_mixed_sizes_rejected(self):
        with pytest.raises(InputDataError):
            ModelSpace([ModelVector([0, 0, 1]), ModelVector([0, 0, 0, 0, 1])])

    def test_concat_and_labels(self):
        a = ModelSpace([ModelVector([0, 0, 1], "x", fingerprint="f")])
        b = ModelSpace([ModelVector([0, 0, 2], "y", fingerprint="f")])
        s = ModelSpace.concat([a, b])
        assert s.labels == ["x", "y"]
        assert s.reservoir_fingerprint == "f"
        assert s.with_labels(["p", "q"]).labels == ["p", "q"]
        with pytest.raises(InputDataError):
            s.with_labels(["p"])

    def test_pairwise_matches_direct(self):
        rng = np.random.default_rng(2)
        s = ModelSpace([_random_vector(rng) for _ in range(37)])
        d1 = pairwise_distances(s, threads=1, block_rows=5)
        d4 = pairwise_distances(s, threads=4, block_rows=5)
        assert np.array_equal(d1, d4)
        assert np.array_equal(d1, d1.T)
        assert d1[3, 17] == model_distance(s[3], s[17])
        assert np.all(np.diag(d1) == 0.0)

    def test_fitted_windows_of_one_reservoir(self, small_weights):
        rng = np.random.default_rng(3)
        pts = [embed(fit_window(small_weights, rng.normal(size=(6, 8))))
               for _ in range(3)]
        s = ModelSpace(pts)
        assert s.reservoir_fingerprint == small_weights.fingerprint
        assert s.n_units == small_weights.n_units


class TestPca(object):
    def test_planar_data(self):
        rng = np.random.default_rng(4)
        t = rng.normal(size=(50, 2))
        basis = np.zeros((2, 5))
        basis[0, 0] = basis[1, 3] = 1.0
        s = ModelSpace([ModelVector(p) for p in t.dot(basis) * [[3.0, 1, 1, 1, 1]]])
        proj = pca_project(s, dims=3)
        assert proj.coords.shape == (50, 3)
        assert proj.degenerate
        assert np.allclose(proj.coords[:, 2], 0.0)
        assert proj.explained_variance[0] >= proj.explained_variance[1] > 0

    def test_sign_convention_deterministic(self):
        rng = np.random.default_rng(5)
        s = ModelSpace([_random_vector(rng, 2) for _ in range(20)])
        a = pca_project(s, dims=2)
        b = pca_project(ModelSpace(list(s)), dims=2)
        assert np.array_equal(a.coords, b.coords)
        assert not a.degenerate

    def test_bad_dims(self):
        s = ModelSpace([ModelVector([0, 0, 1]), ModelVector([0, 0, 2])])
        with pytest.raises(ParameterError):
            pca_project(s, dims=4)
        with pytest.raises(ParameterError):
            pca_project(s, dims=3)


class TestSilhouette(object):
    def test_separated_groups(self, make_clusters):
        pts = make_clusters([[0, 0, 0], [10, 10, 10]], 10, 0.1)
        s = ModelSpace(pts)
        d = np.sqrt(pairwise_distances(s))
        assert np.all(silhouette_scores(d, s.labels) > 0.9)

    def test_one_group(self):
        d = np.zeros((3, 3))
        assert silhouette_scores(d, ["a"] * 3).tolist() == [0.0] * 3

    def test_singletons(self):
        d = np.array([[0, 1, 4], [1, 0, 4], [4, 4, 0]], dtype=float)
        assert silhouette_scores(d, ["a", "b", "c"]).tolist() == [0.0] * 3
        # "y" has a single point
        s = silhouette_scores(d, ["x", "x", "y"])
        assert s[2] == 0.0 and s[0] == pytest.approx(0.75)

    def test_shape_mismatch(self):
        with pytest.raises(ParameterError):
            silhouette_scores(np.zeros((2, 2)), ["a", "b", "c"])
