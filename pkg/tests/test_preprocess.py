# -*- coding: utf-8 -*-
import numpy as np
import pytest

from diagnose_gpr_by_model_space.pipeline_params import GainParams, PreprocessParams
from diagnose_gpr_by_model_space.preprocess import (
    BScanImage,
    DEFAULT_COL_SPACING_CM,
    apply_gain,
    gain_curve,
    median_filter,
    normalize,
    preprocess,
    remove_background)
from diagnose_gpr_by_model_space.utils import InputDataError, ParameterError


@pytest.fixture
def img():
    rng = np.random.default_rng(1)
    return BScanImage(rng.normal(size=(12, 30)) + np.arange(12)[:, np.newaxis])


class TestBScanImage(object):
    def test_defaults(self, img):
        assert img.shape == (12, 30)
        assert img.col_spacing_cm == DEFAULT_COL_SPACING_CM

    def test_read_only(self, img):
        with pytest.raises(ValueError):
            img.data[0, 0] = 1.0

    @pytest.mark.parametrize("data", [
        [[1.0, 2.0]],
        [[1.0, np.nan], [1.0, 2.0]],
        np.zeros((2, 2, 2)),
        ])
    def test_invalid(self, data):
        with pytest.raises(InputDataError):
            BScanImage(data)

    def test_window(self, img):
        w = img.window(5, 10)
        assert w.shape == (12, 10)
        assert np.array_equal(w.data, img.data[:, 5:15])
        with pytest.raises(InputDataError):
            img.window(25, 10)


class TestSteps(object):
    def test_background_removed(self, img):
        out = remove_background(img)
        assert np.allclose(out.data.mean(axis=1), 0.0)

    def test_flat_layer_vanishes(self):
        data = np.zeros((5, 8))
        data[2, :] = 3.0
        assert np.allclose(remove_background(BScanImage(data)).data, 0.0)

    def test_background_removal_idempotent(self, img):
        once = remove_background(img).data
        assert np.allclose(remove_background(BScanImage(once)).data, once)

    def test_median_within_input_range(self, img):
        out = median_filter(img, 5).data
        assert out.min() >= img.data.min()
        assert out.max() <= img.data.max()

    def test_median_removes_impulse_keeps_edges(self):
        data = np.zeros((7, 7))
        data[:, 4:] = 1.0
        data[2, 1] = 50.0
        out = median_filter(BScanImage(data), 3).data
        assert out[2, 1] == 0.0
        assert np.array_equal(out[:, 5:], np.ones((7, 2)))

    def test_median_bad_size(self, img):
        with pytest.raises(ParameterError):
            median_filter(img, 2)
        with pytest.raises(ParameterError):
            median_filter(img, 13)

    def test_gain_monotone_and_clamped(self):
        g = gain_curve(50, GainParams(linear_coeff=2.0, exp_coeff=3.0, max_gain=10.0))
        assert g[0] == 1.0
        assert np.all(np.diff(g) >= 0)
        assert g.max() == 10.0

    def test_apply_gain(self):
        img = BScanImage(np.ones((3, 4)))
        out = apply_gain(img, GainParams(linear_coeff=1.0, exp_coeff=0.0))
        assert np.allclose(out.data[:, 0], [1.0, 1.5, 2.0])

    def test_unit_max_gain_is_identity(self, img):
        out = apply_gain(img, GainParams(linear_coeff=3.0, exp_coeff=2.0, max_gain=1.0))
        assert np.array_equal(out.data, img.data)

    def test_normalize(self, img):
        out = normalize(img)
        assert out.data.min() == -1.0
        assert out.data.max() == 1.0
        assert np.array_equal(normalize(BScanImage(np.ones((3, 3)))).data,
                              np.zeros((3, 3)))


class TestPreprocess(object):
    def test_all_steps_in_range(self, img):
        out = preprocess(img)
        assert out.shape == img.shape
        assert out.data.min() >= -1.0 and out.data.max() <= 1.0
        assert out.col_spacing_cm == img.col_spacing_cm

    def test_all_disabled_is_identity(self, img):
        p = PreprocessParams(remove_background=False, median_filter=False,
                             apply_gain=False, normalize=False)
        assert np.array_equal(preprocess(img, p).data, img.data)

    def test_order_matters(self, img):
        a = PreprocessParams(median_filter=False, order=[
            "normalize", "remove_background", "median_filter", "apply_gain"])
        b = PreprocessParams(median_filter=False)
        assert not np.allclose(preprocess(img, a).data, preprocess(img, b).data)
