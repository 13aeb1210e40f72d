# -*- coding: utf-8 -*-
import pytest

from diagnose_gpr_by_model_space.pipeline_params import (
    PREPROCESS_STEPS,
    DetectorParams,
    GainParams,
    PipelineConfig,
    PreprocessParams,
    ReservoirConfig,
    WindowSpec)
from diagnose_gpr_by_model_space.utils import ParameterError


class TestDefaults(object):
    def test_window(self):
        w = WindowSpec()
        assert (w.width_cols, w.stride_cols) == (300, 20)

    def test_reservoir(self):
        c = ReservoirConfig()
        assert (c.n_units, c.alpha, c.ridge_lambda) == (50, 0.1, 1e-6)

    def test_detector(self):
        d = DetectorParams()
        assert (d.nu, d.gamma, d.min_pool, d.k) == (0.05, None, 15, 5)
        assert d.calibration_folds == 5

    def test_pipeline_ridge(self):
        assert PipelineConfig().reservoir.ridge_lambda == 1.0
        assert PipelineConfig(reservoir={"n_units": 10}).reservoir.ridge_lambda == 1.0
        given = PipelineConfig(reservoir={"ridge_lambda": 0.01})
        assert given.reservoir.ridge_lambda == 0.01


class TestValidation(object):
    @pytest.mark.parametrize("kwargs", [
        dict(width_cols=0),
        dict(width_cols=10, stride_cols=11),
        dict(stride_cols=0),
        ])
    def test_bad_window(self, kwargs):
        with pytest.raises(ParameterError):
            WindowSpec(**kwargs).validate()

    @pytest.mark.parametrize("kwargs", [
        dict(alpha=1.0),
        dict(alpha=0.0),
        dict(n_units=0),
        dict(density=0.0),
        dict(n_units=5, density=0.1),
        dict(ridge_lambda=-1.0),
        dict(seed=-1),
        ])
    def test_bad_reservoir(self, kwargs):
        with pytest.raises(ParameterError):
            ReservoirConfig(**kwargs).validate()

    @pytest.mark.parametrize("kwargs", [
        dict(nu=0.0),
        dict(nu=1.5),
        dict(gamma=-1.0),
        dict(min_pool=1),
        dict(normal_span=[10, 5]),
        dict(calibration_folds=1),
        dict(calibration_folds=-2),
        ])
    def test_bad_detector(self, kwargs):
        with pytest.raises(ParameterError):
            DetectorParams(**kwargs).validate()

    def test_bad_preprocess(self):
        with pytest.raises(ParameterError):
            PreprocessParams(order=["normalize"]).validate()
        with pytest.raises(ParameterError):
            PreprocessParams(median_k=4).validate()
        with pytest.raises(ParameterError):
            GainParams(max_gain=0.5).validate()

    def test_bad_pipeline(self):
        with pytest.raises(ParameterError):
            PipelineConfig(threads=-1).validate()
        with pytest.raises(ParameterError):
            PipelineConfig(merge_gap_cols=-1).validate()


class TestJson(object):
    def test_from_json_with_comments(self):
        c = PipelineConfig.from_json("""
        {
          /* short windows for a short road */
          "window": {"width_cols": 100, "stride_cols": 10},
          "detector": {"nu": 0.1, "normal_span": [0, 400]},
          "threads": 2
        }""")
        assert c.window.width_cols == 100
        assert c.detector.nu == 0.1
        assert c.detector.normal_span == [0, 400]
        assert c.reservoir.ridge_lambda == 1.0
        assert c.threads == 2

    def test_unknown_key(self):
        with pytest.raises(ParameterError):
            PipelineConfig.from_json('{"windows": {}}')
        with pytest.raises(ParameterError):
            PipelineConfig.from_json('{"window": {"width": 3}}')

    def test_json_round_trip(self):
        c = PipelineConfig(
            window={"width_cols": 50, "stride_cols": 5},
            preprocess={"gain": {"max_gain": 4.0}},
            merge_gap_cols=10)
        assert PipelineConfig.from_json(c.to_json()) == c

    def test_preprocess_order(self):
        p = PreprocessParams()
        assert tuple(p.order) == PREPROCESS_STEPS
        assert PreprocessParams.from_dict(p.to_dict()) == p
