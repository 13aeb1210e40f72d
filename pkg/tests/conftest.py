# -*- coding: utf-8 -*-
import numpy as np
import pytest

from diagnose_gpr_by_model_space import _cache
from diagnose_gpr_by_model_space.pipeline_params import (
    DetectorParams,
    PipelineConfig,
    ReservoirConfig,
    WindowSpec)
from diagnose_gpr_by_model_space.model_space import ModelVector
from diagnose_gpr_by_model_space.reservoir import init_reservoir


@pytest.fixture(autouse=True)
def cache_in_tmp(tmp_path, monkeypatch):
    monkeypatch.setattr(_cache, "cache_root_dir", str(tmp_path / "cache"))
    return tmp_path / "cache"


@pytest.fixture
def small_reservoir_config():
    return ReservoirConfig(n_units=8, alpha=0.5, density=0.5, seed=3)


@pytest.fixture
def small_weights(small_reservoir_config):
    return init_reservoir(small_reservoir_config)


@pytest.fixture
def small_pipeline():
    """Pipeline settings sized for images of a few hundred columns."""
    return PipelineConfig(
        window=WindowSpec(width_cols=40, stride_cols=10),
        reservoir=dict(n_units=10, alpha=0.1, density=0.3, seed=0),
        detector=DetectorParams(min_pool=5),
        threads=2)


def _clusters(centers, n_per, spread, seed=0):
    rng = np.random.default_rng(seed)
    points = []
    for c, center in enumerate(centers):
        center = np.asarray(center, dtype=float)
        for _ in range(n_per):
            points.append(ModelVector(
                center + rng.normal(0.0, spread, size=center.shape),
                label="c%d" % c))
    return points


@pytest.fixture
def make_clusters():
    """
    ModelVectors scattered around ``centers`` (2N+1 dimensional) with
    "c<index of the center>" as label.
    """
    return _clusters
