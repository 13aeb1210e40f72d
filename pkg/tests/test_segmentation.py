# -*- coding: utf-8 -*-
import numpy as np
import pytest

from diagnose_gpr_by_model_space.pipeline_params import WindowSpec
from diagnose_gpr_by_model_space.preprocess import BScanImage
from diagnose_gpr_by_model_space.segmentation import (
    AnomalyRegion,
    merge_regions,
    slide_windows,
    window_starts)
from diagnose_gpr_by_model_space.utils import InputDataError, ParameterError


class TestWindows(object):
    def test_default_layout(self):
        starts = window_starts(3000, WindowSpec(width_cols=300, stride_cols=20))
        assert starts[:3] == [0, 20, 40]
        assert starts[-1] == 2700
        assert len(starts) == 136

    def test_tail_anchor(self):
        starts = window_starts(335, WindowSpec(width_cols=300, stride_cols=20))
        assert starts == [0, 20, 35]

    def test_narrow_image(self):
        with pytest.raises(InputDataError):
            window_starts(299, WindowSpec(width_cols=300, stride_cols=20))

    def test_every_column_covered(self):
        window_spec = WindowSpec(width_cols=7, stride_cols=3)
        covered = np.zeros(50, dtype=bool)
        for s in window_starts(50, window_spec):
            covered[s:s + 7] = True
        assert covered.all()

    def test_slide_windows(self):
        img = BScanImage(np.arange(40.0).reshape(2, 20))
        wins = slide_windows(img, WindowSpec(width_cols=10, stride_cols=5))
        assert [s for s, _ in wins] == [0, 5, 10]
        assert np.array_equal(wins[1][1].data, img.data[:, 5:15])


class TestMerge(object):
    def test_overlapping_windows_merge(self):
        regions = merge_regions([(0, 300, "a", 1.0), (20, 300, "a", 3.0),
                                 (40, 300, "a", 2.0)])
        assert regions == [AnomalyRegion(0, 340, "a", 3, 2.0)]

    def test_skip_labels(self):
        assert merge_regions([(0, 10, "normal", 0.0), (10, 10, "pending", 0.0),
                              (20, 10, "train", 0.0)]) == []

    def test_gap(self):
        wins = [(0, 10, "a", 0.0), (15, 10, "a", 0.0)]
        assert len(merge_regions(wins)) == 2
        assert merge_regions(wins, gap_cols=5) == [AnomalyRegion(0, 25, "a", 2, 0.0)]

    def test_labels_merge_separately(self):
        wins = [(0, 10, "a", 0.0), (5, 10, "b", 0.0), (10, 10, "a", 0.0)]
        regions = merge_regions(wins)
        assert [(r.label, r.span) for r in regions] == [("a", (0, 20)), ("b", (5, 15))]

    def test_unsorted_input(self):
        wins = [(20, 10, "a", 1.0), (0, 10, "a", 1.0), (10, 10, "a", 1.0)]
        assert merge_regions(wins) == [AnomalyRegion(0, 30, "a", 3, 1.0)]

    def test_negative_gap(self):
        with pytest.raises(ParameterError):
            merge_regions([], gap_cols=-1)

    def test_region_positions(self):
        r = AnomalyRegion(100, 400, "a")
        assert r.start_cm(0.141) == pytest.approx(14.1)
        assert r.end_cm(0.141) == pytest.approx(56.4)
        with pytest.raises(InputDataError):
            AnomalyRegion(5, 5, "a")
