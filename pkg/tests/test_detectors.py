# -*- coding: utf-8 -*-
import numpy as np
import pytest

from diagnose_gpr_by_model_space.detectors import (
    IncrementalState,
    KnnModel,
    OcsvmModel,
    heldout_scores,
    incremental_diagnose,
    knn_classify,
    knn_predict,
    load_detector,
    median_gamma,
    ocsvm_classify,
    save_detector,
    train_knn,
    train_ocsvm)
from diagnose_gpr_by_model_space.model_space import ModelSpace, ModelVector
from diagnose_gpr_by_model_space.utils import InputDataError, ParameterError


def _blob(center, n, sd, seed):
    rng = np.random.default_rng(seed)
    center = np.asarray(center, dtype=float)
    return [ModelVector(center + rng.normal(0.0, sd, size=center.shape))
            for _ in range(n)]


def _axis(k, dist=6.0, dim=5):
    c = np.zeros(dim)
    c[k] = dist
    return c


def _dual_objective(model):
    sv = model.support_vectors
    d = ((sv[:, np.newaxis, :] - sv[np.newaxis, :, :]) ** 2).sum(axis=2)
    return 0.5 * model.alphas.dot(np.exp(-model.gamma * d)).dot(model.alphas)


def _grid_dual_min(q, bound, steps):
    """min 1/2 a'Qa over the simplex points with coordinates k / steps."""
    n = q.shape[0]
    coords = np.arange(steps + 1) / float(steps)
    grids = np.meshgrid(*([coords] * (n - 1)), indexing="ij")
    a = np.stack([g.ravel() for g in grids], axis=1)
    last = 1.0 - a.sum(axis=1)
    a = np.hstack([a, last[:, np.newaxis]])
    ok = (last >= -1e-12) & np.all(a <= bound + 1e-12, axis=1)
    a = a[ok]
    return float(np.min(0.5 * np.einsum("ki,ij,kj->k", a, q, a)))


class TestOcsvm(object):
    @pytest.mark.parametrize("n,nu,seed", [
        (3, 0.5, 0), (3, 0.9, 1), (4, 0.3, 2), (4, 0.5, 3), (4, 1.0, 4)])
    def test_dual_matches_grid(self, n, nu, seed):
        pts = _blob(np.zeros(3), n, 1.0, seed)
        x = ModelSpace(pts).phi_matrix()
        d = ((x[:, np.newaxis] - x[np.newaxis]) ** 2).sum(axis=2)
        # a flat kernel keeps the grid error of the oracle below 1e-3
        gamma = 0.05 / d.max()
        model = train_ocsvm(pts, nu=nu, gamma=gamma, tol=1e-8)
        oracle = _grid_dual_min(np.exp(-gamma * d), 1.0 / (nu * n), 120)
        smo = _dual_objective(model)
        assert smo <= oracle + 1e-6
        assert oracle - smo <= 1e-3

    def test_dual_feasible(self):
        pts = _blob(np.zeros(5), 30, 1.0, 7)
        model = train_ocsvm(pts, nu=0.2)
        assert model.alphas.sum() == pytest.approx(1.0)
        assert np.all(model.alphas > 0)
        assert np.all(model.alphas <= 1.0 / (0.2 * 30) + 1e-12)

    @pytest.mark.parametrize("nu", [0.05, 0.1, 0.25])
    def test_nu_property(self, nu):
        n = 40
        for seed in range(20):
            pts = _blob(np.zeros(5), n, 1.0, 100 + seed)
            model = train_ocsvm(pts, nu=nu)
            outliers = sum(not ocsvm_classify(model, p)[0] for p in pts)
            assert outliers / n <= nu + 2.0 / n
            assert len(model.alphas) / n >= nu - 2.0 / n

    def test_separates_far_points(self):
        pts = _blob(np.zeros(5), 30, 0.3, 8)
        model = train_ocsvm(pts)
        assert ocsvm_classify(model, ModelVector(np.zeros(5)))[0]
        inl, score = ocsvm_classify(model, ModelVector(_axis(0)))
        assert not inl and score < 0

    def test_degenerate_rho(self):
        pts = _blob(np.zeros(3), 6, 1.0, 9)
        model = train_ocsvm(pts, nu=1.0)
        assert model.degenerate
        assert np.allclose(model.alphas, 1.0 / 6)

    def test_parameter_errors(self):
        pts = _blob(np.zeros(3), 5, 1.0, 10)
        with pytest.raises(ParameterError):
            train_ocsvm(pts[:1])
        with pytest.raises(ParameterError):
            train_ocsvm(pts, nu=0.0)
        with pytest.raises(ParameterError):
            train_ocsvm(pts, gamma=-1.0)

    def test_median_gamma(self):
        pts = [ModelVector([0, 0, 0]), ModelVector([0, 0, 1]), ModelVector([0, 0, 3])]
        # squared distances 1, 9, 4
        assert median_gamma(pts) == pytest.approx(0.25)
        same = [ModelVector([1, 1, 1])] * 3
        assert median_gamma(same) == 1.0

    def test_other_reservoir_rejected(self):
        pts = [ModelVector(p.phi, fingerprint="a") for p in _blob(np.zeros(3), 5, 1.0, 11)]
        model = train_ocsvm(pts)
        assert model.fingerprint == "a"
        with pytest.raises(InputDataError):
            ocsvm_classify(model, ModelVector([0, 0, 0], fingerprint="b"))

    def test_calibrated_threshold(self):
        pts = _blob(np.zeros(5), 40, 0.3, 13)
        plain = train_ocsvm(pts)
        model = train_ocsvm(pts, calibration_folds=5)
        assert plain.threshold is None and plain.accept_threshold == -plain.tol
        assert np.array_equal(model.alphas, plain.alphas)
        assert model.rho == plain.rho
        assert -0.9 * model.rho <= model.accept_threshold <= -model.tol
        fresh = _blob(np.zeros(5), 200, 0.3, 14)
        calibrated = sum(ocsvm_classify(model, p)[0] for p in fresh)
        assert calibrated >= sum(ocsvm_classify(plain, p)[0] for p in fresh)
        assert calibrated >= 0.85 * len(fresh)
        assert not ocsvm_classify(model, ModelVector(_axis(0)))[0]

    def test_heldout_windows_share_no_columns(self):
        pts = _blob(np.zeros(3), 6, 1.0, 15)
        apart = [ModelVector(p.phi, window_span=(100 * i, 100 * i + 50))
                 for i, p in enumerate(pts)]
        assert len(heldout_scores(apart, 0.5, 1.0, folds=3)) == 6
        stacked = [ModelVector(p.phi, window_span=(0, 50)) for p in pts]
        assert heldout_scores(stacked, 0.5, 1.0, folds=3) == []

    def test_calibration_folds(self):
        pts = _blob(np.zeros(3), 5, 1.0, 16)
        with pytest.raises(ParameterError):
            train_ocsvm(pts, calibration_folds=1)
        with pytest.raises(ParameterError):
            heldout_scores(pts, 0.5, 1.0, folds=6)

    def test_save_load(self, tmp_path):
        pts = _blob(np.zeros(5), 20, 1.0, 12)
        model = train_ocsvm(pts, nu=0.1, calibration_folds=4)
        path = str(tmp_path / "ocsvm.json")
        save_detector(model, path)
        back = load_detector(path)
        assert isinstance(back, OcsvmModel)
        assert back.accept_threshold == model.accept_threshold
        q = np.random.default_rng(0).normal(size=(5, 5))
        assert np.array_equal(back.decision_function(q),
                              model.decision_function(q))


@pytest.fixture
def base():
    return train_ocsvm(_blob(np.zeros(5), 40, 0.3, 20))


class TestIncremental(object):
    def test_normal_points(self, base):
        stream = _blob(np.zeros(5), 10, 0.05, 21)
        labels, scores, state = incremental_diagnose(stream, base)
        assert labels == ["normal"] * 10
        assert all(s >= -base.tol for s in scores)
        assert state.classifiers == []
        assert state.n_seen == 10

    def test_spawn_relabels_pool(self, base):
        stream = (_blob(np.zeros(5), 5, 0.05, 22)
                  + _blob(_axis(0), 10, 0.3, 23)
                  + _blob(_axis(0), 10, 0.05, 24))
        labels, scores, state = incremental_diagnose(
            stream, base, IncrementalState(min_pool=10))
        assert labels[:5] == ["normal"] * 5
        assert labels[5:] == ["anomaly-1"] * 20
        assert state.labels == ["anomaly-1"]
        assert state.pending == []
        assert sorted(state.claimed) == list(range(5, 15))

    def test_spawned_classes_calibrated(self, base):
        stream = _blob(_axis(0), 12, 0.3, 29)
        labels, _, state = incremental_diagnose(
            stream, base, IncrementalState(min_pool=12), calibration_folds=4)
        assert labels == ["anomaly-1"] * 12
        model = state.classifiers[0][1]
        assert model.threshold is not None
        assert model.accept_threshold <= -model.tol

    def test_pending_below_pool(self, base):
        stream = _blob(_axis(1), 4, 0.3, 25)
        labels, scores, state = incremental_diagnose(
            stream, base, IncrementalState(min_pool=5))
        assert labels == ["pending"] * 4
        assert len(state.pending) == 4
        # pending points carry the base score
        assert all(s < 0 for s in scores)

    def test_mixed_pool_splits_by_kind(self, base):
        a = _blob(_axis(0), 8, 0.3, 26)
        b = _blob(_axis(1), 8, 0.3, 27)
        stream = [p for pair in zip(a, b) for p in pair]
        labels, _, state = incremental_diagnose(
            stream, base, IncrementalState(min_pool=8))
        assert state.labels == ["anomaly-1", "anomaly-2"]
        assert labels[0::2] == ["anomaly-1"] * 8
        assert labels[1::2] == ["anomaly-2"] * 8

    def test_sliding_chain_is_one_group(self, base):
        # windows entering an anomaly: evenly spaced steps, then its interior
        chain = [ModelVector(_axis(0, dist)) for dist in (1.5, 3.0, 4.5)]
        stream = chain + _blob(_axis(0), 7, 0.05, 28)
        labels, _, state = incremental_diagnose(
            stream, base, IncrementalState(min_pool=10))
        assert state.labels == ["anomaly-1"]
        assert labels == ["anomaly-1"] * 10

    def test_three_kinds(self, base):
        stream = []
        for k in range(3):
            stream += _blob(np.zeros(5), 5, 0.05, 30 + k)
            stream += _blob(_axis(k + 1), 8, 0.3, 40 + k)
            stream += _blob(_axis(k + 1), 6, 0.05, 50 + k)
        labels, _, state = incremental_diagnose(
            stream, base, IncrementalState(min_pool=8))
        assert state.labels == ["anomaly-1", "anomaly-2", "anomaly-3"]
        for k in range(3):
            seg = labels[19 * k:19 * (k + 1)]
            assert seg[:5] == ["normal"] * 5
            assert seg[5:] == ["anomaly-%d" % (k + 1)] * 14

    def test_chunked_stream_same_result(self, base):
        stream = (_blob(_axis(0), 7, 0.3, 60) + _blob(np.zeros(5), 3, 0.05, 61)
                  + _blob(_axis(0), 5, 0.05, 62))
        whole, _, _ = incremental_diagnose(stream, base, IncrementalState(min_pool=6))
        state = IncrementalState(min_pool=6)
        parts = []
        for chunk in (stream[:4], stream[4:9], stream[9:]):
            labels, _, state = incremental_diagnose(chunk, base, state)
            parts += labels
        for pos, (label, _) in state.claimed.items():
            parts[pos] = label
        assert parts == whole

    def test_min_pool(self):
        with pytest.raises(ParameterError):
            IncrementalState(min_pool=1)


class TestKnn(object):
    def test_majority(self, make_clusters):
        pts = make_clusters([[0, 0, 0], [5, 5, 5]], 6, 0.2)
        model = train_knn(pts, k=3)
        assert model.classes == ["c0", "c1"]
        assert knn_classify(model, ModelVector([0.1, 0, 0])) == "c0"
        label, frac = knn_predict(model, ModelVector([4.9, 5, 5]))
        assert (label, frac) == ("c1", 1.0)

    def test_uniform_rescaling(self, make_clusters):
        pts = make_clusters([[0, 0, 0], [2, 2, 2], [0, 3, 0]], 5, 0.8, seed=3)
        queries = make_clusters([[1, 1, 1], [0, 1.5, 0]], 4, 1.0, seed=4)
        model = train_knn(pts, k=3)
        scaled = train_knn([ModelVector(7.5 * p.phi, p.label) for p in pts], k=3)
        for q in queries:
            assert (knn_predict(scaled, ModelVector(7.5 * q.phi))
                    == knn_predict(model, q))

    def test_tie_smaller_mean_distance(self):
        pts = [ModelVector([0, 0, 0], "far"), ModelVector([0, 0, 3], "near")]
        model = KnnModel(pts, k=2)
        assert knn_predict(model, ModelVector([0, 0, 2])) == ("near", 0.5)

    def test_tie_first_seen(self):
        pts = [ModelVector([0, 0, -1], "b"), ModelVector([0, 0, 1], "a")]
        model = KnnModel(pts, k=2)
        assert knn_classify(model, ModelVector([0, 0, 0])) == "b"

    def test_leave_one_out(self):
        pts = [ModelVector([0, 0, 0], "a"), ModelVector([0, 0, 0.1], "a"),
               ModelVector([0, 0, 5], "b")]
        model = KnnModel(pts, k=1)
        assert knn_classify(model, pts[0]) == "a"
        assert knn_classify(model, pts[2], exclude=2) == "a"

    def test_errors(self):
        with pytest.raises(ParameterError):
            KnnModel([ModelVector([0, 0, 0], "a")], k=2)
        with pytest.raises(InputDataError):
            KnnModel([ModelVector([0, 0, 0])], k=1)
        model = KnnModel([ModelVector([0, 0, 0], "a", fingerprint="x")], k=1)
        with pytest.raises(InputDataError):
            knn_classify(model, ModelVector([0, 0, 0], fingerprint="y"))

    def test_save_load(self, tmp_path, make_clusters):
        pts = make_clusters([[0, 0, 0], [5, 5, 5]], 4, 0.2)
        model = train_knn(pts, k=3)
        path = str(tmp_path / "knn.json")
        save_detector(model, path)
        back = load_detector(path)
        assert isinstance(back, KnnModel)
        assert back.k == 3 and back.classes == model.classes
        q = ModelVector([2.4, 2.6, 2.5])
        assert knn_predict(back, q) == knn_predict(model, q)

    def test_not_a_detector(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text('{"kind": "forest"}')
        with pytest.raises(InputDataError):
            load_detector(str(path))
