# -*- coding: utf-8 -*-
import numpy as np
import pytest

from diagnose_gpr_by_model_space import _cache
from diagnose_gpr_by_model_space.utils import (
    DiagnosisError,
    InputDataError,
    NumericError,
    ParameterError,
    array_digest,
    check_and_decode_filenames,
    json_load,
    json_loads,
    make_rng,
    validate_dict_one_by_template)


class TestErrors(object):
    def test_codes_and_exit_codes(self):
        assert (ParameterError.code, ParameterError.exit_code) == ("E_ARGS", 2)
        assert (InputDataError.code, InputDataError.exit_code) == ("E_DATA", 3)
        assert (NumericError.code, NumericError.exit_code) == ("E_NUMERIC", 4)

    def test_hierarchy(self):
        for cls in (ParameterError, InputDataError, NumericError):
            assert issubclass(cls, DiagnosisError)
        assert issubclass(ParameterError, ValueError)
        assert issubclass(NumericError, ArithmeticError)


class TestFiles(object):
    def test_missing_file(self, tmp_path):
        with pytest.raises(InputDataError):
            check_and_decode_filenames([str(tmp_path / "nope.pgm")])

    def test_too_few_files(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("1,2\n")
        with pytest.raises(InputDataError):
            check_and_decode_filenames([str(p)], min_num_files=2)
        assert check_and_decode_filenames([str(p)]) == [str(p)]


class TestJson(object):
    def test_comments_stripped_outside_strings(self):
        d = json_loads('{"a": 1, /* gone */ "b": "/* stays */"}')
        assert d == {"a": 1, "b": "/* stays */"}

    def test_malformed(self):
        with pytest.raises(ParameterError):
            json_loads("{nope")

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(InputDataError):
            json_load(str(tmp_path / "missing.json"))

    def test_unknown_keys(self):
        with pytest.raises(ParameterError) as e:
            validate_dict_one_by_template({"x": 1, "nu": 2}, {"nu": 0}, depthstr="d")
        assert "x" in str(e.value)


class TestRandomStreams(object):
    def test_same_stream_same_numbers(self):
        a = make_rng(5, "w_in").uniform(size=10)
        b = make_rng(5, "w_in").uniform(size=10)
        assert np.array_equal(a, b)

    def test_streams_independent(self):
        a = make_rng(5, "w_in").uniform(size=10)
        assert not np.array_equal(a, make_rng(5, "w_res_up").uniform(size=10))
        assert not np.array_equal(a, make_rng(6, "w_in").uniform(size=10))
        assert not np.array_equal(
            make_rng(5, "noise", 1).uniform(size=10),
            make_rng(5, "noise", 2).uniform(size=10))

    def test_digest(self):
        x = np.arange(6.0).reshape(2, 3)
        assert array_digest(x) == array_digest(x.copy())
        assert array_digest(x) != array_digest(x.reshape(3, 2))
        assert array_digest(x, seed=1) != array_digest(x, seed=2)


class TestCache(object):
    def test_store_load_clean(self, cache_in_tmp):
        key = _cache.make_cache_key(a=1, b="x")
        assert _cache.load_model_space("f", key) is None
        phi = np.arange(6.0).reshape(2, 3)
        _cache.store_model_space("f", key, phi, [(0, 40), (10, 50)], [0.5, 0.25])
        got_phi, spans, seconds = _cache.load_model_space("f", key)
        assert np.array_equal(got_phi, phi)
        assert spans.tolist() == [[0, 40], [10, 50]]
        assert seconds.tolist() == [0.5, 0.25]
        _cache.clean("f")
        assert _cache.load_model_space("f", key) is None

    def test_key_order_independent(self):
        assert _cache.make_cache_key(a=1, b=2) == _cache.make_cache_key(b=2, a=1)
        assert _cache.make_cache_key(a=1) != _cache.make_cache_key(a=2)

    def test_broken_entry_dropped(self, cache_in_tmp):
        key = _cache.make_cache_key(a=1)
        _cache.store_model_space("f", key, np.zeros((1, 3)), [(0, 1)], [0.1])
        path = cache_in_tmp / "f" / (key + ".npz")
        path.write_bytes(b"")
        assert _cache.load_model_space("f", key) is None
        assert not path.exists()
