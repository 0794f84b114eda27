import math

import pytest

from sweeps.workers import resolve_threads, run_parallel
from utils.errors import ConfigError


class TestResolveThreads:
    def test_explicit(self, monkeypatch):
        monkeypatch.setenv("CASIMECH_THREADS", "8")
        assert resolve_threads(4) == 4

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("CASIMECH_THREADS", "3")
        assert resolve_threads() == 3

    def test_default(self, monkeypatch):
        monkeypatch.setenv("CASIMECH_THREADS", "")
        assert resolve_threads() == 1

    def test_not_an_integer(self, monkeypatch):
        monkeypatch.setenv("CASIMECH_THREADS", "many")
        with pytest.raises(ConfigError) as info:
            resolve_threads()
        assert info.value.field == "CASIMECH_THREADS"

    def test_at_least_one(self):
        with pytest.raises(ConfigError):
            resolve_threads(0)


class TestRunParallel:
    def test_serial(self):
        assert run_parallel(math.sqrt, [1.0, 4.0, 9.0]) == [1.0, 2.0, 3.0]

    def test_pool_keeps_order(self):
        """Results come back in input order for any worker count"""
        items = [float(i * i) for i in range(12)]
        assert run_parallel(math.sqrt, items, threads=3) == run_parallel(math.sqrt, items, threads=1)
