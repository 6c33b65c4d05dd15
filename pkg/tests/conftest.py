import time

import pytest

from weakmeas.scenarios import run_scenario

_CACHE = {}
_TIMING = {}


@pytest.fixture(scope="session")
def scenario_results():
    """Lazily computed scenario results shared across test modules."""

    def get(name, seed=20250809):
        key = (name, seed)
        if key not in _CACHE:
            t0 = time.perf_counter()
            _CACHE[key] = run_scenario(name, seed=seed)
            _TIMING[key] = time.perf_counter() - t0
        return _CACHE[key]

    get.timing = lambda name, seed=20250809: _TIMING[(name, seed)]
    return get
