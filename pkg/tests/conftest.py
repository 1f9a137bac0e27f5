"""Shared fixtures.

Scenario runs are expensive, so they are memoized per session: acceptance
tests that probe different aspects of the same scenario share one run, and
the determinism test asks for a second run under a distinct tag.
"""

import time

import pytest

from fluxgauge.config import ExperimentConfig
from fluxgauge.scenarios import run


@pytest.fixture(scope="session")
def scenario_run(tmp_path_factory):
    cache = {}

    def _run(name, overrides=None, tag="base"):
        key = (name, tag)
        if key not in cache:
            out = tmp_path_factory.mktemp(f"{name}-{tag}")
            data = {"scenario": name, "seed": 0, "out_dir": str(out)}
            data.update(overrides or {})
            cfg = ExperimentConfig.from_dict(data)
            t0 = time.perf_counter()
            report, paths = run(cfg)
            wall = time.perf_counter() - t0
            cache[key] = (report, paths, wall, out)
        return cache[key]

    return _run
