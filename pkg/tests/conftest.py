import json
import os

# Serial workers in tests; must be set before sdr.core.config is imported
os.environ.setdefault("SDR_THREADS", "1")

import numpy as np
import pytest

from sdr.models.domain import Dataset, GroupSpec, Problem
from sdr.models.schemas import ReferenceSolution


def pytest_collection_modifyitems(config, items):
    if os.getenv("SDR_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set SDR_RUN_SLOW=1 to run acceptance experiments")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def toy_problem():
    """One sample xi=(2, 1), eta=+1, groups {0} and {1}; argmin is (0.5, 0) with value 0.5"""
    data = Dataset(np.array([[2.0, 1.0]]), np.array([1]))
    return Problem(data, GroupSpec.from_lists([[0], [1]], 2))


@pytest.fixture
def toy_reference():
    return ReferenceSolution(point=[0.5, 0.0], objective=0.5, method="closed-form", residual=0.0)


@pytest.fixture
def small_config_dict():
    return {
        "dimension": 4,
        "group_count": 2,
        "group_size": 3,
        "group_overlap": 1,
        "active_groups": 1,
        "sample_count": 12,
        "n_iters": 200,
        "n_seeds": 2,
        "record_every": 50,
        "gamma": 0.1,
        "gammas": [0.5, 0.05],
    }


@pytest.fixture
def config_file(tmp_path, small_config_dict):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(small_config_dict), encoding="utf-8")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(0)
