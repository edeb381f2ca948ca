"""Shared fixtures"""

from __future__ import annotations

import os
import tempfile

# Route run history and outputs away from the working directory before fleetsim reads its settings
_TMP = tempfile.mkdtemp(prefix="fleetsim-tests-")
os.environ.setdefault("FLEETSIM_DATABASE_URL", f"sqlite:///{_TMP}/runs.db")
os.environ.setdefault("FLEETSIM_OUTPUT_DIR", os.path.join(_TMP, "runs"))

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from fleetsim.dynamics.graph_topology import Topology, build_topology  # noqa: E402
from fleetsim.dynamics.vessel_model import REFERENCE_PARAMS, PhysicalParams, theta_from_physical  # noqa: E402
from fleetsim.scenarios.builtin import load_config  # noqa: E402

CHAIN_EDGES = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def reference_params() -> PhysicalParams:
    return REFERENCE_PARAMS


@pytest.fixture
def theta_star() -> np.ndarray:
    return theta_from_physical(REFERENCE_PARAMS)


@pytest.fixture
def chain_topology() -> Topology:
    """Four-vessel chain with unit weights, every vessel sees the reference"""
    return build_topology(CHAIN_EDGES, [1.0, 1.0, 1.0, 1.0], 4)


@pytest.fixture
def scenario1_blc():
    return load_config("scenario1-blc")
