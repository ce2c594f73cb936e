"""
Shared fixtures: the backend package root on sys.path and the small models
the worked examples are stated on.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'backend'))

from logic.model.network import Market, NetworkModel, single_attribute_isp, uniform_path  # noqa: E402
from logic.model.specs import HomogeneousSpec, PathProfile  # noqa: E402
from logic.netgen.topologies import build_homogeneous, build_two_path_model  # noqa: E402


@pytest.fixture
def monopoly() -> NetworkModel:
    """One ISP alone on one path: alpha = 1, gamma = 1, rho = 1, d = 4; best response is 1."""
    return NetworkModel(
        isps=(single_attribute_isp("isp-0", rho=1.0, gamma=1.0),),
        attributes=("quality",),
        paths=(uniform_path("r", [0], 1.0),),
        markets=(Market("s", "t", 4.0, ("r",)),),
    )


@pytest.fixture
def unit_spec() -> HomogeneousSpec:
    return HomogeneousSpec(Q=1, I=1, alpha1=1.0, alpha0=0.0, phi1=0.0, phi0=0.0, gamma1=1.0, rho=1.0, d=4.0)


@pytest.fixture
def symmetric_two_path() -> NetworkModel:
    """Two single-ISP paths with psi = 1 competing for d = 4."""
    return build_two_path_model(PathProfile(1.0), PathProfile(1.0), 4.0)


@pytest.fixture
def homogeneous_model(unit_spec):
    return build_homogeneous(unit_spec)
