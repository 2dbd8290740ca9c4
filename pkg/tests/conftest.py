"""Shared fixtures for twostar-lab tests."""

import math

import pytest

from gibbs_exact import build_system
from hamiltonians import ScalarParams


# ---------------------------------------------------------------------------
# Closed forms for K_3
# ---------------------------------------------------------------------------
# On K_3 every pair of edges is a wedge, so with alpha = 3 the Hamiltonian is
# exactly the wedge count: weights 1, 1, 1, 1, e, e, e, e^3.
E = math.e
Z3 = E ** 3 + 3 * E + 4
EDGE_MEAN3 = (E ** 3 + 2 * E + 1) / Z3
PAIR_MEAN3 = (E ** 3 + E) / Z3


@pytest.fixture()
def k3_system():
    """n=3, alpha=3, h=0."""
    return build_system(3, ScalarParams(3.0, 0.0))


@pytest.fixture()
def k3_field_system():
    """n=3, alpha=3, h=1."""
    return build_system(3, ScalarParams(3.0, 1.0))


@pytest.fixture()
def k4_system():
    """n=4, alpha=1, h=0.5."""
    return build_system(4, ScalarParams(1.0, 0.5))


@pytest.fixture()
def free_system():
    """n=3 with no couplings: independent Bernoulli(sigma(h)) edges."""
    return build_system(3, ScalarParams(0.0, -1.0))


# ---------------------------------------------------------------------------
# FastAPI test client
# ---------------------------------------------------------------------------
@pytest.fixture()
def client():
    """FastAPI TestClient for the report service."""
    from fastapi.testclient import TestClient

    import app as app_module

    with TestClient(app_module.app, raise_server_exceptions=False) as tc:
        yield tc
