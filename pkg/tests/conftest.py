"""
Pytest configuration and fixtures
"""
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from symstress import create_app
from symstress.elements import reference_simplex

settings.register_profile("default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def app(tmp_path):
    """Create application for testing."""
    app = create_app("testing")
    app.config["OUTPUT_DIR"] = str(tmp_path)
    app.config["THREADS"] = 1

    with app.app_context():
        yield app


@pytest.fixture
def runner(app):
    """Create test CLI runner."""
    return app.test_cli_runner()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def triangle():
    """Reference triangle (0,0), (1,0), (0,1)."""
    return reference_simplex(2)


@pytest.fixture
def tetrahedron():
    return reference_simplex(3)
