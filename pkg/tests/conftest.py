import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from holomux.geometry import ScenarioGeometry

settings.register_profile(
    "holomux", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("holomux")


def sample_geometries(rng, n, dl=(0.05, 100.0), theta_deg=85.0, vary_l=True):
    """Log-uniform D/L, uniform theta, optionally log-uniform L in [0.5, 2]."""
    x = np.exp(rng.uniform(np.log(dl[0]), np.log(dl[1]), n))
    theta = np.deg2rad(rng.uniform(-theta_deg, theta_deg, n))
    L = np.exp(rng.uniform(np.log(0.5), np.log(2.0), n)) if vary_l else np.ones(n)
    return ScenarioGeometry(L, x * L, theta)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
