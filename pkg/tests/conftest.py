import os

from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


import pytest

from mmrelay.harness.experiments import SampleCache


@pytest.fixture(scope="session")
def sample_cache():
    """Monte Carlo samples shared by every test in the run."""
    return SampleCache()
