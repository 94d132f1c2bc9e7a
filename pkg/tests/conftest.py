import pytest
from hypothesis import HealthCheck, settings

from jointid.dynamics import simulate
from jointid.presets import get_preset

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def preset():
    return get_preset("three-link-pendulum")


@pytest.fixture(scope="session")
def truth(preset):
    """Noise-free 10 s run of the bundled preset."""
    return simulate(preset.model, preset.sim, preset.duration, preset.initial)
