import os
import random

import pytest
from hypothesis import settings as hypothesis_settings

from backend.config import get_settings, reset_settings

# reproducible by default; UHASH_HYPOTHESIS_PROFILE=explore (or --hypothesis-profile) draws fresh examples
hypothesis_settings.register_profile("reproducible", derandomize=True, deadline=None)
hypothesis_settings.register_profile("explore", derandomize=False, deadline=None)
hypothesis_settings.load_profile(os.getenv("UHASH_HYPOTHESIS_PROFILE", "reproducible"))


@pytest.fixture(autouse=True)
def fresh_settings():
    reset_settings()
    yield
    reset_settings()


@pytest.fixture
def rng():
    """Seeded from UHASH_RNG_SEED (default 20240601)."""
    return random.Random(get_settings().rng_seed)
