import numpy as np
import pytest

from lab_config import ENV_PREFIX, LabSettings, get_settings
from params_core import Params
from radial_toolkit import GaussianProfile, SampledProfile, make_grid


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    """Every test starts from the built-in defaults."""
    for name in LabSettings.model_fields:
        monkeypatch.delenv(ENV_PREFIX + name.upper(), raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def params_521():
    return Params(N=5, p=2.0, alpha=1.0, c=1.0)


@pytest.fixture
def params_520():
    return Params(N=5, p=2.0, alpha=0.0, c=0.0)


@pytest.fixture
def gaussian():
    return GaussianProfile(a=1.0)


@pytest.fixture
def sampled_profiles():
    """Random smooth sampled profiles on a log grid: sums of three Gaussian bumps."""
    grid = make_grid(1e-3, 8.0, 400)
    rng = np.random.default_rng(1)
    profiles = []
    for _ in range(12):
        centers = rng.uniform(0.0, 3.0, 3)
        widths = rng.uniform(0.3, 1.5, 3)
        weights = rng.uniform(-1.0, 1.0, 3)
        values = sum(w * np.exp(-((grid.nodes - c) / s) ** 2) for w, c, s in zip(weights, centers, widths))
        profiles.append(SampledProfile(grid=grid, values=values))
    return profiles
