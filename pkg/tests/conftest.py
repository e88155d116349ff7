import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from topofix.phantom import PhantomSpec, generate

# first calls pay numba compilation, so wall-clock deadlines are meaningless
settings.register_profile(
    "default",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# thick enough for every corruption to place (a punched hole needs an
# interior 5x5 box of its class), small enough to keep refinement fast
TINY = PhantomSpec(
    size=48, lv_radius=7.0, my_thickness=6.0, rv_extent=5.0, jitter=1.0, seed=0
)


@pytest.fixture(scope="session")
def tiny_spec():
    return TINY


@pytest.fixture(scope="session")
def tiny_phantom():
    """48x48 phantom shared by tests that only read it."""
    return generate(TINY)


def random_prob(rng: np.random.Generator, h: int, w: int, n_levels: int) -> np.ndarray:
    """Map with at most n_levels distinct float32 values, always containing 0."""
    levels = np.concatenate(
        [[0.0], rng.uniform(0.0, 1.0, size=n_levels - 1)]
    ).astype(np.float32)
    return levels[rng.integers(0, n_levels, size=(h, w))]
