import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from coverlab.potential import green_table, lattice_constants

# jit warm-up on first call makes per-example deadlines meaningless
settings.register_profile(
    "coverlab",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("coverlab")


@pytest.fixture(scope="session")
def table():
    return green_table(3)


@pytest.fixture(scope="session")
def consts():
    return lattice_constants(3)


def first_visit_oracle(volume: int, labels: np.ndarray) -> np.ndarray:
    """Reference first-visit array from a literal scan of the label sequence."""
    fv = np.full(volume, -1, dtype=np.int64)
    for t, lab in enumerate(labels):
        if fv[lab] < 0:
            fv[lab] = t
    return fv
