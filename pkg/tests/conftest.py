import numpy as np
import pytest

from qlab.field import Grid2D, MetricField, PotentialField, default_profiles


@pytest.fixture(scope="session")
def profiles():
    return default_profiles()


@pytest.fixture(scope="session")
def identity_metric():
    return MetricField.identity()


@pytest.fixture
def perturbed_metric():
    """Mild non-flat metric satisfying the derivative smallness budget."""
    eps = 0.002

    def g11(x1, x2):
        return 1.0 + eps * np.sin(x1) * np.cos(x2)

    def g12(x1, x2):
        return eps * np.sin(x1) * np.sin(x2)

    def g22(x1, x2):
        return 1.0 - eps * np.cos(x1) * np.sin(x2)

    d = {
        ("g11", 0): lambda x1, x2: eps * np.cos(x1) * np.cos(x2),
        ("g11", 1): lambda x1, x2: -eps * np.sin(x1) * np.sin(x2),
        ("g12", 0): lambda x1, x2: eps * np.cos(x1) * np.sin(x2),
        ("g12", 1): lambda x1, x2: eps * np.sin(x1) * np.cos(x2),
        ("g22", 0): lambda x1, x2: eps * np.sin(x1) * np.sin(x2),
        ("g22", 1): lambda x1, x2: -eps * np.cos(x1) * np.cos(x2),
    }
    return MetricField(g11, g12, g22, d_entries=d, name="perturbed")


@pytest.fixture
def small_grid():
    return Grid2D(np.pi, 32)
