import numpy as np
import pytest
from hypothesis import settings, strategies as st

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

angles = st.floats(0.0, 2 * np.pi, allow_nan=False)
polar = st.floats(0.0, np.pi, allow_nan=False)
energies = st.floats(1e-3, 20.0, allow_nan=False)
seeds = st.integers(0, 2**32 - 1)


def random_density(rng, dim=4, rank=None):
    """Random mixed state from a Ginibre matrix; independent of the package."""
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho)


def random_pure(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(rng, dim=2):
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
