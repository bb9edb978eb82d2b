import numpy as np
import pytest


def pytest_addoption(parser):
    parser.addoption("--extended", action="store_true", default=False,
                     help="run the slow extended tier")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--extended"):
        return
    skip = pytest.mark.skip(reason="extended tier; run with --extended")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)


def random_unit_trace_hermitian(rng, d, spread=0.6):
    """Unit-trace Hermitian matrix that is frequently indefinite."""
    h = random_hermitian(rng, d) * spread
    return h - (np.trace(h).real - 1.0) / d * np.eye(d)


def random_density_batch(rng, d, k):
    """k random density matrices of dimension d (Ginibre with random rank)."""
    g = rng.normal(size=(k, d, d)) + 1j * rng.normal(size=(k, d, d))
    rank = rng.integers(1, d + 1, size=k)
    mask = np.arange(d)[None, None, :] < rank[:, None, None]
    g = g * mask
    rho = g @ np.conj(np.swapaxes(g, 1, 2))
    return rho / np.trace(rho, axis1=1, axis2=2).real[:, None, None]
