"""The compiled and pure-Python kernels must draw identical events."""
import numpy as np
import pytest

from epistoch import _kernels_py, kernels

compiled = pytest.importorskip("epistoch._kernels")


def _same(a, b):
    return all(np.array_equal(x, y) for x, y in zip(a, b))


@pytest.mark.parametrize("seed", [0, 1, 17, 12345])
@pytest.mark.parametrize(
    "lam,gamma,latent,fixed",
    [(1.5, 1.0, 0.0, False), (2.0, 1.0, 0.0, True), (3.0, 1.0, 1.5, False), (0.0, 1.0, 0.0, False)],
)
def test_gse_parity(seed, lam, gamma, latent, fixed):
    a = compiled.gse_events(np.random.default_rng(seed), 400, lam, gamma, latent, fixed)
    b = _kernels_py.gse_events(np.random.default_rng(seed), 400, lam, gamma, latent, fixed)
    assert _same(a, b)


@pytest.mark.parametrize("seed", [0, 5, 99])
@pytest.mark.parametrize("index", [-1, 0, 3])
def test_household_parity(seed, index):
    sizes = np.array([3, 1, 4, 2, 2, 5], dtype=np.int64)
    a = compiled.household_events(np.random.default_rng(seed), sizes, 2.0, 0.7, 1.0, index)
    b = _kernels_py.household_events(np.random.default_rng(seed), sizes, 2.0, 0.7, 1.0, index)
    assert _same(a, b)


def test_rng_stream_position_matches():
    # both backends must leave the generator in the same state
    r1, r2 = np.random.default_rng(3), np.random.default_rng(3)
    compiled.gse_events(r1, 200, 2.0, 1.0, 0.0, False)
    _kernels_py.gse_events(r2, 200, 2.0, 1.0, 0.0, False)
    assert r1.random() == r2.random()


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("bitgen", [np.random.PCG64, np.random.PCG64DXSM, np.random.MT19937, np.random.Philox])
def test_parity_across_bit_generators(bitgen):
    r1, r2 = np.random.Generator(bitgen(4)), np.random.Generator(bitgen(4))
    a = compiled.gse_events(r1, 150, 2.0, 1.0, 0.0, False)
    b = _kernels_py.gse_events(r2, 150, 2.0, 1.0, 0.0, False)
    assert _same(a, b)
    assert r1.random() == r2.random()
