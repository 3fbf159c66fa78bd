import numpy as np
import pytest

from flagflow import AlgebraContext, Family, HeightFunction, OrbitPoint


def random_spectrum(rng, n, min_gap=1e-2):
    while True:
        s = np.sort(rng.uniform(-1.0, 1.0, n))
        s -= s.mean()
        if np.min(np.diff(s)) >= min_gap:
            return s


def random_point(ctx, rng, spectrum=None):
    if spectrum is None:
        spectrum = random_spectrum(rng, ctx.n)
    return OrbitPoint.from_spectrum(ctx, spectrum, ctx.random_compact(rng))


def random_tangent(x, rng):
    """Random tangent vector at x: [a, x] for a in k."""
    a = x.ctx.random_k(rng).mat
    return a @ x.mat - x.mat @ a


def random_height(ctx, rng):
    return HeightFunction(ctx.random_p(rng, normalize=True))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[Family.SL_REAL, Family.SU_COMPLEXIFIED], ids=["real", "complex"])
def family(request):
    return request.param


@pytest.fixture
def ctx3(family):
    return AlgebraContext(family, 3)
