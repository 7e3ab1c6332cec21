import numpy as np
import pytest

from movingheat import make_domain


@pytest.fixture(scope="session")
def unit_domain():
    return make_domain("constant", {"a0": 1.0}, 1.0)


@pytest.fixture(scope="session")
def sin_domain():
    # the standard moving test domain: a(t) = 1 + 0.5 sin t
    return make_domain("sinusoidal", {"a0": 1.0, "amp": 0.5, "omega": 1.0}, 1.0)


@pytest.fixture(scope="session")
def lin_domain():
    return make_domain("linear", {"a0": 1.0, "slope": 1.0}, 1.0)


def gauss_quad(f, lo, hi, n_nodes):
    """Plain Gauss-Legendre quadrature, written here so the tests do not
    share integration code with the package."""
    xs, ws = np.polynomial.legendre.leggauss(n_nodes)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    return half * np.sum(ws * f(mid + half * xs))
