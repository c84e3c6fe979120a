"""Shared fixtures and independent oracles for the test suite."""

import math

import numpy as np
import pytest

from geodkit.core import get_ellipsoid, meridian_radius, prime_vertical_radius

GR = math.pi / 200.0
DMGR = GR * 1e-4


@pytest.fixture(scope="session")
def clarke_fr():
    return get_ellipsoid("clarke-1880-fr")


@pytest.fixture(scope="session")
def grs80():
    return get_ellipsoid("grs80")


@pytest.fixture(scope="session")
def wgs84():
    return get_ellipsoid("wgs84")


def integrate_geodesic(ell, phi, lam, az, s, steps=4000):
    """RK4 integration of the geodesic ODEs; independent of the series path.

    dphi/ds = cos(az)/rho, dlam/ds = sin(az)/(N cos(phi)),
    daz/ds = sin(az) tan(phi)/N.
    """

    def deriv(state):
        p, _, a = state
        n = prime_vertical_radius(ell, p)
        rho = meridian_radius(ell, p)
        return np.array(
            [
                math.cos(a) / rho,
                math.sin(a) / (n * math.cos(p)),
                math.sin(a) * math.tan(p) / n,
            ]
        )

    state = np.array([phi, lam, az], dtype=float)
    h = s / steps
    for _ in range(steps):
        k1 = deriv(state)
        k2 = deriv(state + 0.5 * h * k1)
        k3 = deriv(state + 0.5 * h * k2)
        k4 = deriv(state + h * k3)
        state = state + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return state  # phi2, lam2, az2
