import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special as sp

from latvar.special import (
    PoleAt,
    averaged_limit,
    bessel_j,
    bessel_lambda,
    complex_gamma,
    kappa,
)


def test_kappa_values():
    assert kappa(0) == 1.0
    assert kappa(1) == pytest.approx(2.0)
    assert kappa(2) == pytest.approx(math.pi)
    assert kappa(3) == pytest.approx(4 * math.pi / 3)


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 1.0, 1.5])
def test_bessel_matches_scipy(nu):
    x = np.concatenate([np.linspace(0, 1, 101), np.linspace(1, 200, 2001)])
    got = bessel_j(nu, x)
    ref = sp.jv(nu, x)
    ok = np.isfinite(ref)
    assert np.max(np.abs(got[ok] - ref[ok])) < 1e-13


def test_bessel_rejects_bad_order_and_negative_x():
    with pytest.raises(ValueError):
        bessel_j(2.0, 1.0)
    with pytest.raises(ValueError):
        bessel_j(0.0, -1.0)


def test_half_integer_closed_forms():
    x = np.array([0.7, 3.0, 11.0])
    assert np.allclose(bessel_j(0.5, x), np.sqrt(2 / (np.pi * x)) * np.sin(x), rtol=1e-14)
    assert np.allclose(
        bessel_j(1.5, x), np.sqrt(2 / (np.pi * x)) * (np.sin(x) / x - np.cos(x)), rtol=1e-13
    )


@pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 1.0, 1.5])
def test_lambda_normalised(nu):
    assert bessel_lambda(nu, np.array([0.0]))[0] == 1.0
    z = np.array([0.3, 3.99, 4.01, 17.0])
    ref = sp.gamma(nu + 1) * (2 / z) ** nu * sp.jv(nu, z)
    assert np.allclose(bessel_lambda(nu, z), ref, rtol=1e-12, atol=1e-15)


@given(st.floats(0.6, 30.0), st.floats(-20.0, 20.0))
def test_complex_gamma_vs_scipy(x, y):
    z = complex(x, y)
    ref = complex(sp.gamma(z))
    assert abs(complex_gamma(z) - ref) <= 1e-10 * abs(ref) + 1e-300


def test_complex_gamma_reflection_and_poles():
    assert complex_gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-13)
    z = complex(-2.5, 0.3)
    assert abs(complex_gamma(z) - complex(sp.gamma(z))) < 1e-11 * abs(complex(sp.gamma(z)))
    for n in (0, -1, -4):
        with pytest.raises(PoleAt):
            complex_gamma(n)


def test_averaged_limit_alternating():
    # 1 - 1/2 + 1/3 - ... = log 2
    k = np.arange(1, 2001)
    est, err = averaged_limit(np.cumsum((-1.0) ** (k + 1) / k))
    assert abs(est - math.log(2)) < 1e-12
    assert err < 1e-10
