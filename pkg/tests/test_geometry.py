import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latvar.geometry import (
    RadialProfile,
    Shape,
    contains,
    covariogram,
    covariogram_profile,
    gamma_prime_zero,
    is_rotation,
    isotropic_covariogram,
    random_rotation,
    surface_measure,
    unit_ball_covariogram,
    volume,
)
from latvar.special import kappa

pos = st.floats(0.2, 3.0)


def test_shape_validation():
    with pytest.raises(ValueError):
        Shape("cone", (1.0,), 2)
    with pytest.raises(ValueError):
        Shape.ball(-1.0, 2)
    with pytest.raises(ValueError):
        Shape.box(1.0, 2.0, 3.0, 4.0)


def test_volumes_and_surfaces():
    assert volume(Shape.ball(1, 3)) == pytest.approx(4 * math.pi / 3)
    assert surface_measure(Shape.ball(1, 3)) == pytest.approx(4 * math.pi)
    assert surface_measure(Shape.ball(2, 2)) == pytest.approx(4 * math.pi)
    assert volume(Shape.box(0.5, 1.0, 1.5)) == pytest.approx(6.0)
    assert surface_measure(Shape.box(0.5, 1.0, 1.5)) == pytest.approx(2 * (2 + 3 + 6))
    assert surface_measure(Shape.box(0.25)) == 2.0
    # prolate spheroid 1, 1, 2 (closed form)
    e = math.sqrt(1 - 1 / 4)
    prolate = 2 * math.pi * (1 + 2 * math.asin(e) / e)
    assert surface_measure(Shape.ellipsoid(1, 1, 2)) == pytest.approx(prolate, rel=1e-10)
    # ellipse perimeter, Ramanujan II is good to ~1e-10 at this eccentricity
    a, b = 2.0, 1.0
    h = ((a - b) / (a + b)) ** 2
    ram = math.pi * (a + b) * (1 + 3 * h / (10 + math.sqrt(4 - 3 * h)))
    assert surface_measure(Shape.ellipsoid(a, b)) == pytest.approx(ram, rel=1e-8)


def test_ball_covariogram_known_values():
    assert unit_ball_covariogram(np.array([0.0]), 3)[0] == pytest.approx(4 * math.pi / 3)
    assert unit_ball_covariogram(np.array([1.0]), 3)[0] == pytest.approx(5 * math.pi / 12)
    assert unit_ball_covariogram(np.array([2.5]), 2)[0] == 0.0
    # disk: 2 acos(t/2) - (t/2) sqrt(4 - t^2)
    t = 0.8
    ref = 2 * math.acos(t / 2) - t / 2 * math.sqrt(4 - t * t)
    assert unit_ball_covariogram(np.array([t]), 2)[0] == pytest.approx(ref)


def test_box_covariogram_product():
    box = Shape.box(0.5, 1.0)
    x = np.array([[0.3, -0.5]])
    assert covariogram(box, x)[0] == pytest.approx((1 - 0.3) * (2 - 0.5))


@given(pos, pos, st.floats(0, 4))
def test_isotropic_covariogram_bounds(a, b, t):
    box = Shape.box(a, b)
    g = isotropic_covariogram(box, np.array([t]))[0]
    assert -1e-12 <= g <= volume(box) * (1 + 1e-12)


def test_isotropic_matches_direction_average():
    rng = np.random.default_rng(0)
    for shape in (Shape.box(0.5, 0.3, 0.4), Shape.ellipsoid(1.0, 0.6, 0.8)):
        u = rng.standard_normal((200_000, 3))
        u /= np.linalg.norm(u, axis=1)[:, None]
        t = 0.45
        mc = covariogram(shape, t * u)
        se = mc.std() / math.sqrt(len(mc))
        assert abs(isotropic_covariogram(shape, np.array([t]))[0] - mc.mean()) < 4 * se


def test_square_isotropic_derivative():
    sq = Shape.cube(1.0, 2)
    h = 1e-6
    slope = (isotropic_covariogram(sq, np.array([h]))[0] - 1.0) / h
    assert slope == pytest.approx(-4 / math.pi, rel=1e-4)


@pytest.mark.parametrize("shape", [Shape.ball(1, 2), Shape.ball(1, 3), Shape.cube(1, 2), Shape.cube(1, 3)])
def test_slope_formula(shape):
    d = shape.dim
    assert gamma_prime_zero(shape) == pytest.approx(-kappa(d - 1) / (d * kappa(d)) * surface_measure(shape))


def test_contains_is_closed():
    assert contains(Shape.ball(1, 2), np.array([1.0, 0.0]))
    assert contains(Shape.box(0.5, 0.5), np.array([0.5, -0.5]))
    assert not contains(Shape.ellipsoid(1, 2), np.array([1.01, 0.0]))


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
def test_random_rotation_orthogonal(seed, d):
    M = random_rotation(d, np.random.default_rng(seed))
    assert is_rotation(M, 1e-12)


def test_radial_profile_interpolates_and_extends():
    t = np.linspace(1, 5, 41)
    prof = RadialProfile(t, t ** -3.0, tail_exponent=-3.0)
    assert prof(np.array([2.05]))[0] == pytest.approx(2.05 ** -3, rel=1e-4)
    assert prof(np.array([10.0]))[0] == pytest.approx(1e-3, rel=1e-12)
    assert prof.support_end == math.inf
    with pytest.raises(ValueError):
        RadialProfile(np.array([1.0, 0.5]), np.array([1.0, 2.0]))


def test_covariogram_profile_support():
    prof = covariogram_profile(Shape.ball(1, 2))
    assert prof.support_end == pytest.approx(2.0)
    assert prof(np.array([3.0]))[0] == 0.0
