import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special as sp

from latvar.geometry import Shape
from latvar.lattice import (
    DivergentExponent,
    OverflowGuard,
    SingularGenerator,
    count_points,
    dual_points_in_ball,
    epstein_shell_sum,
    epstein_sum,
    integer_lattice,
    lattice_constant,
    make_lattice,
    points_in_ball,
    sample_fundamental_cell,
    shells,
    unimodular_matrices,
)

HEX = np.array([[1.0, 0.5], [0.0, math.sqrt(3) / 2]])


def zeta_beta_32():
    z = sp.zeta(1.5)
    beta = 4 ** -1.5 * (sp.zeta(1.5, 0.25) - sp.zeta(1.5, 0.75))
    return z * beta


def test_make_lattice_rejects_bad_input():
    with pytest.raises(SingularGenerator):
        make_lattice([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(ValueError):
        make_lattice(np.ones((2, 3)))
    with pytest.raises(ValueError):
        make_lattice(np.eye(4))


def test_dual_is_inverse_transpose():
    lat = make_lattice(HEX)
    assert np.allclose(lat.dual.T @ lat.generator, np.eye(2))
    assert lat.intensity == pytest.approx(2 / math.sqrt(3))


def test_count_points_examples():
    Z2 = integer_lattice(2)
    assert count_points(Z2, Shape.ball(1, 2), 1.5) == 9
    assert count_points(Z2, Shape.cube(1, 2), 1.0, x=np.array([0.25, 0.25])) == 1
    assert count_points(integer_lattice(1), Shape.box(0.5), 3.0) == 3
    M = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert count_points(Z2, Shape.box(1.0, 0.2), 1.0, M=M) == 3


def test_overflow_guard():
    with pytest.raises(OverflowGuard):
        count_points(integer_lattice(3), Shape.ball(1, 3), 1e4)


def test_points_in_ball_order_and_symmetry():
    pts = points_in_ball(np.eye(2), 2.0)
    nrm = np.linalg.norm(pts, axis=1)
    assert np.all(np.diff(nrm) >= -1e-12)
    assert len(pts) == 12
    dual = dual_points_in_ball(make_lattice(2 * np.eye(2)), 0.5)
    assert len(dual) == 4 and np.allclose(np.abs(dual).max(), 0.5)


@given(st.floats(0.5, 6.0))
def test_dual_closed_under_negation(R):
    xi = dual_points_in_ball(make_lattice(HEX), R)
    a = {tuple(np.round(p, 9)) for p in xi}
    b = {tuple(np.round(-p, 9)) for p in xi}
    assert a == b


def test_shells_multiplicities():
    rho, mult = shells(np.eye(2), 2.0)
    assert np.allclose(rho, [1, math.sqrt(2), 2])
    assert list(mult) == [4, 4, 4]
    rho, mult = shells(np.eye(3), 1.5)
    assert list(mult) == [6, 12]


def test_epstein_known_values():
    assert epstein_sum(integer_lattice(1), 2).value == pytest.approx(math.pi ** 2 / 3, rel=1e-14)
    assert epstein_sum(integer_lattice(2), 3).value == pytest.approx(4 * zeta_beta_32(), rel=1e-13)
    with pytest.raises(DivergentExponent):
        epstein_sum(integer_lattice(2), 2)


def test_epstein_matches_shell_sum():
    lat = make_lattice(HEX)
    exact = epstein_sum(lat, 3)
    direct = epstein_shell_sum(lat, 3, 60.0)
    assert direct.value <= exact.value
    assert exact.value - direct.value <= direct.tail_bound


def test_lattice_constants():
    assert lattice_constant(integer_lattice(1)) == pytest.approx(1 / 12, abs=1e-14)
    assert lattice_constant(integer_lattice(2)) == pytest.approx(zeta_beta_32() / math.pi ** 3, abs=1e-12)


def test_constant_homogeneity():
    c = lattice_constant(integer_lattice(2))
    assert lattice_constant(integer_lattice(2, 2.0)) == pytest.approx(8 * c, rel=1e-12)


@pytest.mark.parametrize("U", list(unimodular_matrices(2))[::7])
def test_constant_basis_invariant(U):
    base = make_lattice(HEX)
    assert lattice_constant(make_lattice(HEX @ U)) == pytest.approx(lattice_constant(base), rel=1e-11)


@given(st.integers(0, 10_000))
def test_fundamental_cell_samples(seed):
    lat = make_lattice(HEX)
    x = sample_fundamental_cell(lat, np.random.default_rng(seed), size=50)
    c = x @ np.linalg.inv(lat.generator).T
    assert np.all((c >= 0) & (c < 1))
