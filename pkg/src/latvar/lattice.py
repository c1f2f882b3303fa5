"""Point lattices T(A) = A Z^d, their duals, enumeration and Epstein-type sums."""

from dataclasses import dataclass
import itertools
import math

import numpy as np
from scipy import special as sp

from .geometry import contains
from .special import kappa

MAX_CANDIDATES = 10**9


class SingularGenerator(ValueError):
    pass


class OverflowGuard(RuntimeError):
    """Enumeration box would exceed MAX_CANDIDATES integer points."""


class DivergentExponent(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Lattice:
    """The lattice A Z^d.

    ``dual`` is the inverse transpose of ``generator``: its points xi satisfy
    exp(2 pi i xi . t) = 1 for every lattice point t.
    """

    generator: np.ndarray
    dual: np.ndarray
    det: float

    @property
    def dim(self):
        return self.generator.shape[0]

    @property
    def intensity(self):
        return 1.0 / self.det

    @property
    def dual_det(self):
        return 1.0 / self.det

    def __repr__(self):
        return f"Lattice({self.generator.tolist()})"


def make_lattice(A):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] not in (1, 2, 3):
        raise ValueError("generator must be a square 1x1, 2x2 or 3x3 matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("generator has non-finite entries")
    det = np.linalg.det(A)
    if abs(det) <= 1e-12:
        raise SingularGenerator("singular generator")
    return Lattice(A, np.linalg.inv(A).T, abs(det))


def integer_lattice(d, scale=1.0):
    return make_lattice(scale * np.eye(d))


def sample_fundamental_cell(lat, rng, size=None):
    """Uniform point(s) of the cell A [0, 1)^d."""
    shape = (lat.dim,) if size is None else (size, lat.dim)
    u = rng.random(shape)
    return u @ lat.generator.T


def _integer_box(G, center, radius):
    """Integer ranges covering G^{-1}(center + radius * ball), one per axis."""
    Ginv = np.linalg.inv(G)
    c = Ginv @ np.asarray(center, dtype=float)
    w = np.linalg.norm(Ginv, axis=1) * radius
    lo = np.ceil(c - w - 1e-9).astype(np.int64)
    hi = np.floor(c + w + 1e-9).astype(np.int64)
    n = np.prod(np.maximum(hi - lo + 1, 0).astype(float))
    if n > MAX_CANDIDATES:
        raise OverflowGuard(f"enumeration box has {n:.3g} candidates")
    return lo, hi


def _grid(lo, hi):
    axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def count_points(lat, shape, r, M=None, x=None):
    """Number of lattice points in r M D + x."""
    d = lat.dim
    M = np.eye(d) if M is None else np.asarray(M, dtype=float)
    x = np.zeros(d) if x is None else np.asarray(x, dtype=float)
    lo, hi = _integer_box(lat.generator, x, r * shape.bounding_radius)
    n = _grid(lo, hi)
    if len(n) == 0:
        return 0
    pts = n @ lat.generator.T - x
    local = (pts @ M) / r  # rows of M^T (p - x)
    return int(np.count_nonzero(contains(shape, local)))


def points_in_ball(G, R, include_origin=False):
    """Points G n with |G n| <= R, ordered by norm then lexicographically in n."""
    d = G.shape[0]
    lo, hi = _integer_box(G, np.zeros(d), R)
    n = _grid(lo, hi)
    pts = n @ G.T
    nrm = np.linalg.norm(pts, axis=1)
    keep = nrm <= R * (1 + 1e-12)
    if not include_origin:
        keep &= np.any(n != 0, axis=1)
    n, pts, nrm = n[keep], pts[keep], nrm[keep]
    order = np.lexsort(tuple(n[:, k] for k in reversed(range(d))) + (np.round(nrm, 12),))
    return pts[order]


def dual_points_in_ball(lat, R):
    """Nonzero dual lattice vectors with |xi| <= R."""
    return points_in_ball(lat.dual, R)


def shells(G, R, chunk=2_000_000):
    """Distinct nonzero norms of G Z^d up to R with their multiplicities.

    Squared norms are grouped after rounding to 9 decimals, which is far
    coarser than the floating point noise for |G n| <= 1e4.
    """
    d = G.shape[0]
    lo, hi = _integer_box(G, np.zeros(d), R)
    rest = _grid(lo[1:], hi[1:]) if d > 1 else np.zeros((1, 0), dtype=np.int64)
    per_slice = max(1, chunk // max(len(rest), 1))
    keys, counts = [], []
    firsts = np.arange(lo[0], hi[0] + 1)
    for s in range(0, len(firsts), per_slice):
        f = firsts[s:s + per_slice]
        n = np.concatenate(
            [np.repeat(f, len(rest))[:, None], np.tile(rest, (len(f), 1))], axis=1
        )
        q = np.einsum("ij,ij->i", n @ G.T, n @ G.T)
        q = np.round(q[(q <= R * R * (1 + 1e-12)) & (q > 0)], 9)
        k, c = np.unique(q, return_counts=True)
        keys.append(k)
        counts.append(c)
    keys = np.concatenate(keys)
    counts = np.concatenate(counts)
    uk, inv = np.unique(keys, return_inverse=True)
    mult = np.zeros(len(uk), dtype=np.int64)
    np.add.at(mult, inv, counts)
    return np.sqrt(uk), mult


@dataclass(frozen=True)
class LatticeSum:
    value: float
    truncation_radius: float
    tail_bound: float


def _upper_gamma(a, x):
    """Upper incomplete gamma Gamma(a, x) for any real a and x > 0."""
    x = np.asarray(x, dtype=float)
    if a > 0:
        return sp.gammaincc(a, x) * math.gamma(a)
    if a == 0:
        return sp.exp1(x)
    # Gamma(a, x) = (Gamma(a + 1, x) - x^a e^{-x}) / a
    return (_upper_gamma(a + 1, x) - x ** a * np.exp(-x)) / a


def epstein_sum(lat, s, tol=1e-13):
    """Sum over 0 != n in Z^d of |B n|^{-s}, with B the dual generator.

    Theta-function splitting: with Z(s) the sum over the lattice L = B Z^d of
    covolume V and eta = V^{-2/d},

        pi^{-s/2} Gamma(s/2) Z(s) = sum_{x != 0} (pi|x|^2)^{-s/2} Gamma(s/2, pi eta |x|^2)
            + (1/V) sum_{y != 0} (pi|y|^2)^{(s-d)/2} Gamma((d-s)/2, pi|y|^2 / eta)
            + eta^{(s-d)/2} / (V (s-d)/2) - eta^{s/2} / (s/2),

    where y runs over the dual of L (that is A Z^d). Both sums decay like
    exp(-pi |.|^2 eta^{+-1}) and are cut where terms drop below 1e-17.
    """
    d = lat.dim
    if s <= d:
        raise DivergentExponent(f"Epstein sum diverges for s={s} <= d={d}")
    B, A = lat.dual, lat.generator
    V = lat.dual_det
    eta = V ** (-2.0 / d)
    # exp(-pi eta R^2) < 1e-17 relative, with margin for the power prefactor
    R_direct = math.sqrt(42.0 / (math.pi * eta))
    R_recip = math.sqrt(42.0 * eta / math.pi)
    x = np.linalg.norm(points_in_ball(B, R_direct), axis=1)
    y = np.linalg.norm(points_in_ball(A, R_recip), axis=1)
    direct = np.sum((math.pi * x * x) ** (-s / 2) * _upper_gamma(s / 2, math.pi * eta * x * x))
    recip = np.sum((math.pi * y * y) ** ((s - d) / 2) * _upper_gamma((d - s) / 2, math.pi * y * y / eta)) / V
    const = eta ** ((s - d) / 2) / (V * (s - d) / 2) - eta ** (s / 2) / (s / 2)
    value = (direct + recip + const) * math.pi ** (s / 2) / math.gamma(s / 2)
    # first omitted shells are below exp(-42) ~ 6e-19 of their own scale
    tail = abs(value) * 1e-15
    if tail > tol * abs(value):
        raise RuntimeError("Epstein theta splitting failed to converge")
    return LatticeSum(float(value), R_direct, tail)


def epstein_shell_sum(lat, s, R):
    """Direct shell summation up to |B n| <= R with an integral tail bound."""
    d = lat.dim
    if s <= d:
        raise DivergentExponent(f"Epstein sum diverges for s={s} <= d={d}")
    rho, mult = shells(lat.dual, R)
    value = float(np.sum(mult * rho ** (-s)))
    tail = 2.0 * d * kappa(d) * R ** (d - s) / ((s - d) * lat.dual_det)
    return LatticeSum(value, R, tail)


def lattice_constant(lat):
    """C_T = (2 pi^2 d kappa_d)^{-1} sum_{0 != n} |B n|^{-d-1}.

    This is the unit-intensity normalisation: the placement-averaged variance
    behaves like intensity^2 * C_T * H^{d-1}(boundary) * r^{d-1}; see
    :func:`latvar.variance.asymptote`.
    """
    d = lat.dim
    return epstein_sum(lat, d + 1).value / (2 * math.pi ** 2 * d * kappa(d))


def unimodular_matrices(d, entries=(-1, 0, 1)):
    """Small integer matrices with determinant +-1 (for basis-change checks)."""
    for flat in itertools.product(entries, repeat=d * d):
        U = np.array(flat, dtype=float).reshape(d, d)
        if abs(abs(np.linalg.det(U)) - 1) < 1e-9:
            yield U
