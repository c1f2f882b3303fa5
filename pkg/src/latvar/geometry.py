"""Centred bodies (ball, box, ellipsoid), their measures and covariograms."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import special as sp
from scipy.interpolate import PchipInterpolator

from .special import kappa

_GL_CACHE = {}


def gauss_legendre(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = sp.roots_legendre(n)
    return _GL_CACHE[n]


@dataclass(frozen=True)
class Shape:
    """A body centred at the origin.

    ``kind`` is one of ``"ball"``, ``"box"``, ``"ellipsoid"``. For a ball
    ``size`` holds the radius; for a box the half extents; for an ellipsoid
    the semi-axes.
    """

    kind: str
    size: tuple
    dim: int

    def __post_init__(self):
        if self.kind not in ("ball", "box", "ellipsoid"):
            raise ValueError(f"unknown shape kind {self.kind!r}")
        if self.dim not in (1, 2, 3):
            raise ValueError("dimension must be 1, 2 or 3")
        expected = 1 if self.kind == "ball" else self.dim
        if len(self.size) != expected:
            raise ValueError(f"{self.kind} in d={self.dim} needs {expected} size parameters")
        if any(not (s > 0 and math.isfinite(s)) for s in self.size):
            raise ValueError("size parameters must be positive and finite")

    @classmethod
    def ball(cls, radius, dim):
        return cls("ball", (float(radius),), int(dim))

    @classmethod
    def box(cls, *half_extents):
        return cls("box", tuple(float(a) for a in half_extents), len(half_extents))

    @classmethod
    def cube(cls, side, dim):
        return cls.box(*([side / 2.0] * dim))

    @classmethod
    def ellipsoid(cls, *semi_axes):
        return cls("ellipsoid", tuple(float(s) for s in semi_axes), len(semi_axes))

    @property
    def rotation_invariant(self):
        if self.dim == 1 or self.kind == "ball":
            return True
        return self.kind == "ellipsoid" and len(set(self.size)) == 1

    @property
    def bounding_radius(self):
        if self.kind == "ball":
            return self.size[0]
        if self.kind == "box":
            return math.sqrt(sum(a * a for a in self.size))
        return max(self.size)

    def __str__(self):
        return f"{self.kind}{list(self.size)} (d={self.dim})"


def volume(shape):
    d = shape.dim
    if shape.kind == "ball":
        return kappa(d) * shape.size[0] ** d
    if shape.kind == "box":
        return math.prod(2.0 * a for a in shape.size)
    return kappa(d) * math.prod(shape.size)


def _ellipse_perimeter(a, b):
    a, b = max(a, b), min(a, b)
    return 4.0 * a * sp.ellipe(1.0 - (b / a) ** 2)


def _ellipsoid_area(a, b, c):
    a, b, c = sorted((a, b, c), reverse=True)
    if a - c <= 1e-14 * a:
        return 4.0 * math.pi * a * a
    phi = math.acos(c / a)
    m = min(a * a * (b * b - c * c) / (b * b * (a * a - c * c)), 1.0)
    e_inc = sp.ellipeinc(phi, m)
    f_inc = sp.ellipkinc(phi, m)
    s = math.sin(phi)
    return 2 * math.pi * c * c + 2 * math.pi * a * b / s * (e_inc * s * s + f_inc * math.cos(phi) ** 2)


def surface_measure(shape):
    """(d-1)-dimensional measure of the boundary; 2 (endpoints) in d = 1."""
    d = shape.dim
    if d == 1:
        return 2.0
    if shape.kind == "ball":
        return d * kappa(d) * shape.size[0] ** (d - 1)
    if shape.kind == "box":
        a = shape.size
        if d == 2:
            return 4.0 * (a[0] + a[1])
        return 8.0 * (a[0] * a[1] + a[0] * a[2] + a[1] * a[2])
    if d == 2:
        return _ellipse_perimeter(*shape.size)
    return _ellipsoid_area(*shape.size)


def unit_ball_covariogram(t, d):
    """Overlap volume of two unit balls whose centres are t apart."""
    u = np.clip(np.asarray(t, dtype=float) / 2.0, 0.0, 1.0)
    if d == 1:
        return 2.0 * (1.0 - u)
    if d == 2:
        return 2.0 * (np.arccos(u) - u * np.sqrt(1.0 - u * u))
    return (4.0 * math.pi / 3.0) * (1.0 - 1.5 * u + 0.5 * u ** 3)


def covariogram(shape, x):
    """gamma_D(x) = vol(D intersect (D + x)); ``x`` has shape (..., d)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != shape.dim:
        raise ValueError("vector dimension does not match shape")
    if shape.kind == "box":
        a = np.asarray(shape.size)
        return np.prod(np.clip(2.0 * a - np.abs(x), 0.0, None), axis=-1)
    if shape.kind == "ball":
        R = shape.size[0]
        return R ** shape.dim * unit_ball_covariogram(np.linalg.norm(x, axis=-1) / R, shape.dim)
    s = np.asarray(shape.size)
    return math.prod(shape.size) * unit_ball_covariogram(np.linalg.norm(x / s, axis=-1), shape.dim)


def _rect_isotropic(t, A, B):
    """Angular mean of (A - t|cos|)_+ (B - t|sin|)_+ over the circle."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        th1 = np.arccos(np.minimum(1.0, A / t))
        th2 = np.arcsin(np.minimum(1.0, B / t))
    th1 = np.where(t == 0, 0.0, th1)
    th2 = np.where(t == 0, math.pi / 2, th2)

    def F(th):
        return A * B * th + A * t * np.cos(th) - B * t * np.sin(th) + 0.5 * t * t * np.sin(th) ** 2

    return np.where(th2 > th1, (2.0 / math.pi) * (F(th2) - F(th1)), 0.0)


def _box3_isotropic(t, a, n):
    A, B, C = 2.0 * np.asarray(a)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    x, w = gauss_legendre(n)
    for i, ti in enumerate(t):
        if ti == 0.0:
            out[i] = A * B * C
            continue
        lo = math.acos(min(1.0, C / ti))
        cuts = [lo, math.pi / 2]
        for X in (A, B, math.hypot(A, B)):
            if X < ti:
                th = math.asin(X / ti)
                if lo < th < math.pi / 2:
                    cuts.append(th)
        cuts = sorted(cuts)
        total = 0.0
        for p, q in zip(cuts[:-1], cuts[1:]):
            th = 0.5 * (q - p) * x + 0.5 * (p + q)
            g = (C - ti * np.cos(th)) * _rect_isotropic(ti * np.sin(th), A, B) * np.sin(th)
            total += 0.5 * (q - p) * np.dot(w, g)
        out[i] = total
    return out


def _ellipse_isotropic(t, a, b, n):
    # gamma_E(t u) = a b gamma_disk(s), s = t |S^{-1} u|; split where s = 2
    t = np.atleast_1d(np.asarray(t, dtype=float))
    x, w = gauss_legendre(n)
    ia, ib = 1.0 / (a * a), 1.0 / (b * b)
    out = np.empty_like(t)
    for i, ti in enumerate(t):
        cuts = [0.0, math.pi / 2]
        if ti > 0 and ia != ib:
            c2 = (4.0 / (ti * ti) - ib) / (ia - ib)
            if 0 < c2 < 1:
                cuts.insert(1, math.acos(math.sqrt(c2)))
        total = 0.0
        for p, q in zip(cuts[:-1], cuts[1:]):
            th = 0.5 * (q - p) * x + 0.5 * (p + q)
            sarg = ti * np.sqrt(ia * np.cos(th) ** 2 + ib * np.sin(th) ** 2)
            total += 0.5 * (q - p) * np.dot(w, unit_ball_covariogram(sarg, 2))
        out[i] = a * b * total / (math.pi / 2)
    return out


def _sphere_mean(shape, t, n):
    """Mean of gamma_D(t u) over directions u with n polar nodes."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    d = shape.dim
    if d == 2:
        ang = (np.arange(2 * n) + 0.5) * math.pi / (2 * n)
        u = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        vals = covariogram(shape, t[:, None, None] * u[None, :, :])
        return vals.mean(axis=1)
    x, w = gauss_legendre(n)
    z = 0.5 * (x + 1.0)  # cos(theta) in [0, 1]; gamma(-x) = gamma(x)
    phi = (np.arange(2 * n) + 0.5) * math.pi / (2 * n)
    sz = np.sqrt(1.0 - z * z)
    u = np.stack(
        [
            sz[:, None] * np.cos(phi)[None, :],
            sz[:, None] * np.sin(phi)[None, :],
            np.broadcast_to(z[:, None], (n, 2 * n)),
        ],
        axis=-1,
    )
    vals = covariogram(shape, t[:, None, None, None] * u[None])
    return 0.5 * np.einsum("j,ijk->i", w, vals) / (2 * n)


def isotropic_covariogram(shape, t, rtol=1e-9):
    """Directional mean of the covariogram, bar gamma_D(t).

    Balls are exact. Boxes use the closed-form angular integral in d = 2 and
    a Gauss-Legendre polar integral over that closed form in d = 3, split at
    the facet transitions. Ellipsoids use sphere quadrature with node
    doubling until successive estimates differ by < rtol * volume.
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    in_shape = t.shape
    t = t.ravel()
    d = shape.dim
    vol = volume(shape)
    if len(t) == 0:
        out = t.copy()
    elif d == 1 or shape.kind == "ball":
        out = covariogram(shape, np.concatenate([t[:, None], np.zeros((len(t), d - 1))], axis=1))
    elif shape.kind == "box" and d == 2:
        out = _rect_isotropic(t, 2 * shape.size[0], 2 * shape.size[1])
    elif d == 2:
        n = 32
        out = _ellipse_isotropic(t, *shape.size, n)
        while n < 4096:
            n *= 2
            new = _ellipse_isotropic(t, *shape.size, n)
            done = np.max(np.abs(new - out)) < rtol * vol
            out = new
            if done:
                break
    else:
        n = 32 if shape.kind == "box" else 64
        fn = (lambda tt, k: _box3_isotropic(tt, shape.size, k)) if shape.kind == "box" else (
            lambda tt, k: _sphere_mean(shape, tt, k))
        out = fn(t, n)
        while n < 4096:
            n *= 2
            new = fn(t, n)
            done = np.max(np.abs(new - out)) < rtol * vol
            out = new
            if done:
                break
    out = np.where(t >= 2 * shape.bounding_radius, 0.0, out)
    return float(out[0]) if scalar else out.reshape(in_shape)


def covariogram_breakpoints(shape):
    """Distances where bar gamma_D may fail to be smooth."""
    if shape.kind == "ball":
        return (2 * shape.size[0],)
    if shape.kind == "ellipsoid":
        return tuple(sorted({2 * s for s in shape.size}))
    a = shape.size
    pts = {2 * x for x in a}
    pts |= {2 * math.hypot(x, y) for i, x in enumerate(a) for y in a[i + 1:]}
    pts.add(2 * shape.bounding_radius)
    return tuple(sorted(pts))


def gamma_prime_zero(shape):
    """Right derivative of the isotropic covariogram at 0 for a full-dimensional body."""
    d = shape.dim
    return -kappa(d - 1) / (d * kappa(d)) * surface_measure(shape)


def contains(shape, points):
    """Closed membership test; ``points`` has shape (..., d)."""
    p = np.asarray(points, dtype=float)
    if shape.kind == "ball":
        return np.einsum("...i,...i->...", p, p) <= shape.size[0] ** 2
    if shape.kind == "box":
        return np.all(np.abs(p) <= np.asarray(shape.size), axis=-1)
    q = p / np.asarray(shape.size)
    return np.einsum("...i,...i->...", q, q) <= 1.0


def random_rotation(d, rng):
    """Haar-distributed element of SO(d)."""
    if d == 1:
        return np.ones((1, 1))
    if d == 2:
        a = rng.uniform(0.0, 2 * math.pi)
        c, s = math.cos(a), math.sin(a)
        return np.array([[c, -s], [s, c]])
    g = rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def is_rotation(M, tol=1e-12):
    M = np.asarray(M, dtype=float)
    return (
        M.ndim == 2
        and M.shape[0] == M.shape[1]
        and np.allclose(M.T @ M, np.eye(len(M)), rtol=0, atol=tol)
        and abs(np.linalg.det(M) - 1.0) <= tol
    )


@dataclass
class RadialProfile:
    """A sampled radial function with monotone-cubic interpolation.

    Inside ``[t[0], t[-1]]`` values interpolate the samples exactly; beyond
    ``t[-1]`` the profile continues as ``v[-1] * (t / t[-1]) ** tail_exponent``.
    """

    t: np.ndarray
    v: np.ndarray
    tail_exponent: float = -math.inf
    _interp: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.t.ndim != 1 or self.t.shape != self.v.shape or len(self.t) < 2:
            raise ValueError("profile needs matching 1-d abscissae and values")
        if self.t[0] < 0 or np.any(np.diff(self.t) <= 0):
            raise ValueError("abscissae must be nonnegative and strictly increasing")
        self._interp = PchipInterpolator(self.t, self.v, extrapolate=False)

    @property
    def support_end(self):
        """Finite right end of the support, if the tail is identically zero."""
        if self.v[-1] == 0.0 or self.tail_exponent == -math.inf:
            return self.t[-1]
        return math.inf

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < self.t[0], self.v[0], 0.0)
        inside = (x >= self.t[0]) & (x <= self.t[-1])
        out = np.where(inside, self._interp(np.clip(x, self.t[0], self.t[-1])), out)
        beyond = x > self.t[-1]
        if np.any(beyond) and self.v[-1] != 0.0 and self.tail_exponent != -math.inf:
            with np.errstate(over="ignore", divide="ignore"):
                tail = self.v[-1] * (x / self.t[-1]) ** self.tail_exponent
            out = np.where(beyond, tail, out)
        return out


def covariogram_profile(shape, n=2001):
    """Isotropic covariogram sampled on [0, 2 * bounding_radius]."""
    t = np.linspace(0.0, 2 * shape.bounding_radius, n)
    return RadialProfile(t, isotropic_covariogram(shape, t))
