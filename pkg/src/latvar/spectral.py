"""Fourier and Hankel transforms of indicators and covariograms, and the
kernels of the Tauberian argument.

Fourier convention: f^(xi) = int f(x) exp(-2 pi i x.xi) dx.
"""

import math

import numpy as np

from .geometry import RadialProfile, gauss_legendre, gamma_prime_zero, volume
from .special import averaged_limit, bessel_j, bessel_lambda, complex_gamma, kappa


class SlowDecay(ValueError):
    """Radial function decays too slowly for the Hankel integral to converge."""


class NonConvergence(RuntimeError):
    """Oscillatory quadrature did not settle to the requested tolerance."""


def fourier_indicator(shape, xi):
    """Fourier transform of the indicator of ``shape`` at frequencies ``xi``.

    Every supported body is centrally symmetric, so the transform is real and
    is returned as a float array of shape ``xi.shape[:-1]``.
    """
    xi = np.asarray(xi, dtype=float)
    d = shape.dim
    if xi.shape[-1] != d:
        raise ValueError("frequency dimension does not match shape")
    if shape.kind == "box":
        a = np.asarray(shape.size)
        return np.prod(2 * a * np.sinc(2 * a * xi), axis=-1)
    if shape.kind == "ball":
        R = shape.size[0]
        rho = np.linalg.norm(xi, axis=-1)
        return volume(shape) * bessel_lambda(d / 2, 2 * math.pi * R * rho)
    s = np.asarray(shape.size)
    rho = np.linalg.norm(xi * s, axis=-1)
    return volume(shape) * bessel_lambda(d / 2, 2 * math.pi * rho)


def _orthant_directions(d, n):
    """Nodes and weights (summing to 1) on the positive orthant of S^{d-1}."""
    x, w = gauss_legendre(n)
    if d == 2:
        th = math.pi / 4 * (x + 1)
        return np.stack([np.cos(th), np.sin(th)], axis=-1), w / 2
    z = 0.5 * (x + 1)
    ph = math.pi / 4 * (x + 1)
    sz = np.sqrt(1 - z * z)
    u = np.stack(
        [
            (sz[:, None] * np.cos(ph)[None, :]).ravel(),
            (sz[:, None] * np.sin(ph)[None, :]).ravel(),
            np.repeat(z, n),
        ],
        axis=-1,
    )
    return u, (w[:, None] * w[None, :]).ravel() / 4


class SpectralDensity:
    """Directional mean of |I_D^|^2, i.e. the Hankel transform of bar gamma_D.

    Balls (and all intervals) are closed form. Boxes and ellipsoids average
    |I_D^(rho u)|^2 over the positive orthant of directions (both are symmetric
    under coordinate reflections) with Gauss-Legendre nodes, doubling the
    node count until the relative change is below ``rtol``.
    """

    def __init__(self, shape, rtol=1e-8):
        self.shape = shape
        self.rtol = rtol
        self.dim = shape.dim
        self.mode = "closed_form" if shape.rotation_invariant else "sphere_quadrature"

    @property
    def envelope_mean(self):
        """lim of the running mean of rho^{d+1} * density, when known in closed form.

        For a ball of radius R this follows from J_nu(z)^2 ~ (1 + oscillation) / (pi z).
        """
        if self.dim == 1:
            return 1.0 / (2 * math.pi ** 2)
        if self.shape.kind == "ball":
            return self.shape.size[0] ** (self.dim - 1) / (2 * math.pi ** 2)
        return None

    def _start_order(self, rho):
        size = 2 * self.shape.bounding_radius
        # powers of two keep the node cache small
        return 1 << max(4, (16 + 4 * int(math.ceil(rho * size)) - 1).bit_length())

    def _mean_sq(self, rho, n):
        """Direction average of |I^|^2 with n-point rules, for a batch of radii."""
        u, w = _orthant_directions(self.dim, n)
        per = max(1, 4_000_000 // (len(u) * self.dim))
        out = np.empty(len(rho))
        for s in range(0, len(rho), per):
            pts = rho[s:s + per, None, None] * u[None, :, :]
            out[s:s + per] = fourier_indicator(self.shape, pts) ** 2 @ w
        return out

    def _quadrature(self, rho):
        """Batched quadrature: radii sharing a node count are evaluated together."""
        out = np.empty(len(rho))
        order = np.array([self._start_order(p) for p in rho])
        pending = np.arange(len(rho))
        while len(pending):
            next_pending = []
            for n in np.unique(order[pending]):
                idx = pending[order[pending] == n]
                if n > 8192:
                    raise NonConvergence(f"sphere quadrature did not settle at rho={rho[idx[0]]}")
                coarse = self._mean_sq(rho[idx], n)
                fine = self._mean_sq(rho[idx], 2 * n)
                ok = np.abs(fine - coarse) <= self.rtol * np.abs(fine) + 1e-300
                out[idx[ok]] = fine[ok]
                order[idx[~ok]] = 2 * n
                next_pending.append(idx[~ok])
            pending = np.concatenate(next_pending)
        return out

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.mode == "closed_form":
            e = np.zeros(rho.shape + (self.dim,))
            e[..., 0] = rho
            return fourier_indicator(self.shape, e) ** 2
        return self._quadrature(rho.ravel()).reshape(rho.shape)


def spectral_density(shape, rho):
    return SpectralDensity(shape)(rho)


def _segment_sums(g, start, h, n_seg, nodes=24):
    """Integrals of g over [start + k h, start + (k+1) h], k < n_seg."""
    x, w = gauss_legendre(nodes)
    k = np.arange(n_seg)[:, None]
    pts = start + h * (k + 0.5 * (x[None, :] + 1))
    return 0.5 * h * (g(pts) @ w)


def _poisson_envelope(r, a, d):
    return (a * a + r * r) ** (-(d + 1) / 2)


def _poisson_envelope_transform(rho, a, d):
    # Fourier transform of (a^2 + |x|^2)^{-(d+1)/2} in R^d
    c_d = math.gamma((d + 1) / 2) / math.pi ** ((d + 1) / 2)
    return np.exp(-2 * math.pi * a * rho) / (c_d * a)


def hankel_transform(f, rho, d, *, support=None, frequency=0.0, envelope=None,
                     envelope_scale=1.0, n_segments=4000, atol=None, breakpoints=()):
    """Radial Fourier transform 2 pi rho^{1-d/2} int_0^inf r^{d/2} J_{d/2-1}(2 pi rho r) f(r) dr.

    ``f`` is a :class:`RadialProfile` or a vectorised callable. The integral
    is cut into segments of half the combined oscillation period (kernel
    frequency ``rho`` plus the integrand's own ``frequency``). Finite supports
    are integrated directly, with extra segment edges at ``breakpoints``
    (kinks of f); infinite ones use repeated averaging of the partial sums
    over the segments.

    ``envelope=c`` subtracts c (a^2 + r^2)^{-(d+1)/2} from f before
    integrating and adds back its closed-form transform. This removes the
    non-oscillating r^{-d-1} mean that spectral densities carry, which
    averaging cannot accelerate.
    """
    if isinstance(f, RadialProfile):
        if support is None:
            support = f.support_end
        if support == math.inf and f.tail_exponent >= -d:
            raise SlowDecay(f"tail exponent {f.tail_exponent} >= -d")
    support = math.inf if support is None else support
    f0 = abs(float(np.asarray(f(np.array([0.0])))[0]))
    if atol is None:
        atol = 1e-9 * max(f0, 1e-300)
    rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
    out = np.empty_like(rho_arr)
    nu = d / 2 - 1
    for i, p in enumerate(rho_arr):
        a = envelope_scale

        def g(r, p=p):
            base = f(r)
            if envelope is not None:
                base = base - envelope * _poisson_envelope(r, a, d)
            # 2 pi rho^{1-d/2} r^{d/2} J_nu(2 pi rho r) = d kappa_d r^{d-1} Lambda_nu(2 pi rho r)
            return d * kappa(d) * r ** (d - 1) * bessel_lambda(nu, 2 * math.pi * p * r) * base

        h = 0.5 / (p + frequency) if p + frequency > 0 else math.inf
        if support < math.inf:
            edges = sorted({0.0, support, *(b for b in breakpoints if 0 < b < support)})
            total = 0.0
            for lo, hi in zip(edges[:-1], edges[1:]):
                n = max(4, int(math.ceil((hi - lo) / h))) if h < math.inf else 4
                total += float(np.sum(_segment_sums(g, lo, (hi - lo) / n, n)))
        else:
            if h == math.inf:
                raise NonConvergence("non-oscillating infinite integral needs a finite support")
            n = n_segments
            while True:
                partial = np.cumsum(_segment_sums(g, 0.0, h, n))
                total, err = averaged_limit(partial)
                if err <= atol:
                    break
                if n >= 8 * n_segments:
                    raise NonConvergence(f"Hankel tail did not settle (change {err:.2e})")
                n *= 2
        if envelope is not None:
            total += envelope * float(_poisson_envelope_transform(p, a, d))
        out[i] = total
    return out[0] if np.ndim(rho) == 0 else out


def covariogram_from_density(density, t, **kw):
    """Inverse transform: bar gamma_D(t) from its spectral density."""
    shape = density.shape
    d = shape.dim
    c = density.envelope_mean
    if c is None:
        c = -gamma_prime_zero(shape) / (2 * math.pi ** 2 * kappa(d - 1))
    kw.setdefault("frequency", 2 * shape.bounding_radius)
    kw.setdefault("envelope_scale", shape.bounding_radius)
    return hankel_transform(density, t, d, envelope=c, atol=1e-9 * volume(shape), **kw)


def tauberian_chain(shape, h, surface_constant=None):
    """(1/h) int_0^inf (c - 2 pi (h rho)^{1-d/2} J_{d/2-1}(2 pi h rho)) rho^{d-1} density(rho) d rho.

    With c = d kappa_d (the default) this equals (bar gamma(0) - bar gamma(h)) / h
    and tends to -bar gamma'(0) as h -> 0. Any other constant makes it blow
    up like (c - d kappa_d) vol / (d kappa_d h).
    """
    d = shape.dim
    dens = SpectralDensity(shape)
    c = d * kappa(d) if surface_constant is None else surface_constant
    # int rho^{d-1} density = bar gamma(0) / (d kappa_d)
    g0 = covariogram_from_density(dens, 0.0)
    gh = covariogram_from_density(dens, h)
    return (c / (d * kappa(d)) * g0 - gh) / h


def kernel_L(u, d):
    """pi^{-3/2} Gamma((d+1)/2) / Gamma(d/2) * (1 - Gamma(d/2) J_{d/2-1}(2 pi u) / (pi u)^{d/2-1})."""
    c = math.pi ** -1.5 * math.gamma((d + 1) / 2) / math.gamma(d / 2)
    u = np.asarray(u, dtype=float)
    return c * (1.0 - bessel_lambda(d / 2 - 1, 2 * math.pi * u))


def kernel_K1(s):
    s = np.asarray(s, dtype=float)
    return np.where(s > 0, np.exp(-np.abs(s)), 0.0)


def kernel_K2(s, d):
    s = np.asarray(s, dtype=float)
    return np.exp(s) * kernel_L(np.exp(-s), d)


def k1hat(tau):
    return 1.0 / (1.0 + 2j * math.pi * tau)


def k2hat_closed(tau, d):
    """Closed form of int_0^inf u^{-2 + 2 pi i tau} L(u) du."""
    a = (d + 1) / 2
    pref = np.exp((-2j * math.pi * tau - 0.5) * math.log(math.pi)) / (1 - 2j * math.pi * tau)
    return pref * complex_gamma(a) * complex_gamma(0.5 + 1j * math.pi * tau) / complex_gamma(a - 1j * math.pi * tau)


def k2hat_numeric(tau, d, tol=1e-7, n_segments=3000):
    """int_0^inf u^{-2 + 2 pi i tau} L(u) du by quadrature.

    On [0, 1] L(u) / u^2 is an entire power series, integrated term by term.
    On [1, inf) the constant part of L integrates exactly and the Bessel part
    is summed over half-period segments with repeated averaging.
    """
    nu = d / 2 - 1
    c = math.pi ** -1.5 * math.gamma((d + 1) / 2) / math.gamma(d / 2)
    w = 2j * math.pi * tau
    # 1 - Lambda_nu(2 pi u) = sum_{k>=1} (-1)^{k+1} (pi u)^{2k} / (k! (nu+1)_k)
    head = 0j
    coef = 1.0
    for k in range(1, 80):
        coef *= math.pi ** 2 / (k * (nu + k))
        term = (-1) ** (k + 1) * coef / (2 * k - 1 + w)
        head += term
        if abs(term) < 1e-18:
            break
    head *= c
    const_tail = c / (1 - w)

    def g(u):
        return u ** (-2 + w) * bessel_lambda(nu, 2 * math.pi * u)

    partial = np.cumsum(_segment_sums(g, 1.0, 0.5, n_segments))
    osc, err = averaged_limit(partial)
    if err > tol:
        raise NonConvergence(f"K2 transform tail did not settle (change {err:.2e})")
    return complex(head + const_tail - c * osc)
