"""Variance of the lattice point count in r M D + x, by three routes.

* spectral: sum over nonzero dual vectors of |Fourier transform|^2 (fixed
  orientation) or of the directional spectral density (random rotation);
* Monte Carlo: direct counting over random shifts (and rotations);
* asymptotic: intensity^2 * C_T * H^{d-1}(boundary) * r^{d-1}.

Throughout, ``intensity`` is 1 / det A. The variance of the count equals
intensity^2 * sum_{xi != 0} |I_{rMD}^(xi)|^2; the square of the intensity
drops out only for unimodular lattices.
"""

from dataclasses import dataclass, field
import functools
import math

import numpy as np
from scipy import special as sp

from .geometry import (
    Shape,
    covariogram_breakpoints,
    gamma_prime_zero,
    is_rotation,
    isotropic_covariogram,
    random_rotation,
    surface_measure,
    volume,
    contains,
    RadialProfile,
)
from .lattice import _integer_box, _grid, epstein_sum, lattice_constant, shells
from .spectral import SpectralDensity, fourier_indicator, hankel_transform
from .special import kappa

MAX_DUAL_POINTS = 4 * 10**7


class TailBoundFailure(RuntimeError):
    """The truncated spectral sum could not meet its tolerance within enumeration limits."""


@dataclass
class VarianceEstimate:
    value: float
    route: str
    uncertainty: float = 0.0
    meta: dict = field(default_factory=dict)


@dataclass
class PhiProfile:
    radii: np.ndarray
    phi: np.ndarray
    running_mean: np.ndarray
    meta: dict = field(default_factory=dict)


def mean_count(lat, shape, r):
    return lat.intensity * r ** lat.dim * volume(shape)


def asymptote(lat, shape, r):
    """Mean-sense prediction intensity^2 * C_T * H^{d-1} * r^{d-1} (Phi = 1)."""
    value = lat.intensity ** 2 * lattice_constant(lat) * surface_measure(shape) * r ** (lat.dim - 1)
    return VarianceEstimate(value, "asymptotic", 0.0, {"r": r})


def running_mean(radii, phi):
    """(1/r_i) int_0^{r_i} Phi with the trapezoid rule and Phi constant on (0, r_0]."""
    radii = np.asarray(radii, dtype=float)
    phi = np.asarray(phi, dtype=float)
    area = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(radii) * (phi[1:] + phi[:-1]))])
    return (phi[0] * radii[0] + area) / radii


# --- spectral route -------------------------------------------------------


@functools.lru_cache(maxsize=16)
def _dual_shells(key, R):
    G = np.frombuffer(key[1], dtype=float).reshape(key[0], key[0])
    return shells(G, R)


def dual_shells(lat, R, max_points=MAX_DUAL_POINTS):
    d = lat.dim
    if (2 * R) ** d * lat.det > max_points:
        raise TailBoundFailure(f"dual enumeration to radius {R:.4g} exceeds {max_points} points")
    return _dual_shells((d, lat.dual.tobytes()), float(R))


def _density_tail(dens, X, d, upto=60.0):
    """int_X^inf density(s) d kappa_d s^{d-1} ds.

    Quadrature up to max(X, upto / size), then the mean envelope. Only used
    when the envelope mean is known in closed form.
    """
    size = 2 * dens.shape.bounding_radius
    c = dens.envelope_mean
    X1 = max(X, upto / size)
    total = 0.0
    if X1 > X:
        from .geometry import gauss_legendre

        n = int(math.ceil((X1 - X) * 2 * size)) + 1
        x, w = gauss_legendre(24)
        h = (X1 - X) / n
        pts = X + h * (np.arange(n)[:, None] + 0.5 * (x[None, :] + 1))
        total = 0.5 * h * float(np.sum((dens(pts) * d * kappa(d) * pts ** (d - 1)) @ w))
    return total + c * d * kappa(d) / X1


def _tail_estimate(lat, r, R, dens, rho, mult, e, tailsum):
    d = lat.dim
    if dens.envelope_mean is not None:
        # continuum tail: intensity^2 r^d / det(dual) * int_{rR}^inf density d kappa_d s^{d-1} ds
        return lat.intensity ** 2 * r ** d * lat.det * _density_tail(dens, r * R, d)
    outer = (rho >= 0.5 * R) & (rho <= R)
    wts = mult[outer] * rho[outer] ** (-d - 1.0)
    return float(np.dot(wts, e[outer]) / np.sum(wts)) * tailsum


def _shell_sum(lat, shape, r, R, dens, term_fn, max_points=MAX_DUAL_POINTS):
    """Truncated dual sum over shells; ``term_fn(rho)`` is the per-vector term."""
    rho, mult = dual_shells(lat, R, max_points)
    return _truncated_sum(lat, r, R, dens, rho, mult, mult * term_fn(rho))


def _truncated_sum(lat, r, R, dens, rho, mult, terms):
    """Sum of ``terms`` (dual norms rho, multiplicities mult) plus a tail estimate.

    Terms already include intensity^2 and the r^{2d} scaling. Returns the
    estimate, its uncertainty (change against truncation at R/2) and meta
    data with the envelope bound 2 max(rho^{d+1} term) * sum_{|xi| > R} |xi|^{-d-1}.
    """
    d = lat.dim
    e = terms / mult * rho ** (d + 1)
    epstein = epstein_sum(lat, d + 1).value
    w = mult * rho ** (-d - 1.0)
    values = []
    for RR in (R, 0.5 * R):
        inside = rho <= RR * (1 + 1e-12)
        tailsum = max(epstein - math.fsum(w[inside]), 0.0)
        est = _tail_estimate(lat, r, RR, dens, rho[inside], mult[inside], e[inside], tailsum)
        values.append((math.fsum(terms[inside]) + est, est, tailsum))
    (value, est, tailsum), (half, _, _) = values
    outer = rho >= 0.5 * R
    bound = 2.0 * float(np.max(e[outer])) * tailsum
    meta = {"truncation_radius": R, "n_shells": len(rho), "tail_estimate": est, "tail_bound": bound}
    return value, abs(value - half), meta


def _separable_axis_sum(half, spacing, tol):
    """sum over m in Z of (sin(2 pi half m spacing) / (pi m spacing))^2, with m = 0 giving (2 half)^2.

    Terms up to |m| <= M are summed; the rest is replaced by its mean
    (trigamma) minus the integral of the oscillating part.
    """
    theta = 2 * half * spacing
    eps = theta - round(theta)
    om = 2 * math.pi * abs(eps)
    scale = 1.0 / (math.pi * spacing) ** 2
    M = int(min(max(1000, math.ceil(scale * (om * om + 1) / (12 * tol))), 4 * 10**6))
    total = 0.0
    for start in range(1, M + 1, 2_000_000):
        m = np.arange(start, min(start + 2_000_000, M + 1), dtype=float)
        total += math.fsum(np.sin(math.pi * theta * m) ** 2 / m ** 2)
    X = M + 0.5
    osc = 1.0 / X if om == 0 else math.cos(om * X) / X - om * (math.pi / 2 - sp.sici(om * X)[0])
    tail = float(sp.polygamma(1, M + 1)) - osc
    bound = scale * (om * om + 1) / (12 * M)
    return (2 * half) ** 2 + scale * (2 * total + tail), bound


def _is_separable(lat, shape, M):
    if shape.kind != "box" and shape.dim != 1:
        return False
    A = lat.generator
    diag = np.allclose(A, np.diag(np.diag(A)), rtol=0, atol=1e-14)
    ident = M is None or np.allclose(M, np.eye(lat.dim), rtol=0, atol=1e-12)
    return diag and ident


def variance_spectral(lat, shape, r, M=None, tol=1e-2, R=None, max_points=MAX_DUAL_POINTS):
    """Variance for fixed orientation M (identity by default), spectral route.

    ``tol`` is relative: the truncation tail bound must fall below
    tol * value. Axis-aligned boxes on diagonal lattices (and all intervals)
    sum one axis at a time, since the dual sum then factorises.
    """
    d = lat.dim
    if M is not None and not is_rotation(M, 1e-10):
        raise ValueError("M is not a rotation")
    a2 = lat.intensity ** 2
    if _is_separable(lat, shape, M):
        half = [r * a for a in shape.size]  # intervals have a single size parameter
        spacing = np.abs(np.diag(lat.dual))
        # the 1D tails are cheap, so aim well below both tol and 1e-6
        target = 0.1 * min(tol, 1e-6)
        sums, errs = zip(*(_separable_axis_sum(h, s, target) for h, s in zip(half, spacing)))
        zero = math.prod((2 * h) ** 2 for h in half)
        value = a2 * (math.prod(sums) - zero)
        bound = a2 * sum(
            errs[i] * math.prod(sums[j] + errs[j] for j in range(d) if j != i) for i in range(d)
        )
        return VarianceEstimate(max(value, 0.0), "spectral", bound, {"method": "separable"})
    if shape.rotation_invariant:
        return variance_isotropic(lat, shape, r, tol=tol, R=R, max_points=max_points)
    Mm = np.eye(d) if M is None else np.asarray(M, dtype=float)
    dens = SpectralDensity(shape)

    def evaluate(R):
        from .lattice import dual_points_in_ball

        if (2 * R) ** d * lat.det > max_points:
            raise TailBoundFailure(f"dual enumeration to radius {R:.4g} exceeds limits")
        xi = dual_points_in_ball(lat, R)
        terms = a2 * r ** (2 * d) * fourier_indicator(shape, r * (xi @ Mm)) ** 2
        rho = np.linalg.norm(xi, axis=1)
        return _truncated_sum(lat, r, R, dens, rho, np.ones(len(rho), dtype=np.int64), terms)

    return _grow(evaluate, lat, tol, R, "spectral")


def _grow(evaluate, lat, tol, R, route):
    """Double R until two successive truncations agree to ``tol`` (relative)."""
    fixed = R is not None
    R = R if fixed else 16.0 * float(np.min(np.linalg.norm(lat.dual, axis=0)))
    prev = math.inf
    while True:
        try:
            value, unc, meta = evaluate(R)
        except TailBoundFailure as exc:
            raise TailBoundFailure(f"tolerance {tol:g} not reached: {exc}") from None
        if fixed or max(unc, 0.5 * prev) <= tol * abs(value) + 1e-13:
            meta["method"] = "dual_sum"
            return VarianceEstimate(max(value, 0.0), route, max(unc, 0.5 * prev) if not fixed else unc, meta)
        prev = unc
        R *= 2.0


def variance_isotropic(lat, shape, r, tol=1e-2, R=None, method="spectral", max_points=MAX_DUAL_POINTS):
    """Variance averaged over uniform shifts and Haar rotations.

    method="spectral" sums the directional spectral density over dual
    shells; method="spatial" uses the equivalent finite sum
    intensity * sum_{t in T} r^d bar gamma_D(|t| / r) - (intensity r^d vol)^2.
    """
    d = lat.dim
    if method == "spatial":
        return _isotropic_spatial(lat, shape, r)
    if method != "spectral":
        raise ValueError(f"unknown method {method!r}")
    dens = SpectralDensity(shape)
    a2 = lat.intensity ** 2

    def evaluate(R):
        return _shell_sum(lat, shape, r, R, dens, lambda rho: a2 * r ** (2 * d) * dens(r * rho), max_points)

    return _grow(evaluate, lat, tol, R, "spectral")


def _isotropic_spatial(lat, shape, r, lattice_shells=None):
    d = lat.dim
    reach = 2 * r * shape.bounding_radius
    if lattice_shells is None:
        rho, mult = shells(lat.generator, reach)
    else:
        rho, mult = lattice_shells
    keep = rho < reach
    g = isotropic_covariogram(shape, rho[keep] / r)
    vol = volume(shape)
    alpha = lat.intensity
    terms = alpha * r ** d * mult[keep] * g
    second = alpha * r ** d * vol
    value = math.fsum(np.concatenate([terms, [second, -second * second]]))
    unc = 1e-12 * float(math.fsum(terms) + second)
    return VarianceEstimate(max(value, 0.0), "spatial", unc, {"method": "spatial", "n_shells": int(keep.sum())})


# --- Monte Carlo route ------------------------------------------------------


def stream_seeds(seed, n_streams):
    """Per-stream seeds: children of numpy's SeedSequence(seed), in spawn order."""
    return np.random.SeedSequence(seed).spawn(n_streams)


def _candidate_offsets(lat, radius):
    d = lat.dim
    Ginv = np.linalg.inv(lat.generator)
    w = np.linalg.norm(Ginv, axis=1) * radius
    lo = np.floor(-w).astype(np.int64) - 1
    hi = np.ceil(1 + w).astype(np.int64) + 1
    return _grid(lo, hi)


def _count_batch(lat, shape, r, K, x, Ms):
    # cell offsets: A^{-1} x lies in [0,1)^d for x in the fundamental cell
    base = np.floor(x @ np.linalg.inv(lat.generator).T + 1e-12)
    n = base[:, None, :] + K[None, :, :]
    p = n @ lat.generator.T - x[:, None, :]
    if Ms is not None:
        p = np.einsum("bkj,bji->bki", p, Ms)  # rows of M^T p
    return np.count_nonzero(contains(shape, p / r), axis=1)


def mc_counts(lat, shape, r, n, seed, isotropic=False, n_streams=8, batch=None):
    """Counts for n random placements, drawn from ``n_streams`` seeded streams."""
    d = lat.dim
    K = _candidate_offsets(lat, r * shape.bounding_radius)
    if batch is None:
        batch = max(1, int(4_000_000 // (len(K) * d)))
    sizes = [n // n_streams + (1 if i < n % n_streams else 0) for i in range(n_streams)]
    out = []
    for ss, m in zip(stream_seeds(seed, n_streams), sizes):
        rng = np.random.default_rng(ss)
        done = 0
        while done < m:
            b = min(batch, m - done)
            x = rng.random((b, d)) @ lat.generator.T
            Ms = np.stack([random_rotation(d, rng) for _ in range(b)]) if isotropic and d > 1 else None
            out.append(_count_batch(lat, shape, r, K, x, Ms))
            done += b
    return np.concatenate(out) if out else np.zeros(0, dtype=int)


def variance_mc(lat, shape, r, isotropic=False, n=10_000, seed=0, n_streams=8):
    """Monte Carlo variance of the count; uncertainty is the standard error."""
    if n < 100:
        raise ValueError("need at least 100 samples")
    counts = mc_counts(lat, shape, r, n, seed, isotropic, n_streams)
    dev2 = (counts - mean_count(lat, shape, r)) ** 2
    value = float(dev2.mean())
    se = float(dev2.std(ddof=1) / math.sqrt(n))
    meta = {
        "samples": n,
        "mean_count": float(counts.mean()),
        "mean_se": float(counts.std(ddof=1) / math.sqrt(n)),
    }
    return VarianceEstimate(value, "monte_carlo", se, meta)


# --- Phi and Psi profiles -----------------------------------------------------


def psi_profile(shape, t_grid):
    """Psi(t) = 2 pi^2 kappa_{d-1} t^{d+1} density(t) / (-bar gamma'(0))."""
    d = shape.dim
    t = np.asarray(t_grid, dtype=float)
    g1 = gamma_prime_zero(shape)
    if not (math.isfinite(g1) and g1 < 0):
        raise ValueError("covariogram slope at 0 must be finite and negative")
    dens = SpectralDensity(shape)
    psi = 2 * math.pi ** 2 * kappa(d - 1) * t ** (d + 1) * dens(t) / (-g1)
    return RadialProfile(t, psi, tail_exponent=0.0)


def phi_profile(lat, shape, r_grid, tol=2e-2, method=None, R=None, identity_checks=5):
    """Phi(r) = isotropic variance / (intensity^2 C_T H^{d-1} r^{d-1}) on a grid.

    ``method`` defaults to "spectral" for balls in d >= 2 (closed form
    densities) and "spatial" otherwise. The weighted-Psi identity
    Phi(r) = sum |xi|^{-d-1} Psi(r|xi|) / sum |xi|^{-d-1} is checked on the
    truncated dual sums at ``identity_checks`` radii; the largest relative
    discrepancy is stored in ``meta["identity_error"]``.
    """
    d = lat.dim
    r = np.asarray(r_grid, dtype=float)
    if r.ndim != 1 or len(r) < 2 or r[0] <= 0 or np.any(np.diff(r) <= 0):
        raise ValueError("r_grid must be increasing and positive")
    if method is None:
        method = "spectral" if shape.rotation_invariant and d > 1 else "spatial"
    H = surface_measure(shape)
    E = epstein_sum(lat, d + 1).value
    C_T = E / (2 * math.pi ** 2 * d * kappa(d))
    norm = lat.intensity ** 2 * C_T * H * r ** (d - 1)
    dens = SpectralDensity(shape)
    meta = {"method": method}
    if method == "spectral":
        if R is None:
            R = _grow(
                lambda RR: _shell_sum(lat, shape, r[-1], RR, dens,
                                      lambda rho: lat.intensity ** 2 * r[-1] ** (2 * d) * dens(r[-1] * rho)),
                lat, tol, None, "spectral",
            ).meta["truncation_radius"]
        var = np.empty_like(r)
        bound = np.empty_like(r)
        for i, ri in enumerate(r):
            v, b, _ = _shell_sum(lat, shape, ri, R, dens,
                                 lambda rho, ri=ri: lat.intensity ** 2 * ri ** (2 * d) * dens(ri * rho))
            var[i], bound[i] = v, b
        meta["truncation_radius"] = R
        meta["max_relative_bound"] = float(np.max(bound / np.maximum(var, 1e-300)))
    elif method == "spatial":
        lattice_shells = shells(lat.generator, 2 * r[-1] * shape.bounding_radius)
        var = np.array([_isotropic_spatial(lat, shape, ri, lattice_shells).value for ri in r])
    else:
        raise ValueError(f"unknown method {method!r}")
    phi = var / norm
    meta["identity_error"] = _psi_identity_error(lat, shape, r, norm, identity_checks, dens, E)
    return PhiProfile(r, phi, running_mean(r, phi), meta)


def _psi_identity_error(lat, shape, r, norm, k, dens, E, R_check=None):
    if k <= 0:
        return None
    d = lat.dim
    idx = np.unique(np.linspace(0, len(r) - 1, k).astype(int))
    if not shape.rotation_invariant:
        idx = idx[:2]  # quadrature densities: keep the check cheap
    R_check = R_check or 6.0 * float(np.min(np.linalg.norm(lat.dual, axis=0)))
    rho, mult = dual_shells(lat, R_check)
    g1 = -gamma_prime_zero(shape)
    worst = 0.0
    for i in idx:
        ri = r[i]
        dv = dens(ri * rho)
        direct = math.fsum(mult * lat.intensity ** 2 * ri ** (2 * d) * dv) / norm[i]
        psi = 2 * math.pi ** 2 * kappa(d - 1) * (ri * rho) ** (d + 1) * dv / g1
        via_psi = math.fsum(mult * rho ** (-d - 1.0) * psi) / E
        worst = max(worst, abs(direct - via_psi) / max(abs(direct), 1e-300))
    return worst
