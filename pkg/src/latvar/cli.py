"""Command line front end: ``latvar {variance,constant,phi,covariogram,kernel-check}``.

Scenarios come from flags, optionally on top of a JSON file given with
``--scenario`` (flags win). Output is CSV with 17 significant digits or
JSON; both are deterministic for a fixed scenario and seed.
"""

import argparse
import json
import math
import sys

import numpy as np

from .geometry import Shape, isotropic_covariogram
from .lattice import SingularGenerator, epstein_sum, lattice_constant, make_lattice
from .spectral import NonConvergence, k2hat_closed, k2hat_numeric
from .variance import (
    TailBoundFailure,
    asymptote,
    mean_count,
    phi_profile,
    running_mean,
    variance_isotropic,
    variance_mc,
    variance_spectral,
)

VARIANCE_COLUMNS = ["r", "mean", "var_spectral", "var_mc", "mc_se", "asymptote", "phi", "phi_runmean"]


class ScenarioError(ValueError):
    pass


# --- parsing -----------------------------------------------------------------


def parse_matrix(text):
    """'1,0;0,1' (rows separated by ';') or a nested list."""
    if isinstance(text, str):
        rows = [[float(v) for v in row.split(",")] for row in text.replace(" ", "").split(";") if row]
    else:
        rows = [[float(v) for v in row] for row in np.atleast_2d(np.asarray(text, dtype=float))]
    if not rows or any(len(row) != len(rows) for row in rows):
        raise ScenarioError("lattice generator must be a square matrix")
    return np.array(rows)


def parse_shape(spec, dim=None):
    """'ball:R', 'cube:side', 'box:a,b[,c]' (half extents) or 'ellipsoid:a,b[,c]'.

    ``spec`` may also be a dict with keys kind, size and (for ball/cube) dim.
    """
    if isinstance(spec, dict):
        kind, size, dim = spec["kind"], list(np.atleast_1d(spec["size"])), spec.get("dim", dim)
    else:
        kind, _, rest = str(spec).partition(":")
        size = [float(v) for v in rest.split(",") if v]
    kind = kind.strip().lower()
    size = [float(v) for v in size]
    if kind in ("ball", "cube"):
        if dim is None or len(size) != 1:
            raise ScenarioError(f"{kind} needs one size and a dimension")
        return Shape.ball(size[0], dim) if kind == "ball" else Shape.cube(size[0], dim)
    if kind == "box":
        return Shape.box(*size)
    if kind == "ellipsoid":
        return Shape.ellipsoid(*size)
    raise ScenarioError(f"unknown shape kind {kind!r}")


def parse_grid(spec):
    """'start:stop:num' (inclusive linspace), a comma list, or a JSON list."""
    if isinstance(spec, (list, tuple)):
        grid = np.asarray(spec, dtype=float)
    elif ":" in str(spec):
        parts = str(spec).split(":")
        if len(parts) != 3:
            raise ScenarioError("grid must be start:stop:num")
        grid = np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
    else:
        grid = np.array([float(v) for v in str(spec).split(",") if v])
    if grid.size == 0 or not np.all(np.isfinite(grid)) or np.any(np.diff(grid) <= 0):
        raise ScenarioError("grid must be finite and strictly increasing")
    return grid


def fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_table(columns, rows, fmt_name, out, extra=None):
    if fmt_name == "json":
        payload = dict(extra or {})
        payload["rows"] = [
            {c: (None if v is None else (int(v) if isinstance(v, (int, np.integer)) else float(v)))
             for c, v in zip(columns, row)}
            for row in rows
        ]
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        out.write(",".join(columns) + "\n")
        for row in rows:
            out.write(",".join(fmt(v) for v in row) + "\n")


# --- commands ------------------------------------------------------------------


def _scenario_lattice_shape(sc):
    if "lattice" not in sc:
        raise ScenarioError("missing --lattice")
    lat = make_lattice(parse_matrix(sc["lattice"]))
    if "shape" not in sc:
        raise ScenarioError("missing --shape")
    shape = parse_shape(sc["shape"], lat.dim)
    if shape.dim != lat.dim:
        raise ScenarioError("shape and lattice dimensions differ")
    return lat, shape


def cmd_variance(sc, out):
    lat, shape = _scenario_lattice_shape(sc)
    radii = parse_grid(sc.get("r", "1"))
    if radii[0] <= 0:
        raise ScenarioError("radii must be positive")
    routes = sc.get("routes", "spectral,asymptotic")
    routes = set(routes.split(",") if isinstance(routes, str) else routes)
    unknown = routes - {"spectral", "mc", "asymptotic"}
    if unknown:
        raise ScenarioError(f"unknown routes {sorted(unknown)}")
    iso = bool(sc.get("isotropic", False))
    tol = float(sc.get("tol", 1e-2))
    if "mc" in routes and sc.get("seed") is None:
        raise ScenarioError("--seed is required with the mc route")
    rows = []
    spec_vals, asym_vals = [], []
    for r in radii:
        v_spec = v_mc = se = None
        if "spectral" in routes:
            est = variance_isotropic(lat, shape, r, tol=tol) if iso and not shape.rotation_invariant \
                else variance_spectral(lat, shape, r, tol=tol)
            v_spec = est.value
        if "mc" in routes:
            m = variance_mc(lat, shape, r, isotropic=iso, n=int(sc.get("samples", 10_000)), seed=int(sc["seed"]))
            v_mc, se = m.value, m.uncertainty
        a = asymptote(lat, shape, r).value
        rows.append([r, mean_count(lat, shape, r), v_spec, v_mc, se, a if "asymptotic" in routes else None])
        spec_vals.append(v_spec)
        asym_vals.append(a)
    if "spectral" in routes:
        phi = np.array(spec_vals) / np.array(asym_vals)
        runmean = running_mean(radii, phi) if len(radii) > 1 else phi
        for row, p, m in zip(rows, phi, runmean):
            row += [p, m]
    else:
        for row in rows:
            row += [None, None]
    write_table(VARIANCE_COLUMNS, rows, sc.get("format", "csv"), out)


def cmd_constant(sc, out):
    if "lattice" not in sc:
        raise ScenarioError("missing --lattice")
    lat = make_lattice(parse_matrix(sc["lattice"]))
    e = epstein_sum(lat, lat.dim + 1, tol=float(sc.get("tol", 1e-13)))
    payload = {
        "c_t": lattice_constant(lat),
        "epstein_value": e.value,
        "truncation_radius": e.truncation_radius,
        "tail_bound": e.tail_bound,
    }
    if sc.get("format", "json") == "json":
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        write_table(list(payload), [list(payload.values())], "csv", out)


def cmd_phi(sc, out):
    lat, shape = _scenario_lattice_shape(sc)
    radii = parse_grid(sc.get("r", "0.05:20:400"))
    if radii[0] <= 0 or len(radii) < 2:
        raise ScenarioError("phi needs at least two positive radii")
    method = sc.get("method")
    prof = phi_profile(lat, shape, radii, tol=float(sc.get("tol", 2e-2)), method=method)
    rows = [[r, p, m] for r, p, m in zip(prof.radii, prof.phi, prof.running_mean)]
    extra = {"identity_error": prof.meta.get("identity_error"), "method": prof.meta["method"]}
    write_table(["r", "phi", "phi_runmean"], rows, sc.get("format", "csv"), out, extra)


def cmd_covariogram(sc, out):
    if "shape" not in sc:
        raise ScenarioError("missing --shape")
    shape = parse_shape(sc["shape"], sc.get("dim"))
    t = parse_grid(sc.get("t", "0:2:21"))
    if t[0] < 0:
        raise ScenarioError("t must be nonnegative")
    g = isotropic_covariogram(shape, t)
    write_table(["t", "gamma_bar"], [[a, b] for a, b in zip(t, g)], sc.get("format", "csv"), out)


def cmd_kernel_check(sc, out):
    d = int(sc.get("dim", 2))
    if d not in (1, 2, 3):
        raise ScenarioError("dimension must be 1, 2 or 3")
    taus = parse_grid(sc.get("tau", "0,0.1,0.25,0.5"))
    tol = float(sc.get("tol", 1e-7))
    rows, ok = [], True
    for tau in taus:
        num = k2hat_numeric(tau, d, tol=tol)
        closed = complex(k2hat_closed(tau, d))
        diff = abs(num - closed)
        ok &= diff <= 1e-6 and abs(closed) >= 1e-8
        rows.append([tau, num.real, num.imag, closed.real, closed.imag, diff])
    cols = ["tau", "numeric_re", "numeric_im", "closed_re", "closed_im", "abs_diff"]
    write_table(cols, rows, sc.get("format", "csv"), out)
    return 0 if ok else 1


COMMANDS = {
    "variance": cmd_variance,
    "constant": cmd_constant,
    "phi": cmd_phi,
    "covariogram": cmd_covariogram,
    "kernel-check": cmd_kernel_check,
}


def build_parser():
    p = argparse.ArgumentParser(prog="latvar", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--scenario", help="JSON file with default values for the flags")
        s.add_argument("--format", choices=["csv", "json"])
        s.add_argument("--tol", type=float)
        s.add_argument("--seed", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--out", help="output path (default: standard output)")
        if name in ("variance", "constant", "phi"):
            s.add_argument("--lattice", help="generator, row-major, e.g. '1,0;0,1'")
        if name in ("variance", "phi", "covariogram"):
            s.add_argument("--shape", help="ball:R, cube:side, box:a,b[,c] or ellipsoid:a,b[,c]")
        if name in ("variance", "phi"):
            s.add_argument("--r", help="radii: start:stop:num or a comma list")
        if name == "variance":
            s.add_argument("--routes", help="comma list of spectral, mc, asymptotic")
            s.add_argument("--isotropic", action="store_true", default=None,
                           help="average over random rotations as well as shifts")
        if name == "phi":
            s.add_argument("--method", choices=["spectral", "spatial"])
        if name in ("covariogram", "kernel-check"):
            s.add_argument("--dim", type=int)
        if name == "covariogram":
            s.add_argument("--t", help="distances: start:stop:num or a comma list")
        if name == "kernel-check":
            s.add_argument("--tau", help="tau grid: start:stop:num or a comma list")
    return p


def load_scenario(args):
    sc = {}
    if args.scenario:
        with open(args.scenario) as fh:
            sc = json.load(fh)
        if not isinstance(sc, dict):
            raise ScenarioError("scenario file must hold a JSON object")
        sc = {k.replace("-", "_"): v for k, v in sc.items()}
    for k, v in vars(args).items():
        if k not in ("command", "scenario", "out") and v is not None:
            sc[k] = v
    return sc


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args)
        out = open(args.out, "w", newline="") if args.out else sys.stdout
    except (OSError, ValueError) as exc:
        print(f"latvar: {exc}", file=sys.stderr)
        return 2
    try:
        code = COMMANDS[args.command](sc, out) or 0
    except SingularGenerator:
        print("latvar: singular generator", file=sys.stderr)
        return 2
    except (TailBoundFailure, NonConvergence, ArithmeticError, RuntimeError) as exc:
        print(f"latvar: numerical failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, TypeError) as exc:
        print(f"latvar: invalid scenario: {exc}", file=sys.stderr)
        return 2
    finally:
        if args.out and "out" in locals():
            out.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
