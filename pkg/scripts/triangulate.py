"""Compare the variance routes (spectral, spatial, Monte Carlo, asymptotic) at a few radii.

    python3 scripts/triangulate.py --shape disk --radii 2 5 10 --samples 20000
"""

import argparse

import numpy as np

from latvar.geometry import Shape
from latvar.lattice import integer_lattice
from latvar.variance import asymptote, variance_isotropic, variance_mc

SHAPES = {
    "disk": Shape.ball(1.0, 2),
    "ball3": Shape.ball(1.0, 3),
    "square": Shape.cube(1.0, 2),
    "ellipse": Shape.ellipsoid(1.0, 0.5),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shape", choices=sorted(SHAPES), default="disk")
    ap.add_argument("--radii", type=float, nargs="+", default=[2.0, 5.0, 10.0])
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    shape = SHAPES[args.shape]
    lat = integer_lattice(shape.dim)
    print(f"{'r':>6} {'spectral':>12} {'spatial':>12} {'mc':>12} {'mc_se':>9} {'asymptote':>12} {'z':>6}")
    for k, r in enumerate(args.radii):
        spec = variance_isotropic(lat, shape, r, tol=1e-3).value
        spat = variance_isotropic(lat, shape, r, method="spatial").value
        mc = variance_mc(lat, shape, r, isotropic=True, n=args.samples, seed=args.seed + k)
        a = asymptote(lat, shape, r).value
        z = (mc.value - spat) / mc.uncertainty if mc.uncertainty > 0 else np.nan
        print(f"{r:6.2f} {spec:12.6f} {spat:12.6f} {mc.value:12.6f} {mc.uncertainty:9.2e} {a:12.6f} {z:6.2f}")


if __name__ == "__main__":
    main()
