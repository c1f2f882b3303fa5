"""Table of the Mellin-type kernel transform K2^(tau), quadrature against closed form."""

import argparse

import numpy as np

from latvar.spectral import k2hat_closed, k2hat_numeric


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau", type=float, nargs="+", default=[0.0, 0.1, 0.25, 0.5, 1.0, 2.0])
    args = ap.parse_args()
    print(f"{'d':>2} {'tau':>6} {'|closed|':>12} {'|num - closed|':>15}")
    for d in (1, 2, 3):
        for tau in args.tau:
            c = complex(k2hat_closed(tau, d))
            n = k2hat_numeric(tau, d)
            print(f"{d:2d} {tau:6.2f} {abs(c):12.6e} {abs(n - c):15.2e}")
        grid = np.linspace(-5, 5, 2001)
        low = min(abs(complex(k2hat_closed(t, d))) for t in grid)
        print(f"   min |K2^| on [-5, 5]: {low:.3e}")


if __name__ == "__main__":
    main()
