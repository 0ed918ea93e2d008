#!/usr/bin/env python3
"""Empirical space-time estimate quotients over a Gaussian probe family.

For the pair (P1, P1bar) of the chosen (n, p), prints per-member
homogeneous and inhomogeneous quotients and the family sups.  The sups
are lower bounds for the estimate constants; stability of the per-member
values across widths, centers, and carriers is the interesting part
(center and carrier leave them invariant up to discretization error).
"""

from __future__ import annotations

import argparse

import numpy as np

from ggpsim.diagnostics import gaussian_family, strichartz_ratio
from ggpsim.exponents import ProblemParams, derive_exponents, derive_pairs
from ggpsim.spectral import TorusGrid


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, choices=(1, 2), default=1)
    parser.add_argument("--p", default="5")
    parser.add_argument("--L", type=float, default=40 * np.pi)
    parser.add_argument("--N", type=int, default=512)
    parser.add_argument("--widths", type=float, nargs="+",
                        default=[1.5, 2.0, 2.5, 3.0])
    parser.add_argument("--centers", type=float, nargs="+", default=[0.0, 4.0])
    parser.add_argument("--carriers", type=float, nargs="+",
                        default=[0.0, 0.5, 1.0, 1.5])
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    params = ProblemParams(n=args.n, p=args.p, mu=1)
    pairs = derive_pairs(params)
    exps = derive_exponents(params)
    q = exps.q13
    grid = TorusGrid(args.n, args.L, args.N)
    print(f"n={args.n} p={params.p}: P1=({pairs.P1.x}, {pairs.P1.y}) "
          f"P1bar=({pairs.P1bar.x}, {pairs.P1bar.y}) q={exps.q13}")

    members = []
    for w in args.widths:
        for c in args.centers:
            for k in args.carriers:
                members.append((w, c, k))
    fields = gaussian_family(grid, args.widths, args.centers, args.carriers)

    print(f"{'width':>6s} {'center':>7s} {'carrier':>8s} {'homog':>10s} {'inhomog':>10s}")
    per = []
    for (w, c, k), f in zip(members, fields):
        h, i = strichartz_ratio(pairs.P1, pairs.P1bar, q, [f])
        per.append((h, i))
        print(f"{w:6.2f} {c:7.2f} {k:8.2f} {h:10.6f} {i:10.6f}")

    hs = np.array([h for h, _ in per])
    ivals = np.array([i for _, i in per])
    print(f"family sup: homog {hs.max():.6f}  inhomog {ivals.max():.6f}")
    print(f"spread vs mean: homog [{hs.min()/hs.mean():.3f}, {hs.max()/hs.mean():.3f}]  "
          f"inhomog [{ivals.min()/ivals.mean():.3f}, {ivals.max()/ivals.mean():.3f}]")


if __name__ == "__main__":
    main()
