#!/usr/bin/env python3
"""Global-order study for the splitting integrator.

Runs the same initial data at a chain of halved time steps, measures the
final-time sup error against a dt/16 reference for each step size, and
prints the error table with successive ratios (4.0 = clean second order).
"""

from __future__ import annotations

import argparse

import numpy as np

from ggpsim.exponents import ProblemParams
from ggpsim.solver import SolverConfig, run_split_step
from ggpsim.spectral import TorusGrid, make_gaussian


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, choices=(1, 2), default=1)
    parser.add_argument("--p", default="5", help='rational power, e.g. "5" or "19/4"')
    parser.add_argument("--mu", type=int, choices=(1, -1), default=1)
    parser.add_argument("--amplitude", type=float, default=0.3)
    parser.add_argument("--width", type=float, default=2.0)
    parser.add_argument("--L", type=float, default=20 * np.pi)
    parser.add_argument("--N", type=int, default=256)
    parser.add_argument("--T", type=float, default=1.0)
    parser.add_argument("--dt0", type=float, default=8e-3, help="coarsest step")
    parser.add_argument("--halvings", type=int, default=3)
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    params = ProblemParams(n=args.n, p=args.p, mu=args.mu)
    grid = TorusGrid(args.n, args.L, args.N)
    v0 = make_gaussian(grid, args.amplitude, args.width)

    def final(dt: float) -> np.ndarray:
        traj = run_split_step(v0, SolverConfig(dt=dt, T=args.T), params)
        if traj.status != "ok":
            raise SystemExit(f"run at dt={dt} ended with status {traj.status}")
        return traj.final_field.values

    print(f"n={args.n} p={params.p} mu={args.mu} amp={args.amplitude} "
          f"L={args.L:.6g} N={args.N} T={args.T}")
    print(f"{'dt':>12s} {'sup error':>14s} {'ratio':>8s}")
    prev = None
    for k in range(args.halvings + 1):
        dt = args.dt0 / 2**k
        err = float(np.max(np.abs(final(dt) - final(dt / 16.0))))
        ratio = "" if prev is None else f"{prev / err:8.3f}"
        print(f"{dt:12.3e} {err:14.6e} {ratio:>8s}")
        prev = err


if __name__ == "__main__":
    main()
