#!/usr/bin/env python3
"""Scattering portrait of one run config.

Executes the config, then prints the dyadic pullback-increment table, the
X-norm tails, the blow-up monitor verdict, and the smallness certificate.
The same numbers land in report.json under `ggpsim simulate`; this script
is the quick-look version.
"""

from __future__ import annotations

import argparse

from ggpsim.cli import _execute  # shared runner keeps numbers identical
from ggpsim.config import load_run_config


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config", nargs="?", default="configs/reference.json")
    return parser.parse_args()


def main() -> None:
    args = parse_args()
    cfg = load_run_config(args.config)
    traj, report = _execute(cfg)

    run = report["run"]
    print(f"status {run['status']}  mass drift {run['mass_drift']:.3e}  "
          f"energy drift {run['energy_drift']:.3e}")

    sc = report["scattering"]
    if sc is None:
        print(f"scattering skipped: {report['scattering_skipped']}")
    else:
        print(f"{'t_k':>8s} {'inc_Hs0':>12s} {'inc_Hs1':>12s} {'X tail':>10s}")
        ts = sc["checkpoints"]
        rows = zip(ts[1:], sc["inc_hs0"], sc["inc_hs1"], sc["xnorm_tails"][1:])
        print(f"{ts[0]:8.4g} {'-':>12s} {'-':>12s} {sc['xnorm_tails'][0]:10.4f}")
        for t, a, b, x in rows:
            print(f"{t:8.4g} {a:12.4e} {b:12.4e} {x:10.4f}")
        print(f"verdict: {sc['verdict']}")

    print(f"blow-up monitor: {report['blowup']['status']}")
    cert = report["certificate"]
    if cert is not None:
        print(f"certificate: thm13 {cert['thm13_quantity']:.6f}  "
              f"thm14 {cert['thm14_quantity']:.6f}  "
              f"X window {cert['x_window']:.6f}  bound ok {cert['bound_satisfied']}")


if __name__ == "__main__":
    main()
