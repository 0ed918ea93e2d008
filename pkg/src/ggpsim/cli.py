"""Command-line entry points: exponent reports, simulations, probes, sweeps.

Exit codes: 0 success (all hard checks pass / run completed), 1 failed
checks or out-of-range parameters, 2 malformed or invalid configuration.
Outputs are deterministic functions of the config: CSV uses LF line
endings and '.' decimals, JSON is emitted with sorted keys, and floats
are rendered with shortest round-trip repr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .config import (
    ConfigError,
    RunConfig,
    load_run_config,
    load_sweep_config,
    parse_rational,
)
from .container import write_checkpoints
from .diagnostics import (
    ScatteringReport,
    blowup_monitor,
    scattering_profile,
    small_data_certificate,
)
from .exponents import (
    ProblemParams,
    admissible_range,
    derive_exponents,
    derive_pairs,
    verify_pair_identities,
)
from .solver import LEDGER_COLUMNS, GuideFlow, Trajectory, picard_solve, run_split_step

SCATTERING_COLUMNS = ("t_k", "inc_Hs0", "inc_Hs1", "xnorm_tail")
SWEEP_COLUMNS = (
    "n", "p", "mu", "amplitude", "status", "verdict", "blowup_status",
    "thm13_quantity", "thm14_quantity", "bound_satisfied",
    "xnorm_total", "energy_drift",
)


def _fmt(x: Any) -> str:
    """CSV cell: shortest round-trip repr for floats, plain str otherwise."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def _write_json(path: Path, doc: dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------- exponents

def _exponent_doc(params: ProblemParams) -> dict[str, Any]:
    exps = derive_exponents(params)
    pairs = derive_pairs(params)
    checks = verify_pair_identities(pairs, exps)
    lo, hi = admissible_range(params.n)
    n = params.n

    def pair_entry(pt) -> dict[str, str]:
        return {"x": str(pt.x), "y": str(pt.y), "pi": str(pt.pi(n))}

    return {
        "n": n,
        "p": str(params.p),
        "in_range": exps.in_range,
        "range": {"lower": str(lo), "upper": str(hi)},
        "exponents": {
            "k1": str(exps.k1), "k2": str(exps.k2), "km": str(exps.km),
            "kSt": str(exps.kSt),
            "s1": str(exps.s1), "s2": str(exps.s2), "s0": str(exps.s0),
            "alpha": str(exps.alpha), "q13": str(exps.q13),
        },
        "pairs": {name: pair_entry(pt) for name, pt in pairs.points().items()},
        "checks": [
            {
                "name": c.name,
                "hard": c.hard,
                "residual": c.residual_str(),
                "result": "pass" if c.passed else "fail",
            }
            for c in checks
        ],
        "all_hard_checks": (
            "pass" if all(c.passed for c in checks if c.hard) else "fail"
        ),
    }


def cmd_exponents(args: argparse.Namespace) -> int:
    p = parse_rational(args.p, "p")
    try:
        params = ProblemParams(n=args.n, p=p)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    lo, hi = admissible_range(args.n)
    if not params.in_range and not args.allow_out_of_range:
        print(
            f"p outside ({lo}, {hi}) for n={args.n}; "
            "pass --allow-out-of-range to derive anyway",
            file=sys.stderr,
        )
        return 1

    doc = _exponent_doc(params)
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"n = {doc['n']}, p = {doc['p']}, "
              f"in range {doc['range']['lower']} < p < {doc['range']['upper']}: "
              f"{doc['in_range']}")
        for key, val in doc["exponents"].items():
            print(f"  {key:5s} = {val}")
        for name, pt in doc["pairs"].items():
            print(f"  {name:6s} = ({pt['x']}, {pt['y']})   pi = {pt['pi']}")
        for chk in doc["checks"]:
            tag = "hard" if chk["hard"] else "soft"
            print(f"  [{chk['result']}] ({tag}) {chk['name']}  residual {chk['residual']}")
        print(f"all hard checks: {doc['all_hard_checks']}")
    return 0 if doc["all_hard_checks"] == "pass" else 1


# ----------------------------------------------------------------- simulate

def _run_trajectory(cfg: RunConfig) -> Trajectory:
    v0 = cfg.initial_field()
    if cfg.solver.method == "picard":
        return picard_solve(
            GuideFlow("linear", v0), (0.0, cfg.solver.T), cfg.solver, cfg.params
        )
    return run_split_step(v0, cfg.solver, cfg.params)


def _scattering_doc(rep: ScatteringReport) -> dict[str, Any]:
    return {
        "checkpoints": [float(t) for t in rep.checkpoints],
        "inc_hs0": [float(x) for x in rep.inc_hs0],
        "inc_hs1": [float(x) for x in rep.inc_hs1],
        "extra_increments": {
            repr(float(s)): [float(x) for x in inc]
            for s, inc in rep.extra_increments.items()
        },
        "xnorm_tails": [float(x) for x in rep.xnorm_tails],
        "verdict": rep.verdict,
    }


def _picard_doc(traj: Trajectory) -> dict[str, Any] | None:
    rep = traj.picard
    if rep is None:
        return None
    return {
        "converged": rep.converged,
        "total_iterations": rep.total_iterations,
        "max_ratio": float(rep.max_ratio),
        "subintervals": [
            {
                "t_start": float(s.t_start),
                "t_end": float(s.t_end),
                "iterations": s.iterations,
                "defect": float(s.defect),
                "ratios": [float(r) for r in s.ratios],
            }
            for s in rep.subintervals
        ],
    }


def _execute(cfg: RunConfig) -> tuple[Trajectory, dict[str, Any]]:
    """Run one config and assemble the full JSON-ready report."""
    traj = _run_trajectory(cfg)
    ledger = traj.ledger
    t0, t1 = float(traj.times[0]), float(traj.times[-1])

    mass0 = float(ledger["mass"][0])
    mass_drift = float(np.max(np.abs(ledger["mass"] - mass0))) / mass0
    e0 = float(ledger["energy"][0])
    e_dev = float(np.max(np.abs(ledger["energy"] - e0)))
    energy_drift = e_dev / abs(e0) if e0 != 0.0 else e_dev

    scattering = None
    skipped = None
    if traj.status == "ok":
        try:
            scattering = scattering_profile(traj, cfg.diagnostics.sigma_list)
        except ValueError as exc:
            skipped = str(exc)
    else:
        skipped = f"trajectory status {traj.status}"

    blowup = blowup_monitor(traj)
    certificate = None
    if cfg.params.in_range:
        cert = small_data_certificate(
            cfg.initial_field(), cfg.params, traj if traj.status == "ok" else None
        )
        certificate = {
            "thm13_quantity": float(cert.thm13_quantity),
            "thm14_quantity": float(cert.thm14_quantity),
            "x_window": None if cert.x_window is None else float(cert.x_window),
            "bound_satisfied": cert.bound_satisfied,
        }

    report = {
        "config": cfg.normalized(),
        "exponents": _exponent_doc(cfg.params),
        "run": {
            "status": traj.status,
            "t_final": t1,
            "steps_completed": len(traj.times) - 1,
            "mass_initial": mass0,
            "mass_drift": mass_drift,
            "energy_initial": e0,
            "energy_drift": energy_drift,
            "max_boundary_fraction": float(np.max(ledger["boundary_frac"])),
            "max_tail_fraction": float(np.max(ledger["tail_frac"])),
            "xnorm_total": float(traj.xnorm_window(t0, t1)),
            "picard": _picard_doc(traj),
        },
        "certificate": certificate,
        "scattering": None if scattering is None else _scattering_doc(scattering),
        "scattering_skipped": skipped,
        "blowup": {
            "status": blowup.status,
            "window_edges": [float(t) for t in blowup.window_edges],
            "growth_lp1": [float(g) for g in blowup.growth_lp1],
            "growth_wp2": [float(g) for g in blowup.growth_wp2],
            "max_tail_fraction": float(blowup.max_tail_fraction),
        },
        "verdict": None if scattering is None else scattering.verdict,
    }
    return traj, report


def _write_run_dir(out_dir: Path, cfg: RunConfig, traj: Trajectory,
                   report: dict[str, Any]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    ledger_rows = list(zip(*(traj.ledger[c] for c in LEDGER_COLUMNS)))
    _write_csv(out_dir / "ledger.csv", LEDGER_COLUMNS, ledger_rows)
    _write_json(out_dir / "report.json", report)
    if report["scattering"] is not None:
        _write_csv(out_dir / "scattering.csv", SCATTERING_COLUMNS,
                   _scatter_rows(report["scattering"]))
    dump_times = _picard_dump_times(cfg, traj) if cfg.solver.method == "picard" else None
    write_checkpoints(out_dir / "checkpoints.bin", traj, times=dump_times)


def _scatter_rows(rep: dict[str, Any]) -> list[tuple[float, float, float, float]]:
    ts = rep["checkpoints"]
    rows = [(ts[0], 0.0, 0.0, rep["xnorm_tails"][0])]
    for k in range(1, len(ts)):
        rows.append((ts[k], rep["inc_hs0"][k - 1], rep["inc_hs1"][k - 1],
                     rep["xnorm_tails"][k]))
    return rows


def _picard_dump_times(cfg: RunConfig, traj: Trajectory) -> list[float]:
    """Picard stores every node; dump only first, checkpoints, last."""
    keep = {float(traj.times[0]), float(traj.times[-1])}
    for t in cfg.diagnostics.resolved_checkpoints(cfg.solver.T):
        if traj.times[0] <= t <= traj.times[-1]:
            keep.add(float(t))
    return sorted(keep)


def _resolve_out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out) if args.out else Path("runs") / Path(args.config).stem
    if out.exists() and any(out.iterdir()) and not args.force:
        raise ConfigError(f"output directory {out} is not empty (use --force)")
    return out


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = load_run_config(args.config)
    out_dir = _resolve_out_dir(args)
    try:
        traj, report = _execute(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    _write_run_dir(out_dir, cfg, traj, report)
    if report["verdict"] is not None:
        tail = f"verdict {report['verdict']}"
    else:
        tail = f"scattering skipped ({report['scattering_skipped']})"
    print(f"{out_dir}: status {traj.status}, {tail}")
    return 0


# -------------------------------------------------------------------- probe

def cmd_probe(args: argparse.Namespace) -> int:
    cfg = load_run_config(args.config)
    try:
        traj, report = _execute(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    doc = {
        "config": report["config"],
        "status": report["run"]["status"],
        "certificate": report["certificate"],
        "verdict": report["verdict"],
        "xnorm_total": report["run"]["xnorm_total"],
        "energy_drift": report["run"]["energy_drift"],
    }
    if args.out:
        _write_json(Path(args.out), doc)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


# -------------------------------------------------------------------- sweep

def _sweep_row(cfg: RunConfig) -> list[Any]:
    try:
        traj, report = _execute(cfg)
    except ValueError as exc:
        raise ConfigError(
            f"run (p={cfg.params.p}, mu={cfg.params.mu}, "
            f"amplitude={cfg.init.amplitude}) failed: {exc}"
        ) from exc
    cert = report.get("certificate")
    return [
        cfg.params.n, str(cfg.params.p), cfg.params.mu, cfg.init.amplitude,
        report["run"]["status"], report["verdict"], report["blowup"]["status"],
        None if cert is None else cert["thm13_quantity"],
        None if cert is None else cert["thm14_quantity"],
        None if cert is None else cert["bound_satisfied"],
        report["run"]["xnorm_total"], report["run"]["energy_drift"],
    ]


def _thread_cap() -> int | None:
    raw = os.environ.get("GGP_THREADS")
    if raw is None:
        return None
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"GGP_THREADS must be a positive integer, got {raw!r}")
    if cap < 1:
        raise ConfigError(f"GGP_THREADS must be a positive integer, got {raw!r}")
    return cap


def cmd_sweep(args: argparse.Namespace) -> int:
    sw = load_sweep_config(args.config)
    runs = sw.expand()
    width = min(sw.parallelism, len(runs))
    cap = _thread_cap()
    if cap is not None:
        width = min(width, cap)

    if width <= 1:
        rows = [_sweep_row(cfg) for cfg in runs]
    else:
        with ThreadPoolExecutor(max_workers=width) as pool:
            rows = list(pool.map(_sweep_row, runs))

    out = Path(args.out) if args.out else Path("sweep.csv")
    _write_csv(out, SWEEP_COLUMNS, rows)
    print(f"wrote {out} with {len(rows)} rows")
    return 0


# --------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ggpsim",
        description="Spectral simulation and verification toolkit for a "
                    "Gross-Pitaevskii equation with |u| -> 1 at infinity.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_exp = sub.add_parser("exponents", help="derive and verify the exponent family")
    p_exp.add_argument("--n", type=int, choices=(1, 2), required=True)
    p_exp.add_argument("--p", required=True, help='rational like "5" or "7/2"')
    p_exp.add_argument("--json", action="store_true", help="emit a JSON report")
    p_exp.add_argument("--allow-out-of-range", action="store_true")
    p_exp.set_defaults(func=cmd_exponents)

    p_sim = sub.add_parser("simulate", help="run one config, write a run directory")
    p_sim.add_argument("config", help="path to a run config JSON")
    p_sim.add_argument("--out", help="output directory (default runs/<config stem>)")
    p_sim.add_argument("--force", action="store_true",
                       help="write into a non-empty output directory")
    p_sim.set_defaults(func=cmd_simulate)

    p_probe = sub.add_parser("probe", help="smallness certificate + scattering verdict")
    p_probe.add_argument("config", help="path to a run config JSON")
    p_probe.add_argument("--out", help="write JSON here instead of stdout")
    p_probe.set_defaults(func=cmd_probe)

    p_sweep = sub.add_parser("sweep", help="cross-product of runs, aggregated CSV")
    p_sweep.add_argument("config", help="path to a sweep config JSON")
    p_sweep.add_argument("--out", help="output CSV path (default sweep.csv)")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
