"""JSON configuration ingestion for single runs and parameter sweeps.

Configs are schema-validated (schemas ship with the package), p is kept
exact as a `fractions.Fraction` all the way into the exponent engine, and
box sizes may be written as pi multiples ("80pi").  Nothing is silently
clamped: every adjustment is either an error or a logged warning.
"""

from __future__ import annotations

import copy
import itertools
import json
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .exponents import ProblemParams
from .solver import SolverConfig
from .spectral import (
    Field,
    TorusGrid,
    make_gaussian,
    make_plane_wave,
    make_theta_constant,
)

logger = logging.getLogger(__name__)

AXIS_ORDER = ("p", "mu", "amplitude")
DEFAULT_SWEEP_CAP = 1024

_PI_PATTERN = re.compile(r"^\s*([0-9]+(?:\.[0-9]*)?(?:[eE][+-]?[0-9]+)?)\s*\*?\s*pi\s*$")


class ConfigError(ValueError):
    """Raised for malformed, schema-violating, or inconsistent configs."""


def _schema(name: str) -> dict[str, Any]:
    text = resources.files("ggpsim").joinpath("schemas", name).read_text("utf-8")
    return json.loads(text)


def run_config_schema() -> dict[str, Any]:
    return _schema("run_config.schema.json")


def sweep_config_schema() -> dict[str, Any]:
    return _schema("sweep_config.schema.json")


def parse_rational(value: Any, name: str = "p") -> Fraction:
    """Exact rational from "7/2" strings or integers; floats warn first.

    A float is converted to the binary rational it already is, which is
    rarely the decimal the author had in mind; prefer rational strings.
    """
    if isinstance(value, str):
        try:
            return Fraction(re.sub(r"\s+", "", value))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{name}: not a rational string: {value!r}") from exc
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        exact = Fraction(value)
        logger.warning(
            "%s given as float %r; using its exact binary value %s "
            "(write a rational string like \"7/2\" to silence this)",
            name, value, exact,
        )
        return exact
    raise ConfigError(f"{name}: expected rational string or number, got {type(value).__name__}")


def parse_length(value: Any, name: str = "L") -> float:
    """Box size as a positive number or a pi-multiple string like "80pi"."""
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        m = _PI_PATTERN.match(value)
        if m is None:
            raise ConfigError(f"{name}: not a number or pi-multiple string: {value!r}")
        out = float(m.group(1)) * math.pi
    else:
        raise ConfigError(f"{name}: expected number or string, got {type(value).__name__}")
    if not (math.isfinite(out) and out > 0):
        raise ConfigError(f"{name} must be finite and positive, got {out}")
    return out


def default_checkpoints(T: float) -> tuple[float, ...]:
    """Dyadic schedule T/16 * 2^k, k = 0..4 (the windows with clean decay)."""
    return tuple(T / 16.0 * 2.0**k for k in range(5))


@dataclass(frozen=True)
class InitSpec:
    """Initial perturbation v0: shape family plus its parameters."""

    type: str
    amplitude: float = 0.0
    width: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0

    def build(self, grid: TorusGrid) -> Field:
        amp = self.amplitude * complex(math.cos(self.phase), math.sin(self.phase))
        if self.type == "gaussian":
            return make_gaussian(grid, amp, self.width, carrier=self.frequency)
        if self.type == "plane_wave_perturbation":
            return make_plane_wave(grid, amp, self.frequency)
        if self.type == "theta_constant":
            return make_theta_constant(grid, self.phase)
        raise ConfigError(f"unknown init type {self.type!r}")


@dataclass(frozen=True)
class DiagnosticsSpec:
    """Scattering-probe knobs: extra sigma exponents and checkpoint times."""

    sigma_list: tuple[float, ...] = ()
    checkpoints: tuple[float, ...] = ()

    def resolved_checkpoints(self, T: float) -> tuple[float, ...]:
        return self.checkpoints if self.checkpoints else default_checkpoints(T)


@dataclass(frozen=True)
class RunConfig:
    """One fully validated run: problem, grid, data, solver, diagnostics."""

    params: ProblemParams
    grid: TorusGrid
    init: InitSpec
    solver: SolverConfig
    diagnostics: DiagnosticsSpec
    seed: int = 0

    def initial_field(self) -> Field:
        return self.init.build(self.grid)

    def normalized(self) -> dict[str, Any]:
        """Plain-type echo of the config (what reports embed)."""
        out: dict[str, Any] = {
            "params": {
                "n": self.params.n,
                "p": str(self.params.p),
                "mu": self.params.mu,
                "allow_out_of_range": self.solver.allow_out_of_range,
            },
            "grid": {"L": self.grid.L, "N": self.grid.N},
            "init": {"type": self.init.type, "phase": self.init.phase},
            "solver": {
                "method": self.solver.method,
                "dt": self.solver.dt,
                "T": self.solver.T,
                "picard_max_iter": self.solver.picard_max_iter,
                "picard_tol": self.solver.picard_tol,
                "subdivision_m": self.solver.subdivision_m,
            },
            "diagnostics": {
                "sigma_list": list(self.diagnostics.sigma_list),
                "checkpoints": list(self.diagnostics.resolved_checkpoints(self.solver.T)),
            },
            "seed": self.seed,
        }
        if self.init.type != "theta_constant":
            out["init"]["amplitude"] = self.init.amplitude
        if self.init.type == "gaussian":
            out["init"]["width"] = self.init.width
        if self.init.type != "theta_constant" and self.init.frequency:
            out["init"]["frequency"] = self.init.frequency
        return out


def _validate(doc: Any, schema: dict[str, Any], what: str) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(k) for k in exc.absolute_path) or "(top level)"
        raise ConfigError(f"{what} schema violation at {where}: {exc.message}") from exc


def run_config_from_dict(doc: dict[str, Any]) -> RunConfig:
    """Validate a parsed JSON document and build the typed RunConfig."""
    _validate(doc, run_config_schema(), "run config")

    pd = doc["params"]
    p = parse_rational(pd["p"], "params.p")
    try:
        params = ProblemParams(n=pd["n"], p=p, mu=pd.get("mu", 1))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    gd = doc["grid"]
    try:
        grid = TorusGrid(n=params.n, L=parse_length(gd["L"]), N=gd["N"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    idoc = doc["init"]
    init = InitSpec(
        type=idoc["type"],
        amplitude=float(idoc.get("amplitude", 0.0)),
        width=float(idoc.get("width", 0.0)),
        frequency=float(idoc.get("frequency", 0.0)),
        phase=float(idoc.get("phase", 0.0)),
    )

    sd = doc["solver"]
    dd = doc.get("diagnostics", {})
    diagnostics = DiagnosticsSpec(
        sigma_list=tuple(float(s) for s in dd.get("sigma_list", [])),
        checkpoints=tuple(float(t) for t in dd.get("checkpoints", [])),
    )
    try:
        solver = SolverConfig(
            dt=float(sd["dt"]),
            T=float(sd["T"]),
            method=sd.get("method", "strang"),
            picard_max_iter=int(sd.get("picard_max_iter", 50)),
            picard_tol=float(sd.get("picard_tol", 1e-10)),
            subdivision_m=float(sd.get("subdivision_m", 0.25)),
            allow_out_of_range=bool(pd.get("allow_out_of_range", False)),
            store_times=diagnostics.resolved_checkpoints(float(sd["T"])),
        )
        solver.n_steps  # fail fast if T is not on the dt grid
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        params=params, grid=grid, init=init, solver=solver,
        diagnostics=diagnostics, seed=int(doc.get("seed", 0)),
    )


def _load_json(path: str | Path, what: str) -> Any:
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what} {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc


def load_run_config(path: str | Path) -> RunConfig:
    doc = _load_json(path, "run config")
    if not isinstance(doc, dict):
        raise ConfigError(f"run config {path} must be a JSON object")
    return run_config_from_dict(doc)


@dataclass(frozen=True)
class SweepConfig:
    """A RunConfig template crossed with value axes (p, mu, amplitude)."""

    template: dict[str, Any]
    axes: dict[str, tuple[Any, ...]]
    parallelism: int = 1
    max_runs: int = DEFAULT_SWEEP_CAP

    def expand(self) -> list[RunConfig]:
        """Cross product in canonical axis order (p, mu, amplitude)."""
        names = [a for a in AXIS_ORDER if a in self.axes]
        combos = itertools.product(*(self.axes[a] for a in names))
        runs: list[RunConfig] = []
        for combo in combos:
            doc = copy.deepcopy(self.template)
            for name, value in zip(names, combo):
                if name == "p":
                    doc["params"]["p"] = value
                elif name == "mu":
                    doc["params"]["mu"] = value
                else:
                    doc["init"]["amplitude"] = value
            runs.append(run_config_from_dict(doc))
        return runs


def load_sweep_config(path: str | Path) -> SweepConfig:
    doc = _load_json(path, "sweep config")
    if not isinstance(doc, dict):
        raise ConfigError(f"sweep config {path} must be a JSON object")
    _validate(doc, sweep_config_schema(), "sweep config")

    axes = {k: tuple(v) for k, v in doc["axes"].items()}
    size = math.prod(len(v) for v in axes.values())
    cap = int(doc.get("max_runs", DEFAULT_SWEEP_CAP))
    if size > cap:
        raise ConfigError(f"sweep cross product has {size} runs, cap is {cap}")
    return SweepConfig(
        template=doc["template"],
        axes=axes,
        parallelism=int(doc.get("parallelism", 1)),
        max_runs=cap,
    )
