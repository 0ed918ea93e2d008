"""Scattering, blow-up, and smallness diagnostics over computed trajectories.

Scattering on a finite horizon is operationalized as Cauchy decay of the
free-pullback profiles w_k = U(-t_k) v(t_k) along dyadic checkpoint times:
the verdict is `scattering_consistent` only when both mandatory increment
series are non-increasing and the final increment is at most 10% of the
first.  Blow-up detection deliberately requires joint evidence (superlinear
windowed X-growth and spectral-tail loss) so that resolution loss alone is
reported as `underresolved` rather than blow-up.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from numpy.typing import NDArray

from .exponents import (
    PairPoint,
    ProblemParams,
    admissible_range,
    derive_exponents,
    strichartz_q_admissible,
    triangle_membership,
)
from .solver import SolverConfig, Trajectory, _LedgerWriter, _store_indices
from .spectral import (
    Field,
    boundary_mass_fraction,
    free_propagate,
    lebesgue_norm,
    sobolev_norm,
    spacetime_norm,
    weighted_l2_norm,
)

BLOWUP_TAIL_LIMIT = 1e-3
SUPERLINEAR_FACTOR = 2.0  # dyadic windows double, so linear growth gives 2x


@dataclass(frozen=True)
class ScatteringReport:
    checkpoints: tuple[float, ...]
    profiles: tuple[Field, ...]
    inc_hs0: tuple[float, ...]
    inc_hs1: tuple[float, ...]
    extra_increments: Mapping[float, tuple[float, ...]]
    xnorm_tails: tuple[float, ...]
    verdict: str

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])):
            raise ValueError("checkpoints must be increasing")
        if any(v < 0 for v in self.inc_hs0 + self.inc_hs1):
            raise ValueError("increments must be non-negative")

    @property
    def final_profile(self) -> Field:
        """The last pullback w_K, the finite-horizon stand-in for the limit."""
        return self.profiles[-1]

    def rows(self) -> list[tuple[float, float, float, float]]:
        """(t_k, inc_Hs0, inc_Hs1, xnorm_tail) per checkpoint; each increment
        is attributed to the right endpoint of its window, first row 0."""
        out = [(self.checkpoints[0], 0.0, 0.0, self.xnorm_tails[0])]
        for k in range(1, len(self.checkpoints)):
            out.append((
                self.checkpoints[k],
                self.inc_hs0[k - 1],
                self.inc_hs1[k - 1],
                self.xnorm_tails[k],
            ))
        return out


@dataclass(frozen=True)
class SmallnessCertificate:
    thm13_quantity: float
    thm14_quantity: float
    x_window: float | None = None
    bound_satisfied: bool | None = None

    def __post_init__(self) -> None:
        if self.thm13_quantity < 0 or self.thm14_quantity < 0:
            raise ValueError("certificate quantities must be non-negative")


@dataclass(frozen=True)
class BlowupReport:
    status: str  # healthy | growing | underresolved | suspected_blowup
    window_edges: tuple[float, ...]
    growth_lp1: tuple[float, ...]
    growth_wp2: tuple[float, ...]
    max_tail_fraction: float
    trajectory_status: str


def dyadic_checkpoints(traj: Trajectory) -> list[float]:
    """The stored checkpoint chain T, T/2, T/4, ... discovered on traj."""
    t_end = float(traj.times[-1])
    t0 = float(traj.times[0])
    chain: list[float] = []
    t = t_end
    while t > t0 + 0.5 * traj.dt:
        try:
            traj.field_at(t)
        except (KeyError, ValueError):
            break
        chain.append(t)
        t *= 0.5
    chain.reverse()
    return chain


def free_reference_trajectory(v0: Field, config: SolverConfig,
                              params: ProblemParams) -> Trajectory:
    """Trajectory of the free equation (nonlinearity disabled test hook)."""
    exps = derive_exponents(params)
    n_steps = config.n_steps
    dt = config.dt
    times = dt * np.arange(n_steps + 1)
    keep = _store_indices(config, n_steps, dt)
    writer = _LedgerWriter(params, exps, n_steps + 1)
    stored: dict[int, Field] = {}
    for i in range(n_steps + 1):
        v = free_propagate(v0, float(times[i]))
        writer.record(i, float(times[i]), v)
        if i in keep:
            stored[i] = v
    return Trajectory(
        grid_params=params,
        exponents=exps,
        times=times,
        ledger=writer.truncated(n_steps + 1),
        stored=stored,
        status="ok",
        boundary_guard=boundary_mass_fraction(v0) <= 1e-6,
    )


def _series_nonincreasing(a: Sequence[float]) -> bool:
    return all(a[i + 1] <= a[i] * (1 + 1e-12) for i in range(len(a) - 1))


def scattering_profile(traj: Trajectory,
                       sigma_list: Sequence[float] = ()) -> ScatteringReport:
    """Dyadic Cauchy profile of U(-t_k) v(t_k) with verdict."""
    if traj.status == "contaminated":
        raise ValueError(
            "contaminated trajectory: boundary wrap-around falsifies the "
            "free pullback U(-t)v(t)"
        )
    if traj.status != "ok":
        raise ValueError(f"trajectory status {traj.status!r}; need 'ok'")
    cps = dyadic_checkpoints(traj)
    if len(cps) < 4:
        raise ValueError(
            f"need at least 4 stored dyadic checkpoints, found {len(cps)}"
        )
    k1 = float(traj.exponents.k1)
    for sig in sigma_list:
        if not 0.0 <= sig < k1:
            raise ValueError(f"sigma={sig} outside [0, k1) with k1={k1}")

    s0 = float(traj.exponents.s0)
    s1 = float(traj.exponents.s1)
    profiles = [free_propagate(traj.field_at(t), -t) for t in cps]

    def increments(s: float) -> tuple[float, ...]:
        return tuple(
            sobolev_norm(profiles[i + 1] - profiles[i], s, 2.0)
            for i in range(len(profiles) - 1)
        )

    inc0 = increments(s0)
    inc1 = increments(s1)
    extra = {float(sig): increments(float(sig)) for sig in sigma_list}
    tails = tuple(xnorm_tail(traj, t) for t in cps)

    # below this floor increments are rounding noise (free pullback exactness)
    atol = 1e-12

    def consistent(series: tuple[float, ...]) -> bool:
        if max(series) <= atol:
            return True
        if not _series_nonincreasing(series):
            return False
        return series[-1] <= 0.1 * series[0]

    if consistent(inc0) and consistent(inc1):
        verdict = "scattering_consistent"
    elif inc0[-1] > max(inc0[0], atol) or inc1[-1] > max(inc1[0], atol):
        verdict = "growth_detected"
    else:
        verdict = "inconclusive"
    return ScatteringReport(
        checkpoints=tuple(cps),
        profiles=tuple(profiles),
        inc_hs0=inc0,
        inc_hs1=inc1,
        extra_increments=extra,
        xnorm_tails=tails,
        verdict=verdict,
    )


def xnorm_tail(traj: Trajectory, t1: float) -> float:
    """Discrete ‖v‖_{X((t1, T))} from the trajectory's norm ledger."""
    t_lo, t_hi = float(traj.times[0]), float(traj.times[-1])
    if not t_lo - 1e-9 <= t1 <= t_hi + 1e-9:
        raise ValueError(f"t1={t1} outside the trajectory window [{t_lo}, {t_hi}]")
    times = traj.ledger["t"]
    idx = int(np.argmin(np.abs(times - t1)))
    return traj.xnorm_window(float(times[idx]), t_hi)


def blowup_monitor(traj: Trajectory) -> BlowupReport:
    """Joint X-growth / resolution-loss monitor over dyadic windows."""
    led = traj.ledger
    times = led["t"]
    t_end = float(times[-1])
    edges = tuple(t_end * f for f in (0.125, 0.25, 0.5, 1.0))

    def window_growth(col: str) -> tuple[float, ...]:
        acc = led[col]

        def at(t: float) -> float:
            return float(acc[int(np.argmin(np.abs(times - t)))])

        deltas = [at(b) - at(a) for a, b in zip(edges[:-1], edges[1:])]
        out = []
        for lo, hi in zip(deltas[:-1], deltas[1:]):
            if lo > 0:
                out.append(hi / lo)
            else:
                out.append(float("inf") if hi > 0 else 0.0)
        return tuple(out)

    g1 = window_growth("xacc_lp1")
    g2 = window_growth("xacc_wp2")
    superlinear = all(g > SUPERLINEAR_FACTOR for g in g1) or all(
        g > SUPERLINEAR_FACTOR for g in g2
    )
    max_tail = float(led["tail_frac"].max())
    lost = max_tail > BLOWUP_TAIL_LIMIT
    if superlinear and lost:
        status = "suspected_blowup"
    elif lost:
        status = "underresolved"
    elif superlinear:
        status = "growing"
    else:
        status = "healthy"
    return BlowupReport(
        status=status,
        window_edges=edges,
        growth_lp1=g1,
        growth_wp2=g2,
        max_tail_fraction=max_tail,
        trajectory_status=traj.status,
    )


def small_data_certificate(v0: Field, params: ProblemParams,
                           traj: Trajectory | None = None) -> SmallnessCertificate:
    """Smallness quantities of the two global-existence statements.

    With a trajectory attached, the flag records whether the windowed X-norm
    satisfies the doubling bound X <= 2 * thm13_quantity on that window only.
    """
    if not params.in_range:
        lo, hi = admissible_range(params.n)
        raise ValueError(f"p outside ({lo}, {hi}) for n={params.n}")
    exps = derive_exponents(params)
    q13 = float(exps.q13)
    s2 = float(exps.s2)
    alpha = float(exps.alpha)
    thm13 = lebesgue_norm(v0, q13) + sobolev_norm(v0, s2, 2.0)
    thm14 = weighted_l2_norm(v0, alpha) + sobolev_norm(v0, s2, 2.0)
    if traj is None:
        return SmallnessCertificate(thm13, thm14)
    x_window = xnorm_tail(traj, float(traj.times[0]))
    return SmallnessCertificate(thm13, thm14, x_window, x_window <= 2 * thm13)


def gaussian_family(grid, widths: Sequence[float], centers: Sequence[float],
                    carriers: Sequence[float], amplitude: float = 1.0) -> list[Field]:
    """Probe family: modulated Gaussians over a parameter product."""
    from .spectral import make_gaussian

    return [
        make_gaussian(grid, amplitude, w, center=c, carrier=k)
        for w in widths
        for c in centers
        for k in carriers
    ]


def _check(cond: bool, name: str) -> None:
    if not cond:
        raise ValueError(f"hypothesis violated: {name}")


def strichartz_ratio(P: PairPoint, Pbar: PairPoint, q,
                     sample_family: Sequence[Field],
                     times: NDArray[np.float64] | None = None,
                     ) -> tuple[float, float]:
    """Empirical quotients of the two space-time estimates over a family.

    homog:    sup ‖U(t)f‖_{L(P;I)} / ‖f‖_{L^q}   (P in T-hat, pi(P) = 1/q)
    inhomog:  sup ‖∫_0^t U(t-s)h ds‖_{L(P;I)} / ‖h‖_{L(Pbar;I)} with the
              free-wave source h(s) = U(s)f, P in T, Pbar in T' and
              pi(Pbar) - pi(P) = 2/n.

    Sups over a finite family are lower bounds for the operator norms,
    never the norms themselves.
    """
    if not sample_family:
        raise ValueError("sample family is empty")
    n = sample_family[0].grid.n
    qf = Fraction(q) if not isinstance(q, float) else None
    _check(triangle_membership(P, n, "T"), "P in T")
    _check(triangle_membership(Pbar, n, "T'"), "Pbar in T'")
    _check(Pbar.pi(n) - P.pi(n) == Fraction(2, n), "pi(Pbar) - pi(P) = 2/n")
    _check(triangle_membership(P, n, "That"), "P in T-hat")
    if qf is not None:
        _check(P.pi(n) == 1 / qf, "pi(P) = 1/q")
    else:
        _check(abs(float(P.pi(n)) - 1.0 / q) <= 1e-12, "pi(P) = 1/q")
    _check(strichartz_q_admissible(n, Fraction(q).limit_denominator(10**9)),
           "1/q inside the homogeneous window")

    if times is None:
        times = np.linspace(0.0, 2.0, 101)
    dt = float(times[1] - times[0])
    homog = 0.0
    inhomog = 0.0
    for f in sample_family:
        orbit = [f]
        for _ in range(len(times) - 1):
            orbit.append(free_propagate(orbit[-1], dt))
        duh = [f * 0.0]
        for k in range(1, len(times)):
            carry = duh[-1] + orbit[k - 1] * (0.5 * dt)
            duh.append(free_propagate(carry, dt) + orbit[k] * (0.5 * dt))
        homog = max(
            homog,
            spacetime_norm(times, orbit, P, 0.0) / lebesgue_norm(f, float(q)),
        )
        inhomog = max(
            inhomog,
            spacetime_norm(times, duh, P, 0.0)
            / spacetime_norm(times, orbit, Pbar, 0.0),
        )
    return homog, inhomog
