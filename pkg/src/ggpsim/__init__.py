"""Spectral simulation and verification toolkit for the generalized
Gross-Pitaevskii equation i v_t + Delta v = F(v) around the constant
background u = 1 + v, |u| -> 1 at infinity."""

from .exponents import (
    AlgebraicNumber,
    ExponentSet,
    PairPoint,
    PairSet,
    ProblemParams,
    admissible_range,
    derive_exponents,
    derive_pairs,
    in_range,
    verify_pair_identities,
)
from .nonlinearity import eval_F, eval_F_field, eval_F_parts, gauge_phase
from .solver import (
    GuideFlow,
    PicardReport,
    SolverConfig,
    Trajectory,
    duhamel_apply,
    evaluate_guide_flow,
    picard_solve,
    run_split_step,
    strang_step,
)
from .spectral import (
    Field,
    TorusGrid,
    free_propagate,
    lebesgue_norm,
    make_gaussian,
    make_plane_wave,
    make_theta_constant,
    sobolev_norm,
    spacetime_norm,
    weighted_l2_norm,
    zero_field,
)
from .diagnostics import (
    BlowupReport,
    ScatteringReport,
    SmallnessCertificate,
    blowup_monitor,
    scattering_profile,
    small_data_certificate,
    strichartz_ratio,
    xnorm_tail,
)
from .config import RunConfig, SweepConfig, load_run_config, load_sweep_config
from .container import read_checkpoints, write_checkpoints

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
