"""Pointwise nonlinearity F, its smooth cutoff split F1 + F2, and the energy.

With w = |z|^2 + 2 Re z (so w = |1+z|^2 - 1),

    F(z) = mu |w|^{p-2} w (1 + z),        0^{p-2} := 0,

which vanishes exactly on the unit-modulus background orbit |1+z| = 1.
In u-form F(u-1) = g(|u|^2) u with the real gauge phase
g(rho) = mu |rho-1|^{p-2} (rho-1); the solver's nonlinear substep relies
on g being real (pointwise |u| is conserved).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exponents import ProblemParams
from .spectral import Field, lebesgue_norm


def _psi(t: np.ndarray) -> np.ndarray:
    """psi(t) = exp(-1/t) for t > 0, else 0; the standard C-infinity ramp."""
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


@dataclass(frozen=True)
class CutoffSpec:
    """Smooth bump phi: [0, inf) -> [0, 1] with phi = 1 on [0,1], 0 on [2,inf).

    Concrete choice phi(s) = psi(2-s) / (psi(2-s) + psi(s-1)); the
    denominator is positive for every s >= 0.
    """

    def phi(self, s):
        arr = np.asarray(s, dtype=float)
        a = _psi(2.0 - arr)
        b = _psi(arr - 1.0)
        out = a / (a + b)
        return float(out) if np.ndim(s) == 0 else out


DEFAULT_CUTOFF = CutoffSpec()


def _as_complex(z):
    return np.asarray(z, dtype=np.complex128)


def gauge_phase(rho, params: ProblemParams):
    """g(rho) = mu |rho - 1|^{p-2} (rho - 1), real, for rho = |u|^2 >= 0."""
    rho = np.asarray(rho, dtype=float)
    w = rho - 1.0
    aw = np.abs(w)
    mag = np.zeros_like(aw)
    nz = aw > 0
    mag[nz] = aw[nz] ** (float(params.p) - 2.0)
    out = params.mu * mag * w
    return float(out) if np.ndim(rho) == 0 else out


def eval_F(z, params: ProblemParams):
    """F(z) = mu |w|^{p-2} w (1+z) with w = |z|^2 + 2 Re z; vectorized in z."""
    zz = _as_complex(z)
    w = np.abs(zz) ** 2 + 2.0 * zz.real
    aw = np.abs(w)
    mag = np.zeros_like(aw)
    nz = aw > 0
    mag[nz] = aw[nz] ** (float(params.p) - 2.0)
    out = params.mu * mag * w * (1.0 + zz)
    return complex(out) if np.ndim(z) == 0 else out


def eval_F_parts(z, params: ProblemParams, cutoff: CutoffSpec = DEFAULT_CUTOFF):
    """(F1, F2) = (phi(|z|) F, (1 - phi(|z|)) F); F1 + F2 = F to rounding."""
    zz = _as_complex(z)
    f = eval_F(zz, params)
    phi = cutoff.phi(np.abs(zz))
    f1 = phi * f
    f2 = (1.0 - phi) * f
    if np.ndim(z) == 0:
        return complex(f1), complex(f2)
    return f1, f2


def eval_F_field(v: Field, params: ProblemParams) -> Field:
    """F applied pointwise to a field of samples."""
    return Field(v.grid, eval_F(v.values, params))


def energy(v: Field, params: ProblemParams) -> float:
    """E_p(1+v) = ||grad v||_{L^2}^2 + (mu/p) || |v|^2 + 2 Re v ||_{L^p}^p."""
    grid = v.grid
    xi = grid.axis_frequencies()
    vhat = np.fft.fftn(v.values)
    grad_sq = 0.0
    for axis in range(grid.n):
        shape = [1] * grid.n
        shape[axis] = grid.N
        dv = np.fft.ifftn(1j * xi.reshape(shape) * vhat)
        grad_sq += float(np.sum(np.abs(dv) ** 2) * grid.dx)
    w = np.abs(v.values) ** 2 + 2.0 * v.values.real
    p = float(params.p)
    nonlin = lebesgue_norm(Field(grid, w.astype(np.complex128)), p) ** p
    return grad_sq + (params.mu / p) * nonlin


def bound_probe(params: ProblemParams, cutoff: CutoffSpec = DEFAULT_CUTOFF,
                samples: int = 10**5, seed: int = 0):
    """Empirical sup of |F1|/|z|^{k1} and |F2|/|z|^{k2} over random z.

    Moduli are log-uniform on [1e-8, 1e8], phases uniform.  The values are
    finite by the growth bounds; they are sample sups, not operator norms.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    # row-major draw: the first m rows coincide for any two calls with the
    # same seed, so enlarging `samples` can only grow the reported sup
    uv = rng.uniform(0.0, 1.0, size=(samples, 2))
    mod = 10.0 ** (-8.0 + 16.0 * uv[:, 0])
    arg = 2.0 * np.pi * uv[:, 1]
    z = mod * np.exp(1j * arg)
    f1, f2 = eval_F_parts(z, params, cutoff)
    k1 = float(params.p) - 1.0
    k2 = 2.0 * float(params.p) - 1.0
    c1 = float(np.max(np.abs(f1) / mod**k1))
    c2 = float(np.max(np.abs(f2) / mod**k2))
    if not (np.isfinite(c1) and np.isfinite(c2)):
        raise FloatingPointError("growth-bound probe produced non-finite ratio")
    return c1, c2
