"""Binary checkpoint container for stored trajectory fields.

Layout (everything little-endian, no padding):

    offset  size  content
    0       8     magic b"GGPCHK01"
    8       4     uint32  n            spatial dimension
    12      4     uint32  N            grid points per axis
    16      8     float64 L            box side length
    24      8     int64   p numerator
    32      8     uint64  p denominator
    40      4     int32   mu           +1 or -1
    44      4     uint32  count        number of stored fields
    48      --    count records, each:
                    float64 t
                    N^n complex samples as interleaved float64 (re, im)
                    pairs in C row-major order

The header carries everything needed to rebuild the grid and problem
parameters, so a container round-trips without the original config.
"""

from __future__ import annotations

import struct
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .exponents import ProblemParams
from .solver import Trajectory
from .spectral import Field, TorusGrid

MAGIC = b"GGPCHK01"
_HEADER = struct.Struct("<8sIIdqQiI")


def write_checkpoints(path: str | Path, traj: Trajectory,
                      times: Sequence[float] | None = None) -> int:
    """Dump stored fields (all of them, or just the given instants).

    Returns the byte count written.  Requesting an instant that was not
    stored is an error, matching the no-silent-adjustment rule.
    """
    params = traj.grid_params
    if times is None:
        indices = sorted(traj.stored)
    else:
        dt = traj.dt or 1.0
        indices = []
        for t in times:
            idx = int(round((t - traj.times[0]) / dt))
            if idx not in traj.stored:
                raise ValueError(f"no stored field at t={t}")
            indices.append(idx)
        indices = sorted(set(indices))
    grid = traj.stored[indices[0]].grid
    blob = bytearray(
        _HEADER.pack(
            MAGIC, grid.n, grid.N, grid.L,
            params.p.numerator, params.p.denominator,
            params.mu, len(indices),
        )
    )
    for i in indices:
        blob += struct.pack("<d", float(traj.times[i]))
        blob += np.ascontiguousarray(traj.stored[i].values, dtype="<c16").tobytes()
    Path(path).write_bytes(blob)
    return len(blob)


def read_checkpoints(path: str | Path) -> tuple[TorusGrid, ProblemParams, list[tuple[float, Field]]]:
    """Parse a container back into (grid, params, [(t, field), ...])."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated container header")
    magic, n, N, L, p_num, p_den, mu, count = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if p_den == 0:
        raise ValueError(f"{path}: corrupt header (p denominator 0)")
    grid = TorusGrid(n=n, L=L, N=N)
    params = ProblemParams(n=n, p=Fraction(p_num, p_den), mu=mu)

    samples = N**n
    record = 8 + 16 * samples
    expected = _HEADER.size + count * record
    if len(raw) != expected:
        raise ValueError(
            f"{path}: container holds {len(raw)} bytes, header implies {expected}"
        )
    out: list[tuple[float, Field]] = []
    off = _HEADER.size
    for _ in range(count):
        (t,) = struct.unpack_from("<d", raw, off)
        vals = np.frombuffer(raw, dtype="<c16", count=samples, offset=off + 8)
        out.append((t, Field(grid, vals.astype(np.complex128).reshape(grid.shape))))
        off += record
    return grid, params, out
