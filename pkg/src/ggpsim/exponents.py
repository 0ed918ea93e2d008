"""Exact-rational scaling exponents and Strichartz pair-point geometry.

Everything here is computed with `fractions.Fraction` so that identity
residuals are exactly zero when an identity holds.  The only irrational
quantity, the Strichartz threshold power, is kept as (rational part,
radicand) and compared against rationals by isolating the radical and
squaring, never through floats.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

logger = logging.getLogger(__name__)

RationalLike = Union[Fraction, int, str]

TRIANGLE_IDS = ("T", "T'", "That")


def _squarefree_split(m: int) -> tuple[int, int]:
    """Write m = k**2 * g with g squarefree; return (k, g).  Requires m >= 1."""
    k, g, d = 1, 1, 2
    while d * d <= m:
        e = 0
        while m % d == 0:
            m //= d
            e += 1
        k *= d ** (e // 2)
        if e % 2:
            g *= d
        d += 1
    return k, g * m


@dataclass(frozen=True)
class AlgebraicNumber:
    """The exact value rational + sqrt(radicand), with radicand >= 0.

    Order comparisons against rationals are decided exactly: a + sqrt(r) < c
    iff c - a > 0 and r < (c - a)**2.
    """

    rational: Fraction
    radicand: Fraction

    def __float__(self) -> float:
        return float(self.rational) + math.sqrt(float(self.radicand))

    def __add__(self, other: RationalLike) -> "AlgebraicNumber":
        return AlgebraicNumber(self.rational + Fraction(other), self.radicand)

    __radd__ = __add__

    def _cmp(self, other: RationalLike) -> int:
        """Sign of self - other for rational other, without floats."""
        gap = Fraction(other) - self.rational
        if gap < 0:
            return 1
        if self.radicand == gap * gap:
            return 0
        return 1 if self.radicand > gap * gap else -1

    def __lt__(self, other: RationalLike) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: RationalLike) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: RationalLike) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: RationalLike) -> bool:
        return self._cmp(other) >= 0

    def __str__(self) -> str:
        # Render as (A + B*sqrt(g))/D with integers A, B, D and g squarefree,
        # e.g. "1+√2" or "(3+√17)/2".
        rn, rd = self.radicand.numerator, self.radicand.denominator
        k, g = _squarefree_split(rn * rd)
        coef = Fraction(k, rd)  # sqrt(radicand) == coef * sqrt(g)
        if g == 1 or coef == 0:
            return str(self.rational + coef)
        den = math.lcm(self.rational.denominator, coef.denominator)
        a = self.rational * den
        b = coef * den
        root = f"√{g}" if b == 1 else f"{b.numerator}√{g}"
        body = root if a == 0 else f"{a.numerator}+{root}"
        return body if den == 1 else f"({body})/{den}"


def k_strichartz(n: int) -> AlgebraicNumber:
    """k_St = (n + 2 + sqrt(n^2 + 12n + 4)) / (2n)."""
    return AlgebraicNumber(
        Fraction(n + 2, 2 * n), Fraction(n * n + 12 * n + 4, 4 * n * n)
    )


def admissible_range(n: int) -> tuple[AlgebraicNumber, Fraction]:
    """Open interval (1 + k_St, 1 + k_m) of powers p covered by the theory."""
    return 1 + k_strichartz(n), 2 + Fraction(4, n)


def in_range(n: int, p: RationalLike) -> bool:
    """Exact test for 1 + k_St < p < 1 + k_m."""
    p = Fraction(p)
    lo, hi = admissible_range(n)
    return lo < p and p < hi


@dataclass(frozen=True)
class ProblemParams:
    """Dimension n in {1, 2}, rational power p > 2, and the sign mu = +-1."""

    n: int
    p: Fraction
    mu: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", Fraction(self.p))
        if self.n not in (1, 2):
            raise ValueError(f"n must be 1 or 2, got {self.n}")
        if self.p <= 2:
            raise ValueError(f"p must exceed 2, got {self.p}")
        if self.mu not in (1, -1):
            raise ValueError(f"mu must be +1 or -1, got {self.mu}")

    @property
    def in_range(self) -> bool:
        return in_range(self.n, self.p)


@dataclass(frozen=True)
class ExponentSet:
    """All derived exponents for one (n, p); rationals except kSt."""

    n: int
    p: Fraction
    k1: Fraction
    k2: Fraction
    km: Fraction
    kSt: AlgebraicNumber
    s1: Fraction
    s2: Fraction
    s0: Fraction
    alpha: Fraction
    q13: Fraction
    in_range: bool

    @property
    def kSt_float(self) -> float:
        return float(self.kSt)


def derive_exponents(params: ProblemParams) -> ExponentSet:
    """Evaluate the closed forms for k1, k2, km, kSt, s1, s2, s0, alpha, q13."""
    n, p = params.n, params.p
    k1 = p - 1
    k2 = 2 * p - 1
    km = 1 + Fraction(4, n)
    kst = k_strichartz(n)
    s1 = Fraction(n, 2) - n / (k1 + 1)
    s2 = Fraction(n, 2) - 2 / (k2 - 1)
    s0 = max(s1, s2)
    alpha = 2 / (p - 2) - Fraction(n, 2)
    q13 = n * (p - 2) / 2
    flag = params.in_range

    # s0 = s_n and k1 < k2 are algebraic consequences of p > 2; the range
    # flag must agree with kSt < k1 < km since k1 = p - 1.
    assert k1 < k2
    assert s0 == (s1 if n == 1 else s2)
    assert flag == (kst < k1 and k1 < km)

    return ExponentSet(
        n=n, p=p, k1=k1, k2=k2, km=km, kSt=kst,
        s1=s1, s2=s2, s0=s0, alpha=alpha, q13=q13, in_range=flag,
    )


@dataclass(frozen=True)
class PairPoint:
    """A point (x, y) = (1/q, 1/r): reciprocal spatial and temporal exponents."""

    x: Fraction
    y: Fraction

    def pi(self, n: int) -> Fraction:
        return self.x + 2 * self.y / n

    @property
    def in_unit_box(self) -> bool:
        return 0 <= self.x <= 1 and 0 <= self.y <= 1

    def as_floats(self) -> tuple[float, float]:
        return float(self.x), float(self.y)

    def __sub__(self, other: "PairPoint") -> "PairPoint":
        return PairPoint(self.x - other.x, self.y - other.y)

    def scaled(self, c: RationalLike) -> "PairPoint":
        c = Fraction(c)
        return PairPoint(c * self.x, c * self.y)


@dataclass(frozen=True)
class PairSet:
    """The six pair points P1, P1bar, P2, P2bar, P2p, P2pbar for one (n, p)."""

    n: int
    p: Fraction
    P1: PairPoint
    P1bar: PairPoint
    P2: PairPoint
    P2bar: PairPoint
    P2p: PairPoint
    P2pbar: PairPoint

    def points(self) -> dict[str, PairPoint]:
        return {
            "P1": self.P1, "P1bar": self.P1bar,
            "P2": self.P2, "P2bar": self.P2bar,
            "P2p": self.P2p, "P2pbar": self.P2pbar,
        }


def derive_pairs(params: ProblemParams) -> PairSet:
    """Build the six pair points from their closed forms (exact rationals)."""
    n, p = Fraction(params.n), params.p
    a = (2 - n) * p + 2 * n  # shared numerator factor

    p1 = PairPoint(1 / p, a / (2 * p * (p - 2)))
    p1bar = PairPoint((p - 1) / p, (p - 1) * a / (2 * p * (p - 2)))
    p2 = PairPoint((n * p * p - 2 * p - 2 * n) / (2 * n * p * (p - 1)),
                   a / (4 * p * (p - 1)))
    p2bar = PairPoint(
        (3 * n * p * p - 2 * (3 * n + 1) * p + 2 * n) / (2 * n * p * (p - 1)),
        (2 * p - 1) * a / (4 * p * (p - 1)))
    p2p = PairPoint((p - 2) / (2 * p * (p - 1)), a / (4 * p * (p - 1)))
    p2pbar = PairPoint((p - 2) * (2 * p - 1) / (2 * p * (p - 1)),
                       (2 * p - 1) * a / (4 * p * (p - 1)))

    pairs = PairSet(n=params.n, p=p, P1=p1, P1bar=p1bar,
                    P2=p2, P2bar=p2bar, P2p=p2p, P2pbar=p2pbar)

    report = verify_pair_identities(pairs, derive_exponents(params))
    bad = [c.name for c in report if c.hard and not c.passed]
    if bad:
        raise AssertionError(f"pair identities violated at construction: {bad}")
    if not all(pt.in_unit_box for pt in pairs.points().values()):
        # Happens only for p outside the admissible range (e.g. p near 2).
        logger.warning(
            "pair points leave the unit square at n=%s, p=%s", params.n, p
        )
    return pairs


@dataclass(frozen=True)
class IdentityCheck:
    """One named identity with its exact residual(s); pass iff all zero."""

    name: str
    residual: tuple[Fraction, ...]
    hard: bool = True

    @property
    def passed(self) -> bool:
        return all(r == 0 for r in self.residual)

    def residual_str(self) -> str:
        body = ", ".join(str(r) for r in self.residual)
        return f"({body})" if len(self.residual) != 1 else body


def verify_pair_identities(pairs: PairSet, exps: ExponentSet) -> list[IdentityCheck]:
    """Exact-residual report for every pair-point identity.

    Hard checks are algebraic identities that must hold for every p > 2.
    The three soft checks transcribe line-membership claims whose printed
    form appears garbled in the source; their residuals are reported but
    they do not gate anything.
    """
    if (pairs.n, pairs.p) != (exps.n, exps.p):
        raise ValueError("pairs and exponents derived from different params")

    n, p = Fraction(pairs.n), pairs.p
    k1, k2 = exps.k1, exps.k2
    base = pairs.P1bar - pairs.P1
    checks: list[IdentityCheck] = []

    def vec(name: str, d: PairPoint, hard: bool = True) -> None:
        checks.append(IdentityCheck(name, (d.x, d.y), hard))

    def scal(name: str, r: Fraction, hard: bool = True) -> None:
        checks.append(IdentityCheck(name, (r,), hard))

    d21 = pairs.P2bar - pairs.P2
    d2p = pairs.P2pbar - pairs.P2p
    vec("vector_P2bar_minus_P2_equals_P1bar_minus_P1", d21 - base)
    vec("vector_P2pbar_minus_P2p_equals_P1bar_minus_P1", d2p - base)
    vec("vector_base_equals_k1m1_P1", base - pairs.P1.scaled(k1 - 1))
    vec("vector_base_equals_k2m1_P2p", base - pairs.P2p.scaled(k2 - 1))

    for name, pt, ptbar in (("pair1", pairs.P1, pairs.P1bar),
                            ("pair2", pairs.P2, pairs.P2bar),
                            ("pair2p", pairs.P2p, pairs.P2pbar)):
        scal(f"pi_gap_{name}_equals_2_over_n",
             ptbar.pi(pairs.n) - pt.pi(pairs.n) - 2 / n)

    # Ray through the origin: 2(p-2) y = ((2-n)p + 2n) x.
    a = (2 - n) * p + 2 * n
    for name, pt in (("P1", pairs.P1), ("P1bar", pairs.P1bar),
                     ("P2p", pairs.P2p), ("P2pbar", pairs.P2pbar)):
        scal(f"ray_{name}", 2 * (p - 2) * pt.y - a * pt.x)

    scal("pi_P2_equals_half", pairs.P2.pi(pairs.n) - Fraction(1, 2))
    scal("pi_P2bar_equals_half_plus_2_over_n",
         pairs.P2bar.pi(pairs.n) - Fraction(1, 2) - 2 / n)
    scal("pi_P1_equals_2_over_n_pm2", pairs.P1.pi(pairs.n) - 2 / (n * (p - 2)))
    scal("pi_P1bar_equals_2_over_n_plus_2_over_n_pm2",
         pairs.P1bar.pi(pairs.n) - 2 / n - 2 / (n * (p - 2)))
    scal("pi_P2p_equals_1_over_n_pm1", pairs.P2p.pi(pairs.n) - 1 / (n * (p - 1)))
    scal("pi_P2pbar_equals_2_over_n_plus_1_over_n_pm1",
         pairs.P2pbar.pi(pairs.n) - 2 / n - 1 / (n * (p - 1)))

    # Literal transcriptions (apparent typos; diagnostic only).
    scal("literal_P2p_on_x_plus_y_eq_1_over_2pm2",
         pairs.P2p.x + pairs.P2p.y - 1 / (2 * p - 2), hard=False)
    scal("literal_P2pbar_on_pi_eq_1_over_n_pm1",
         pairs.P2pbar.pi(pairs.n) - 1 / (n * (p - 1)), hard=False)
    scal("literal_P2bar_on_x_plus_y_eq_half_plus_2_over_n",
         pairs.P2bar.x + pairs.P2bar.y - Fraction(1, 2) - 2 / n, hard=False)

    return checks


@dataclass(frozen=True)
class TriangleSpec:
    """Triangle with the section-2 edge conventions attached.

    include_vertex is a closed vertex (B or B'); include_segment, when set,
    is an open segment on the boundary that counts as inside.
    """

    tri_id: str
    vertices: tuple[PairPoint, PairPoint, PairPoint]
    include_vertex: PairPoint | None = None
    include_segment: tuple[PairPoint, PairPoint] | None = None


def _corner_points(n: int) -> dict[str, PairPoint]:
    half = Fraction(1, 2)
    if n == 1:
        # The general formulas degenerate at n=1; these are the stated values.
        return {
            "B": PairPoint(half, Fraction(0)),
            "C": PairPoint(Fraction(0), Fraction(1, 4)),
            "D": PairPoint(Fraction(0), half),
            "E": PairPoint(Fraction(0), half),
            "F": PairPoint(Fraction(0), Fraction(0)),
            "B'": PairPoint(half, Fraction(1)),
            "E'": PairPoint(Fraction(1), half),
            "F'": PairPoint(Fraction(1), Fraction(1)),
        }
    return {
        "B": PairPoint(half, Fraction(0)),
        "C": PairPoint(half - Fraction(1, n), half),
        "D": PairPoint(Fraction(n - 2, 2 * (n - 1)), Fraction(n, 2 * (n - 1))),
        "E": PairPoint(half - Fraction(1, n), Fraction(1)),
        "F": PairPoint(half - Fraction(1, n), Fraction(0)),
        "B'": PairPoint(half, Fraction(1)),
        "E'": PairPoint(half + Fraction(1, n), Fraction(0)),
        "F'": PairPoint(half + Fraction(1, n), Fraction(1)),
    }


def triangle_spec(n: int, tri_id: str) -> TriangleSpec:
    """Vertices and edge conventions of triangle T, T' or That for dimension n."""
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    c = _corner_points(n)
    if tri_id == "T":
        return TriangleSpec("T", (c["B"], c["E"], c["F"]), include_vertex=c["B"])
    if tri_id == "T'":
        return TriangleSpec("T'", (c["B'"], c["E'"], c["F'"]),
                            include_vertex=c["B'"])
    if tri_id == "That":
        seg = (c["C"], c["D"]) if n != 2 else None
        return TriangleSpec("That", (c["B"], c["C"], c["D"]), include_segment=seg)
    raise ValueError(f"unknown triangle id {tri_id!r}, expected one of {TRIANGLE_IDS}")


def _cross(o: PairPoint, a: PairPoint, b: PairPoint) -> Fraction:
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)


def _strictly_between(a: PairPoint, b: PairPoint, pt: PairPoint) -> bool:
    """pt lies on the open segment (a, b)."""
    if _cross(a, b, pt) != 0:
        return False
    lo_x, hi_x = min(a.x, b.x), max(a.x, b.x)
    lo_y, hi_y = min(a.y, b.y), max(a.y, b.y)
    inside_x = lo_x < pt.x < hi_x if a.x != b.x else pt.x == a.x
    inside_y = lo_y < pt.y < hi_y if a.y != b.y else pt.y == a.y
    return inside_x and inside_y and pt != a and pt != b


def triangle_membership(point: PairPoint, n: int, tri_id: str) -> bool:
    """Exact point-in-triangle test honoring the open/closed edge conventions."""
    spec = triangle_spec(n, tri_id)
    v0, v1, v2 = spec.vertices
    s0 = _cross(v0, v1, point)
    s1 = _cross(v1, v2, point)
    s2 = _cross(v2, v0, point)
    if (s0 > 0 and s1 > 0 and s2 > 0) or (s0 < 0 and s1 < 0 and s2 < 0):
        return True
    if spec.include_vertex is not None and point == spec.include_vertex:
        return True
    if spec.include_segment is not None and _strictly_between(
        spec.include_segment[0], spec.include_segment[1], point
    ):
        return True
    on_closed = (min(s0, s1, s2) >= 0) or (max(s0, s1, s2) <= 0)
    if on_closed and 0 in (s0, s1, s2):
        logger.warning(
            "boundary query on %s (n=%d) at %s excluded by the open-edge "
            "convention", tri_id, n, point.as_floats(),
        )
    return False


def strichartz_q_admissible(n: int, q: RationalLike) -> bool:
    """The 1/q window of the homogeneous estimate: (1/2, 1] if n=1, (1/2, 1) if n=2.

    The source leaves the upper bound's symbol undefined for n=2; it is read
    as n/(2(n-1)), which gives the open endpoint 1.
    """
    invq = 1 / Fraction(q)
    if n == 1:
        return Fraction(1, 2) < invq <= 1
    return Fraction(1, 2) < invq < 1
