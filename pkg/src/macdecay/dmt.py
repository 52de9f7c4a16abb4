"""Exact piecewise-linear DMT curves with rational breakpoints."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "DmtError",
    "PLCurve",
    "DmtScenario",
    "optimal_p2p",
    "scale_arg",
    "pointwise_min",
    "eval_at",
    "extend_zero",
    "mac_optimal",
    "mac_lower_bound",
    "lower_bound_theta",
    "lower_bound_point",
    "optimal_point",
    "optimality_threshold",
]

Q = Fraction


class DmtError(ValueError):
    pass


@dataclass(frozen=True)
class PLCurve:
    """Piecewise-linear function on [0, r_max] given by its breakpoints."""

    points: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        pts = tuple((Q(r), Q(d)) for r, d in self.points)
        if not pts:
            raise DmtError("a curve needs at least one breakpoint")
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise DmtError("breakpoints must have strictly increasing r")
        object.__setattr__(self, "points", pts)

    @property
    def r_max(self) -> Fraction:
        return self.points[-1][0]

    @property
    def r_min(self) -> Fraction:
        return self.points[0][0]

    def __call__(self, r) -> Fraction:
        return eval_at(self, r)

    def slopes(self) -> list[Fraction]:
        return [(d2 - d1) / (r2 - r1) for (r1, d1), (r2, d2) in zip(self.points, self.points[1:])]

    def is_nonincreasing(self) -> bool:
        return all(s <= 0 for s in self.slopes())

    def is_convex(self) -> bool:
        s = self.slopes()
        return all(a <= b for a, b in zip(s, s[1:]))

    def simplified(self) -> PLCurve:
        """Drop breakpoints interior to a straight segment."""
        pts = list(self.points)
        out = [pts[0]]
        for i in range(1, len(pts) - 1):
            (r0, d0), (r1, d1), (r2, d2) = out[-1], pts[i], pts[i + 1]
            if (d1 - d0) * (r2 - r1) != (d2 - d1) * (r1 - r0):
                out.append(pts[i])
        if len(pts) > 1:
            out.append(pts[-1])
        return PLCurve(tuple(out))

    def restrict(self, r_max) -> PLCurve:
        r_max = Q(r_max)
        if r_max < self.r_min:
            raise DmtError("restriction leaves an empty domain")
        pts = [p for p in self.points if p[0] < r_max]
        pts.append((r_max, eval_at(self, r_max)))
        return PLCurve(tuple(pts))

    def rows(self) -> list[tuple[int, int, int, int, float, float]]:
        return [(r.numerator, r.denominator, d.numerator, d.denominator, float(r), float(d)) for r, d in self.points]


@dataclass(frozen=True)
class DmtScenario:
    U: int
    nt: int
    nr: int
    rates: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if min(self.U, self.nt, self.nr) < 1:
            raise DmtError("U, nt and nr must be positive")
        if self.rates is not None:
            rates = tuple(Q(r) for r in self.rates)
            if len(rates) != self.U or any(r < 0 for r in rates):
                raise DmtError("need one non-negative rate per user")
            object.__setattr__(self, "rates", rates)

    @property
    def r_max(self) -> Fraction:
        """Largest symmetric multiplexing gain min(U nt, nr) / U."""
        return Q(min(self.U * self.nt, self.nr), self.U)


def optimal_p2p(m: int, n: int) -> PLCurve:
    """d*_{m,n}: joins (r, (m-r)(n-r)) for r = 0..min(m, n)."""
    if m < 1 or n < 1:
        raise DmtError("antenna numbers must be positive")
    return PLCurve(tuple((Q(r), Q((m - r) * (n - r))) for r in range(min(m, n) + 1)))


def eval_at(c: PLCurve, r, extend: bool = False) -> Fraction:
    """Exact value by linear interpolation; beyond r_max gives 0 when ``extend``."""
    r = Q(r)
    pts = c.points
    if r < pts[0][0]:
        raise DmtError(f"r={r} below the curve domain")
    if r > pts[-1][0]:
        if extend:
            return Q(0)
        raise DmtError(f"r={r} above the curve domain [0, {pts[-1][0]}]")
    lo, hi = 0, len(pts) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pts[mid][0] <= r:
            lo = mid
        else:
            hi = mid
    (r0, d0) = pts[lo]
    if r == r0 or hi == lo:
        return d0
    (r1, d1) = pts[hi]
    return d0 + (d1 - d0) * (r - r0) / (r1 - r0)


def scale_arg(c: PLCurve, s) -> PLCurve:
    """r -> c(s r) for a positive rational s."""
    s = Q(s)
    if s <= 0:
        raise DmtError("scale must be positive")
    return PLCurve(tuple((r / s, d) for r, d in c.points))


def extend_zero(c: PLCurve, r_max) -> PLCurve:
    """Extend by the value 0 up to r_max (d* vanishes beyond the maximal multiplexing gain)."""
    r_max = Q(r_max)
    if r_max <= c.r_max:
        return c.restrict(r_max)
    if c.points[-1][1] != 0:
        raise DmtError("only curves ending at 0 can be zero-extended")
    return PLCurve(c.points + ((r_max, Q(0)),))


def _segment_cross(r0, r1, a0, a1, b0, b1):
    # linear pieces a, b on [r0, r1]; return interior crossing r or None
    da, db = a0 - b0, a1 - b1
    if da == 0 or db == 0 or (da > 0) == (db > 0):
        return None
    t = da / (da - db)
    return r0 + t * (r1 - r0)


def pointwise_min(c1: PLCurve, c2: PLCurve) -> PLCurve:
    """Exact pointwise minimum on the intersection of the two domains."""
    lo = max(c1.r_min, c2.r_min)
    hi = min(c1.r_max, c2.r_max)
    if hi < lo:
        raise DmtError("curves have disjoint domains")
    rs = sorted({r for r, _ in c1.points + c2.points if lo <= r <= hi} | {lo, hi})
    pts = []
    for i, r in enumerate(rs):
        a, b = eval_at(c1, r), eval_at(c2, r)
        pts.append((r, min(a, b)))
        if i + 1 < len(rs):
            r1 = rs[i + 1]
            x = _segment_cross(r, r1, a, eval_at(c1, r1), b, eval_at(c2, r1))
            if x is not None:
                pts.append((x, eval_at(c1, x)))
    return PLCurve(tuple(pts)).simplified()


def _min_all(curves: Iterable[PLCurve]) -> PLCurve:
    it = iter(curves)
    out = next(it)
    for c in it:
        out = pointwise_min(out, c)
    return out


def mac_optimal(sc: DmtScenario) -> PLCurve:
    """Symmetric optimal MAC DMT: min over u of d*_{u nt, nr}(u r) on [0, min(U nt, nr)/U]."""
    top = sc.r_max
    return _min_all(
        extend_zero(scale_arg(optimal_p2p(u * sc.nt, sc.nr), u), top) for u in range(1, sc.U + 1)
    )


def mac_lower_bound(sc: DmtScenario) -> PLCurve:
    """Symmetric lower bound: min{d*_{nt,nr}(r), d*_{u nt, nr}(U u r) : u = 2..U} on [0, nt/U]."""
    top = min(Q(sc.nt, sc.U), sc.r_max)
    curves = [extend_zero(optimal_p2p(sc.nt, sc.nr), top)]
    curves += [
        extend_zero(scale_arg(optimal_p2p(u * sc.nt, sc.nr), sc.U * u), top) for u in range(2, sc.U + 1)
    ]
    return _min_all(curves)


def lower_bound_theta(sc: DmtScenario) -> Fraction:
    """Switch point min{nt/U, nr/(U(U+2))} between the two-user and all-user terms."""
    return min(Q(sc.nt, sc.U), Q(sc.nr, sc.U * (sc.U + 2)))


def _subsets_sums(rates: Sequence[Fraction]):
    from itertools import combinations

    U = len(rates)
    for u in range(2, U + 1):
        for idx in combinations(range(U), u):
            yield u, sum((rates[i] for i in idx), Q(0))


def lower_bound_point(sc: DmtScenario, rates: Sequence | None = None) -> Fraction:
    """Lower bound at an asymmetric rate tuple: min{d*_{u nt,nr}(U sum_I r_i), d*_{nt,nr}(r_j)}."""
    rates = tuple(Q(r) for r in (rates if rates is not None else sc.rates))
    single = optimal_p2p(sc.nt, sc.nr)
    vals = [eval_at(single, r, extend=True) for r in rates]
    for u, s in _subsets_sums(rates):
        vals.append(eval_at(optimal_p2p(u * sc.nt, sc.nr), sc.U * s, extend=True))
    return min(vals)


def optimal_point(sc: DmtScenario, rates: Sequence | None = None) -> Fraction:
    """Optimal MAC DMT at an asymmetric rate tuple."""
    rates = tuple(Q(r) for r in (rates if rates is not None else sc.rates))
    single = optimal_p2p(sc.nt, sc.nr)
    vals = [eval_at(single, r, extend=True) for r in rates]
    for u, s in _subsets_sums(rates):
        vals.append(eval_at(optimal_p2p(u * sc.nt, sc.nr), s, extend=True))
    return min(vals)


def optimality_threshold(sc: DmtScenario) -> Fraction:
    """Supremum of the initial interval [0, r] on which the lower bound meets the optimal curve."""
    lb, opt = mac_lower_bound(sc), mac_optimal(sc)
    hi = min(lb.r_max, opt.r_max)
    rs = sorted({r for r, _ in lb.points + opt.points if r <= hi} | {hi})
    if eval_at(lb, rs[0]) != eval_at(opt, rs[0]):
        return rs[0]
    last = rs[0]
    for r in rs[1:]:
        # the difference is linear between merged breakpoints
        if eval_at(lb, r) != eval_at(opt, r):
            return last
        last = r
    return last
