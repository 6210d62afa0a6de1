"""Two-type assignment rules and their red-probability polynomial.

A rule assigns the probability p[k] that a newcomer with k red
neighbours (out of m, counted with multiplicity) turns red. R(z) is the
induced probability of turning red when each neighbour is independently
red with probability z; its fixed points are the candidate limits for
the red proportion, classified by the sign of R(z) - z on either side.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import comb, factorial
from typing import Sequence

import numpy as np

from .errors import PreconditionError, SpecError
from .numerics import Poly, real_roots

#: Marker returned by fixed-point searches for the linear rule, whose
#: R(z) = z makes every point of [0, 1] a fixed point.
UNIT_INTERVAL = "unit-interval"

_KINDS = ("stable", "unstable", "touchpoint", "boundary-stable", "boundary-unstable")


@dataclass(frozen=True)
class TypeRule:
    """Assignment rule: m edges per newcomer, p[k] = P(red | k red neighbours)."""

    m: int
    p: tuple[float, ...]
    name: str = "explicit"

    def __post_init__(self):
        if self.m < 1:
            raise SpecError("m must be >= 1")
        p = tuple(float(v) for v in self.p)
        if len(p) != self.m + 1:
            raise SpecError(f"need m+1={self.m + 1} probabilities, got {len(p)}")
        for v in p:
            if not (0.0 <= v <= 1.0):
                raise SpecError(f"probability {v} outside [0, 1]")
        object.__setattr__(self, "p", p)
        coeffs = self._exact_coeffs
        if coeffs[0] != Fraction(p[0]) or sum(coeffs) != Fraction(p[self.m]):
            raise SpecError("power-basis coefficients violate R(0)=p0 / R(1)=pm")
        grid = np.linspace(0.0, 1.0, 1001)
        vals = self.r(grid)
        if vals.min() < -1e-12 or vals.max() > 1.0 + 1e-12:
            raise SpecError("R(z) leaves [0, 1] on the unit-interval grid")

    @cached_property
    def _exact_coeffs(self) -> tuple[Fraction, ...]:
        # rational accumulation of binom(m,i) p_i z^i (1-z)^(m-i); floats are
        # taken at their exact binary values, so no cancellation before the
        # final conversion
        m = self.m
        c = [Fraction(0)] * (m + 1)
        for i, pi in enumerate(self.p):
            if pi == 0.0:
                continue
            b = comb(m, i) * Fraction(pi)
            for j in range(m - i + 1):
                term = b * comb(m - i, j)
                c[i + j] += -term if j % 2 else term
        return tuple(c)

    @cached_property
    def r_poly(self) -> Poly:
        """R(z) in the power basis."""
        return Poly(tuple(float(v) for v in self._exact_coeffs))

    @cached_property
    def is_linear(self) -> bool:
        """True when R(z) = z identically.

        Detected from the power coefficients; p vectors entered as floats
        (e.g. k/m for m=5) reproduce the identity only up to rounding, so a
        1e-12 band is allowed around the exact coefficient identity.
        """
        if self.name == "linear":
            return True
        dev = [abs(float(c) - (1.0 if k == 1 else 0.0))
               for k, c in enumerate(self._exact_coeffs)]
        return max(dev) <= 1e-12

    def r(self, z):
        """Stable Bernstein-form evaluation of R(z) (scalar or array)."""
        z = np.asarray(z, dtype=float)
        acc = np.zeros_like(z)
        for i, pi in enumerate(self.p):
            if pi != 0.0:
                acc = acc + comb(self.m, i) * pi * z**i * (1.0 - z) ** (self.m - i)
        return acc if acc.ndim else float(acc)

    def r_prime(self, z):
        return self.r_poly.derivative()(z)

    def r2(self, z):
        """Stable evaluation of the composition R(R(z))."""
        return self.r(self.r(z))


def r_poly(rule: TypeRule) -> Poly:
    return rule.r_poly


def make_rule(spec, m: int | None = None, r: int | None = None, p=None) -> TypeRule:
    """Build a rule from a name, a config string, or an explicit p vector.

    Accepted names: majority, minority, random-visible, linear,
    modified-minority (needs r), touchpoint (m=3 only), explicit (needs p).
    Config strings look like ``majority:m=3``, ``modified-minority:m=9,r=4``
    or ``explicit:p=[0.25,0,1,1]``.
    """
    if isinstance(spec, (list, tuple, np.ndarray)):
        return _explicit(spec)
    if not isinstance(spec, str):
        raise SpecError(f"rule spec must be a name or probability vector, got {spec!r}")
    name = spec
    if ":" in spec:
        name, _, args = spec.partition(":")
        for part in _split_args(args):
            key, _, val = part.partition("=")
            key = key.strip()
            if key == "m":
                m = int(val)
            elif key == "r":
                r = int(val)
            elif key == "p":
                p = [float(v) for v in val.strip().lstrip("[").rstrip("]").split(",")]
            else:
                raise SpecError(f"unknown rule parameter {key!r}")
    name = name.strip()

    if name == "explicit":
        if p is None:
            raise SpecError("explicit rule needs p=[...]")
        return _explicit(p)
    if name == "majority":
        _need_m(name, m)
        probs = [0.0 if 2 * k < m else 1.0 if 2 * k > m else 0.5 for k in range(m + 1)]
        return TypeRule(m, tuple(probs), name="majority")
    if name == "minority":
        _need_m(name, m)
        probs = [1.0 if 2 * k < m else 0.0 if 2 * k > m else 0.5 for k in range(m + 1)]
        return TypeRule(m, tuple(probs), name="minority")
    if name == "random-visible":
        _need_m(name, m)
        probs = [0.0] + [0.5] * (m - 1) + [1.0] if m >= 1 else []
        if m == 1:
            probs = [0.0, 1.0]
        return TypeRule(m, tuple(probs), name="random-visible")
    if name == "linear":
        _need_m(name, m)
        return TypeRule(m, tuple(k / m for k in range(m + 1)), name="linear")
    if name == "modified-minority":
        _need_m(name, m)
        if r is None:
            raise SpecError("modified-minority needs r")
        if not (0 <= r <= m):
            raise SpecError(f"r={r} outside 0..m")
        return TypeRule(m, tuple(1.0 if k <= r else 0.0 for k in range(m + 1)),
                        name="modified-minority")
    if name == "touchpoint":
        if m not in (None, 3):
            raise SpecError("the touchpoint rule is defined for m=3")
        return TypeRule(3, (0.25, 0.0, 1.0, 1.0), name="touchpoint")
    raise SpecError(f"unknown rule name {name!r}")


def _split_args(args: str) -> list[str]:
    # commas inside p=[...] do not separate parameters
    parts, depth, cur = [], 0, ""
    for ch in args:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        parts.append(cur)
    return parts


def _need_m(name, m):
    if m is None:
        raise SpecError(f"rule {name!r} needs m")


def _explicit(p) -> TypeRule:
    p = tuple(float(v) for v in p)
    if len(p) < 2:
        raise SpecError("explicit rule needs at least two probabilities")
    return TypeRule(len(p) - 1, p, name="explicit")


@dataclass(frozen=True)
class FixedPoint:
    """A solution of R(z) = z with its sign-based and linear classifications."""

    z: float
    kind: str
    linear: str
    rprime: float

    @property
    def is_stable(self) -> bool:
        return self.kind in ("stable", "boundary-stable")

    @property
    def is_touchpoint(self) -> bool:
        return self.kind == "touchpoint"


def fixed_points(rule: TypeRule):
    """Fixed points of R in [0, 1], or the UNIT_INTERVAL marker for linear rules."""
    if rule.is_linear:
        return UNIT_INTERVAL
    gap = _diff_poly(rule.r_poly)
    roots = _locate_unit_roots(gap, lambda z: rule.r(z) - z)
    return [_classify(z, lambda y: rule.r(y) - y, rule.r_prime(z), roots) for z in roots]


def composite_fixed_points(rule: TypeRule):
    """Fixed points of R(R(z)) in [0, 1], classified by the composite's slope."""
    if rule.is_linear:
        return UNIT_INTERVAL
    if rule.m > 8:
        raise SpecError("composite analysis supports m <= 8 (degree cap 64)")
    comp = _compose_exact(rule._exact_coeffs, rule._exact_coeffs)
    gap = list(comp)
    gap[1] -= 1
    gap_poly = Poly(tuple(float(v) for v in gap))

    def diff(z):
        return rule.r2(z) - z

    roots = _locate_unit_roots(gap_poly, diff)
    out = []
    for z in roots:
        slope = rule.r_prime(rule.r(z)) * rule.r_prime(z)
        out.append(_classify(z, diff, slope, roots))
    return out


def _diff_poly(rp: Poly) -> Poly:
    coeffs = list(rp.coeffs)
    while len(coeffs) < 2:
        coeffs.append(0.0)
    coeffs[1] -= 1.0
    return Poly(tuple(coeffs))


def _compose_exact(outer, inner):
    """Coefficients of outer(inner(z)) by Horner over exact rationals."""
    acc = [outer[-1]]
    for c in outer[-2::-1]:
        nxt = [Fraction(0)] * (len(acc) + len(inner) - 1)
        for i, a in enumerate(acc):
            if a:
                for j, b in enumerate(inner):
                    nxt[i + j] += a * b
        nxt[0] += c
        acc = nxt
    while len(acc) > 1 and acc[-1] == 0:
        acc.pop()
    return acc


def _locate_unit_roots(gap_poly: Poly, diff, dedup_tol: float = 1e-7):
    """Roots of diff(z)=0 in [0,1]: polynomial roots, polished on diff, deduplicated."""
    if gap_poly.degree < 1:
        return []
    candidates = real_roots(gap_poly, 0.0, 1.0, imag_tol=1e-6)
    polished = [_polish_root(z, diff) for z in candidates]
    polished.sort()
    out = []
    for z in polished:
        if not out or z - out[-1] > dedup_tol:
            out.append(z)
        # near-coincident root pairs (touchpoint tangencies) merge here
    return [z for z in out if abs(diff(z)) <= 1e-9]


def _polish_root(z: float, diff, h: float = 1e-7) -> float:
    # greedy Newton on the stable evaluation: only moves that shrink |diff|
    # are kept, so tangent roots (slope ~ 0) are left where poly_roots put them
    best = abs(diff(z))
    for _ in range(8):
        if best <= 1e-14:
            break
        slope = (diff(z + h) - diff(z - h)) / (2.0 * h)
        if slope == 0.0:
            break
        step = diff(z) / slope
        if abs(step) > 1e-3:
            break
        cand = min(max(z - step, 0.0), 1.0)
        val = abs(diff(cand))
        if val < best:
            z, best = cand, val
        else:
            break
    return z


def _classify(z: float, diff, slope: float, all_roots) -> FixedPoint:
    eps = 1e-4
    others = [r for r in all_roots if abs(r - z) > 1e-7]
    if others:
        eps = min(eps, min(abs(r - z) for r in others) / 2.0)

    if z < eps:  # boundary fixed point at 0: only the right side counts
        kind = "boundary-stable" if _sign(diff(z + eps)) < 0 else "boundary-unstable"
    elif z > 1.0 - eps:
        kind = "boundary-stable" if _sign(diff(z - eps)) > 0 else "boundary-unstable"
    else:
        left, right = _sign(diff(z - eps)), _sign(diff(z + eps))
        if left > 0 and right < 0:
            kind = "stable"
        elif left < 0 and right > 0:
            kind = "unstable"
        else:
            kind = "touchpoint"

    if kind in ("stable", "boundary-stable") and slope < 1.0 - 1e-9:
        linear = "linearly-stable"
    elif kind in ("unstable", "boundary-unstable") and slope > 1.0 + 1e-9:
        linear = "linearly-unstable"
    else:
        linear = "marginal"
    return FixedPoint(z=z, kind=kind, linear=linear, rprime=float(slope))


def _sign(v: float) -> int:
    if v > 0.0:
        return 1
    if v < 0.0:
        return -1
    return 0


def check_two_point_condition(rule: TypeRule, grid: int = 2001):
    """Test for a pair z' < z* < z'' with R(z') >= z'' and R(z'') <= z'.

    Requires R to have a unique stable fixed point and no other interior
    fixed points. Returns (True, None) when no such pair exists, else
    (False, (z', z'')) with the separation-maximizing witness refined by
    bisection.
    """
    fps = fixed_points(rule)
    if fps == UNIT_INTERVAL:
        raise PreconditionError("linear rule: every point is fixed")
    stable = [f for f in fps if f.is_stable]
    if len(stable) != 1:
        raise PreconditionError(f"need exactly one stable fixed point, found {len(stable)}")
    zstar = stable[0].z
    interior_others = [f for f in fps if 1e-9 < f.z < 1.0 - 1e-9 and abs(f.z - zstar) > 1e-9]
    if interior_others:
        raise PreconditionError("other interior fixed points present")
    if zstar < 1e-9 or zstar > 1.0 - 1e-9:
        return True, None

    g = np.linspace(0.0, 1.0, grid)
    rg = rule.r(g)
    lo = g < zstar
    hi = g > zstar
    # pair (i, j): g[i] < z* < g[j], R(g[i]) >= g[j] and R(g[j]) <= g[i]
    viol = (rg[lo][:, None] >= g[hi][None, :]) & (rg[hi][None, :] <= g[lo][:, None])
    if not viol.any():
        return True, None
    sep = g[hi][None, :] - g[lo][:, None]
    sep[~viol] = -1.0
    i, j = np.unravel_index(np.argmax(sep), sep.shape)
    zp, zpp = float(g[lo][i]), float(g[hi][j])

    # widen the witness: push z'' up then z' down while both inequalities hold
    for _ in range(3):
        lo_b, hi_b = zpp, 1.0
        for _ in range(60):
            mid = 0.5 * (lo_b + hi_b)
            if rule.r(zp) >= mid and rule.r(mid) <= zp:
                lo_b = mid
            else:
                hi_b = mid
        zpp = lo_b
        lo_b, hi_b = 0.0, zp
        for _ in range(60):
            mid = 0.5 * (lo_b + hi_b)
            if rule.r(mid) >= zpp and rule.r(zpp) <= mid:
                hi_b = mid
            else:
                lo_b = mid
        zp = hi_b
    return False, (zp, zpp)


def is_increasing(rule: TypeRule) -> bool:
    """True when R'(z) >= -1e-12 everywhere on [0, 1]."""
    rp = rule.r_poly.derivative()
    candidates = [0.0, 1.0]
    rpp = rp.derivative()
    if rpp.degree >= 1:
        candidates += real_roots(rpp, 0.0, 1.0)
    elif rp.degree == 0:
        return rp.coeffs[0] >= -1e-12
    return min(rp(z) for z in candidates) >= -1e-12


def minority_rprime_half(m: int) -> float:
    """Slope of the minority rule's R at 1/2: -m! / (2^(m-1) ((m-1)/2)!^2)."""
    if m < 1 or m % 2 == 0:
        raise SpecError("minority slope formula needs odd m >= 1")
    half = (m - 1) // 2
    return float(Fraction(-factorial(m), 2 ** (m - 1) * factorial(half) ** 2))
