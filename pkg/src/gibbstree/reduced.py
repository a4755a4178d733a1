"""Reduced two-dimensional fixed-point problem.

A boundary law c1 + c2 * theta * g(t) is a fixed point of the Hammerstein
operator exactly when (c1, c2) is a fixed point of the polynomial map
``v_apply``.  Writing z = theta * y / x turns the nontrivial branch into the
odd polynomial P(z) = z F2(z) - theta F1(z), whose coefficients change sign at
most once.  Its unique positive root z0 gives back (x0, y0).
"""

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import DomainError, NumericalFailure
from .model import ModelParams

__all__ = [
    "PolyCoeffs",
    "FixedPointKind",
    "FixedPoint2D",
    "series_eval",
    "v_apply",
    "v_residual",
    "theta_threshold",
    "poly_coeffs",
    "solve_z0",
    "recover_xy",
    "enumerate_fixed_points",
    "axis_fixed_points",
    "classify_positive",
    "alt_sum_identity",
    "positivity_bound",
    "MAX_FACTORIAL_ARG",
]

# Coefficients with |r| <= ZERO_RTOL * max|r| count as zero for sign changes.
ZERO_RTOL = 1e-14
BISECT_RTOL = 1e-13
NEWTON_MAX_STEPS = 50
ROOT_RESIDUAL_RTOL = 1e-10
FIXED_POINT_ATOL = 1e-9
# alt_sum_identity refuses k + m + 1 beyond this (bounds factorial size, not correctness).
MAX_FACTORIAL_ARG = 5000


def _f2_coeffs(params):
    """{even i: C(k,i) m/(m+i) 2**(i/m)} for 0 <= i <= k."""
    k, m = params.k, params.m
    return {i: comb(k, i) * m / (m + i) * 2.0 ** (i / m) for i in range(0, k + 1, 2)}


def _f1_coeffs(params):
    """{odd i: C(k,i) m/(m+1+i) 2**((i-1)/m)} for 1 <= i <= k."""
    k, m = params.k, params.m
    return {i: comb(k, i) * m / (m + 1 + i) * 2.0 ** ((i - 1) / m) for i in range(1, k + 1, 2)}


def series_eval(params, z):
    """Return ``(f1, f2)`` at z (scalar or array).

    f2 collects the even powers and is >= 1 everywhere; f1 collects the odd
    powers, so f1 is odd and f2 is even in z.
    """
    z = np.asarray(z, dtype=float)
    # Summing in w = z**2 makes the parities exact in floating point.
    w = z * z
    f1 = z * sum(c * w ** (i // 2) for i, c in _f1_coeffs(params).items())
    f2 = sum(c * w ** (i // 2) for i, c in _f2_coeffs(params).items())
    if z.ndim == 0:
        return float(f1), float(f2)
    return f1, f2


def v_apply(params, x, y):
    """Apply the two-dimensional map to (x, y).

    Uses the polynomial form directly, so x = 0 is allowed.  Terms with a
    vanishing binomial coefficient are dropped.
    """
    k, m, theta = params.k, params.m, params.theta
    ty = theta * y
    xp = 0.0
    for j in range(k // 2 + 1):
        i = 2 * j
        xp += comb(k, i) * m / (m + i) * 2.0 ** (i / m) * x ** (k - i) * ty**i
    yp = 0.0
    for j in range((k - 1) // 2 + 1):
        i = 2 * j + 1
        yp += comb(k, i) * m / (m + 1 + i) * 2.0 ** ((i - 1) / m) * x ** (k - i) * ty**i
    return xp, yp


def v_residual(params, x, y):
    """Sup-norm distance between (x, y) and its image."""
    xp, yp = v_apply(params, x, y)
    return max(abs(xp - x), abs(yp - y))


def _threshold_fraction(k, n, i):
    return Fraction(i, k - i + 1) * Fraction(2 * n + 2 + i, 2 * n + i)


def theta_threshold(k, n, i):
    """Coupling at which the degree-i coefficient of P vanishes.

    Equals i/(k-i+1) * (2n+2+i)/(2n+i); strictly increasing in i and equal to
    theta_c for i = 1.
    """
    if int(k) != k or k < 2 or int(n) != n or n < 0:
        raise DomainError(f"invalid (k, n) = ({k!r}, {n!r})")
    if int(i) != i or i % 2 == 0 or not (1 <= i <= k):
        raise DomainError(f"i must be odd with 1 <= i <= k={k}, got {i!r}")
    return float(_threshold_fraction(int(k), int(n), int(i)))


@dataclass(frozen=True)
class PolyCoeffs:
    """Coefficients of P(z) by degree.

    ``entries`` holds the odd-degree coefficients (degree 1 up to k-1 for even
    k, up to k for odd k); ``leading`` is the extra (k+1, r) term present only
    for even k.
    """

    entries: tuple
    leading: tuple = None
    sign_changes: int = 0

    def terms(self):
        """All (degree, coefficient) pairs in increasing degree."""
        out = list(self.entries)
        if self.leading is not None:
            out.append(self.leading)
        return out

    @property
    def top(self):
        return self.terms()[-1]

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        w = z * z
        val = z * sum(r * w ** (d // 2) for d, r in self.terms())
        return float(val) if z.ndim == 0 else val

    def scale(self, z):
        """sum |r_i| |z|**i; the magnitude against which P(z) is judged small."""
        return float(sum(abs(r) * abs(z) ** d for d, r in self.terms()))

    def w_coefficients(self):
        """Coefficients q_j of P(z)/z = sum_j q_j w**j with w = z**2."""
        terms = self.terms()
        q = np.zeros(len(terms))
        for d, r in terms:
            q[(d - 1) // 2] = r
        return q


def _count_sign_changes(values):
    values = list(values)
    tol = ZERO_RTOL * max(abs(v) for v in values)
    signs = [1 if v > 0 else -1 for v in values if abs(v) > tol]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def poly_coeffs(params):
    """Build the coefficient table r_theta(k, i) of P(z)."""
    k, n, m, theta = params.k, params.n, params.m, params.theta
    top_odd = k if k % 2 else k - 1
    entries = []
    for i in range(1, top_odd + 1, 2):
        gap = float(_threshold_fraction(k, n, i)) - theta
        entries.append((i, comb(k, i) * m / (m + 1 + i) * 2.0 ** ((i - 1) / m) * gap))
    leading = None
    if k % 2 == 0:
        leading = (k + 1, m / (m + k) * 2.0 ** (k / m))
    values = [r for _, r in entries] + ([leading[1]] if leading else [])
    return PolyCoeffs(tuple(entries), leading, _count_sign_changes(values))


def _horner(q, w):
    acc = 0.0
    for c in q[::-1]:
        acc = acc * w + c
    return acc


def _horner_deriv(q, w):
    acc = 0.0
    for j in range(len(q) - 1, 0, -1):
        acc = acc * w + j * q[j]
    return acc


def solve_z0(params, coeffs=None):
    """Unique positive root z0 of P, or None when theta <= theta_c.

    Works on w = z**2 where P(z)/z has exactly one positive root: bisection
    over (0, Cauchy bound] followed by bounded Newton polishing.
    """
    pc = coeffs if coeffs is not None else poly_coeffs(params)
    if pc.sign_changes == 0:
        return None
    q = pc.w_coefficients()
    lead = q[-1]
    lo, hi = 0.0, 1.0 + float(np.max(np.abs(q[:-1]))) / lead
    f_lo, f_hi = _horner(q, lo), _horner(q, hi)
    if not (f_lo < 0.0 < f_hi):
        raise NumericalFailure(
            f"no sign-changing bracket for P(z)/z at {params} (values {f_lo:g}, {f_hi:g})"
        )
    while hi - lo > BISECT_RTOL * hi:
        mid = 0.5 * (lo + hi)
        if _horner(q, mid) < 0.0:
            lo = mid
        else:
            hi = mid
    w = 0.5 * (lo + hi)
    for _ in range(NEWTON_MAX_STEPS):
        d = _horner_deriv(q, w)
        if d <= 0.0:
            break
        step = _horner(q, w) / d
        w_new = w - step
        if not (lo <= w_new <= hi):
            break
        w = w_new
        if abs(step) <= 4.0 * np.finfo(float).eps * w:
            break
    z0 = math.sqrt(w)
    if abs(pc(z0)) > ROOT_RESIDUAL_RTOL * pc.scale(z0):
        raise NumericalFailure(f"root polish failed at {params}: P(z0)={pc(z0):g}")
    return z0


def recover_xy(params, z0):
    """Map the positive root z0 back to the fixed point (x0, y0), both > 0."""
    if not z0 > 0.0:
        raise DomainError(f"z0 must be positive, got {z0!r}")
    f1, f2 = series_eval(params, z0)
    if not f2 > 0.0:
        raise NumericalFailure(f"F2(z0) = {f2!r} is not positive")
    k = params.k
    x0 = f2 ** (1.0 / (1 - k))
    y0 = f1 * f2 ** (k / (1 - k))
    return x0, y0


class FixedPointKind(str, enum.Enum):
    origin = "origin"
    unit = "unit"
    negated_unit = "negated_unit"
    branch_pp = "branch_pp"
    branch_mm = "branch_mm"
    branch_pm = "branch_pm"
    branch_mp = "branch_mp"
    # Present only on request; see axis_fixed_points.
    axis_plus = "axis_plus"
    axis_minus = "axis_minus"


@dataclass(frozen=True)
class FixedPoint2D:
    x: float
    y: float
    kind: FixedPointKind
    positive_law: bool


def positivity_bound(params):
    """2**(-1/m): the largest |z| for which x (1 + z g(t)) stays positive."""
    return 2.0 ** (-1.0 / params.m)


def classify_positive(params, fp):
    """Whether x + y theta g(t) > 0 for every t in [0, 1].

    Accepts a FixedPoint2D or an (x, y) pair.  Since g ranges over
    [-2**(1/m), 2**(1/m)], this is x > 0 and |theta y / x| < 2**(-1/m).
    """
    x, y = (fp.x, fp.y) if isinstance(fp, FixedPoint2D) else fp
    if not x > 0.0:
        return False
    return abs(params.theta * y / x) < positivity_bound(params)


def axis_fixed_points(params):
    """Fixed points with x = 0, which exist only for odd k and theta > 0.

    With x = 0 every term of x' vanishes when k is odd, and y' reduces to
    c (theta y)**k with c = m/(m+k+1) 2**((k-1)/m), so y**(k-1) = 1/(c theta**k).
    The corresponding functions y theta g(t) change sign at t = 1/2 and are
    never positive laws.
    """
    k, m, theta = params.k, params.m, params.theta
    if k % 2 == 0 or theta == 0.0:
        return []
    c = m / (m + k + 1) * 2.0 ** ((k - 1) / m)
    ystar = (c * theta**k) ** (-1.0 / (k - 1))
    return [
        FixedPoint2D(0.0, ystar, FixedPointKind.axis_plus, False),
        FixedPoint2D(0.0, -ystar, FixedPointKind.axis_minus, False),
    ]


def enumerate_fixed_points(params, include_axis=False):
    """List the fixed points of the two-dimensional map.

    By default returns the classical set: (0,0), (1,0), plus (-1,0) for odd k,
    and above theta_c the branch points (x0, +-y0), plus (-x0, -+y0) for odd k.
    ``include_axis=True`` appends the x = 0 pair from ``axis_fixed_points``.
    Every returned point is checked against ``v_apply``.
    """
    K = FixedPointKind
    odd = params.k % 2 == 1
    raw = [(0.0, 0.0, K.origin), (1.0, 0.0, K.unit)]
    if odd:
        raw.append((-1.0, 0.0, K.negated_unit))
    z0 = solve_z0(params)
    if z0 is not None:
        x0, y0 = recover_xy(params, z0)
        raw.append((x0, y0, K.branch_pp))
        if odd:
            raw.append((-x0, -y0, K.branch_mm))
        raw.append((x0, -y0, K.branch_pm))
        if odd:
            raw.append((-x0, y0, K.branch_mp))
    points = [FixedPoint2D(x, y, kind, classify_positive(params, (x, y))) for x, y, kind in raw]
    if include_axis:
        points.extend(axis_fixed_points(params))
    for p in points:
        res = v_residual(params, p.x, p.y)
        if res > FIXED_POINT_ATOL * max(1.0, abs(p.x), abs(p.y)):
            raise NumericalFailure(f"{p.kind.value} at {params} has residual {res:g}")
    return points


def alt_sum_identity(k, m):
    """Exact pair (lhs, rhs) for sum_i (-1)**i C(k,i)/(m+1+i) = k! m!/(m+1+k)!.

    Both sides are Fractions.  Raises OverflowError if k + m + 1 exceeds
    MAX_FACTORIAL_ARG.
    """
    if int(k) != k or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k!r}")
    if int(m) != m or m < 1 or m % 2 == 0:
        raise DomainError(f"m must be an odd integer >= 1, got {m!r}")
    k, m = int(k), int(m)
    if k + m + 1 > MAX_FACTORIAL_ARG:
        raise OverflowError(f"k + m + 1 = {k + m + 1} exceeds {MAX_FACTORIAL_ARG}")
    lhs = sum(Fraction((-1) ** i * comb(k, i), m + 1 + i) for i in range(k + 1))
    rhs = Fraction(math.factorial(k) * math.factorial(m), math.factorial(m + 1 + k))
    return lhs, rhs
