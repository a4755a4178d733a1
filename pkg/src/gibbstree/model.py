"""Model vocabulary: parameters, interaction kernel, order parameter, boundary functions.

The nearest-neighbour interaction on spins in [0, 1] is

    xi(s, t) = log(1 + theta * (4 (s - 1/2)(t - 1/2)) ** (1/m)),   m = 2n + 1,

with the odd root taken as the signed real root.  At inverse temperature 1 the
Hammerstein kernel is K(t, u) = exp(xi(t, u)), which factorises through

    g(t) = sign(4t - 2) |4t - 2| ** (1/m)

as K(t, u) = 1 + theta * 2**(-2/m) * g(t) * g(u).
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError

__all__ = [
    "ModelParams",
    "BoundaryFunction",
    "g_eval",
    "kernel_eval",
    "phi_eval",
    "theta_critical",
    "critical_fraction",
]


def critical_fraction(k, n):
    """Exact threshold (2n+3) / (k(2n+1)) as a Fraction."""
    return Fraction(2 * n + 3, k * (2 * n + 1))


@dataclass(frozen=True)
class ModelParams:
    """The triple (k, n, theta) with derived m = 2n+1 and theta_c.

    ``k`` is the number of children of a non-root vertex (the exponent of the
    Hammerstein operator), ``n`` fixes the odd root order, ``theta`` is the
    coupling in [0, 1).
    """

    k: int
    n: int
    theta: float
    m: int = field(init=False)
    theta_c: float = field(init=False)

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 2:
            raise DomainError(f"k must be an integer >= 2, got {self.k!r}")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 0:
            raise DomainError(f"n must be an integer >= 0, got {self.n!r}")
        theta = float(self.theta)
        if not (0.0 <= theta < 1.0):
            raise DomainError(f"theta must lie in [0, 1), got {self.theta!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "m", 2 * self.n + 1)
        object.__setattr__(self, "theta_c", float(critical_fraction(self.k, self.n)))

    @property
    def coupling(self):
        """theta * 2**(-2/m): coefficient of g(t) g(u) in the kernel."""
        return self.theta * 2.0 ** (-2.0 / self.m)

    @property
    def g_max(self):
        """sup |g| = 2**(1/m)."""
        return 2.0 ** (1.0 / self.m)

    @property
    def above_threshold(self):
        return self.theta > self.theta_c

    def with_theta(self, theta):
        return ModelParams(self.k, self.n, theta)


@dataclass(frozen=True)
class BoundaryFunction:
    """The function t -> c1 + c2 * theta * g(t)."""

    c1: float
    c2: float

    def __post_init__(self):
        if not (np.isfinite(self.c1) and np.isfinite(self.c2)):
            raise DomainError(f"boundary coefficients must be finite, got ({self.c1}, {self.c2})")
        object.__setattr__(self, "c1", float(self.c1))
        object.__setattr__(self, "c2", float(self.c2))


def _check_unit(name, t):
    arr = np.asarray(t, dtype=float)
    if arr.size and (np.any(~np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0):
        raise DomainError(f"{name} must lie in [0, 1]")
    return arr


def _odd_root(v, m):
    r = np.copysign(np.power(np.abs(v), 1.0 / m), v)
    return float(r) if np.ndim(r) == 0 else r


def g_eval(params, t):
    """Order parameter g(t) = sign(4t-2) |4t-2|**(1/m); accepts scalars or arrays."""
    arr = _check_unit("t", t)
    return _odd_root(4.0 * arr - 2.0, params.m)


def kernel_eval(params, t, u):
    """K(t, u) = 1 + theta * (4(t-1/2)(u-1/2))**(1/m), via the factorised form."""
    gt = g_eval(params, t)
    gu = g_eval(params, u)
    return 1.0 + params.coupling * (gt * gu)


def phi_eval(b, params, t):
    """Evaluate the boundary function c1 + c2 * theta * g(t)."""
    return b.c1 + b.c2 * params.theta * g_eval(params, t)


def theta_critical(k, n):
    """Return ``(theta_c, reachable)`` with theta_c = (2n+3)/(k(2n+1)).

    ``reachable`` is False when theta_c >= 1, i.e. no admissible coupling
    produces a phase transition (for example k=2, n=0 gives 3/2).
    """
    if isinstance(k, bool) or int(k) != k or k < 2:
        raise DomainError(f"k must be an integer >= 2, got {k!r}")
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"n must be an integer >= 0, got {n!r}")
    frac = critical_fraction(int(k), int(n))
    return float(frac), frac < 1
