"""Discretised Hammerstein operator (H_k f)(t) = int_0^1 K(t, u) f(u)**k du.

This module is an oracle for the reduced system and uses none of its algebra.
Integrals over [0, 1] are split at 1/2.  On each half, the substitution
u = 1/2 +- s**m / 2 turns g into the linear function +-2**(1/m) s, and
turns the Jacobian into m s**(m-1) / 2.  After that, every integrand used
here is a polynomial in s, and Gauss-Legendre integrates it exactly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError

__all__ = [
    "QuadGrid",
    "DiscreteFunction",
    "build_grid",
    "moment_integral",
    "quadrature_moment",
    "apply_hammerstein",
    "fixed_point_residual",
    "project_rank2",
    "iterate_hammerstein",
    "sample_boundary",
    "DEFAULT_RESOLUTION",
    "gauss_legendre",
]

DEFAULT_RESOLUTION = 64
DIVERGENCE_BOUND = 1e6


@dataclass(frozen=True, eq=False)
class QuadGrid:
    """Symmetric quadrature rule on [0, 1] adapted to the odd root at 1/2.

    Attributes:
        nodes: ascending nodes, 2 * resolution of them.
        weights: positive weights summing to 1.
        offsets: signed u - 1/2 computed without cancellation.
        g_values: g at each node, evaluated as +-2**(1/m) s.
        resolution: Gauss-Legendre points per half interval.
        params_n: the n the substitution was built for.
    """

    nodes: np.ndarray
    weights: np.ndarray
    offsets: np.ndarray
    g_values: np.ndarray
    resolution: int
    params_n: int

    def __len__(self):
        return self.nodes.size

    @property
    def m(self):
        return 2 * self.params_n + 1

    def integrate(self, values):
        return float(np.dot(self.weights, values))


@dataclass(frozen=True, eq=False)
class DiscreteFunction:
    """Function samples aligned with the nodes of a QuadGrid."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or not np.all(np.isfinite(vals)):
            raise DomainError("DiscreteFunction values must be a finite 1-d array")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size


def _legendre_with_derivative(Q, x):
    p_prev, p = np.ones_like(x), x.copy()
    for j in range(2, Q + 1):
        p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
    return p, Q * (x * p - p_prev) / (x * x - 1.0)


def gauss_legendre(Q):
    """Gauss-Legendre rule on [-1, 1] accurate to a few ulps.

    numpy's leggauss loses about a digit in the moments for some Q (e.g.
    128); two Newton steps on the three-term recurrence restore it.
    """
    x, _ = np.polynomial.legendre.leggauss(Q)
    for _ in range(2):
        p, dp = _legendre_with_derivative(Q, x)
        x = x - p / dp
    x = 0.5 * (x - x[::-1])
    _, dp = _legendre_with_derivative(Q, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    w = 0.5 * (w + w[::-1])
    return x, w * (2.0 / w.sum())


def build_grid(params, Q=DEFAULT_RESOLUTION):
    """Build the 2Q-node grid for ``params.n``."""
    if int(Q) != Q or Q < 4:
        raise DomainError(f"resolution must be an integer >= 4, got {Q!r}")
    Q = int(Q)
    m = params.m
    x, w = gauss_legendre(Q)
    s = 0.5 * (x + 1.0)
    ws = 0.5 * w * (m * s ** (m - 1) / 2.0)
    h = 0.5 * s**m
    right = 0.5 + h
    # 1 - right is exact for right in [1/2, 1], so nodes are exactly mirrored.
    left = 1.0 - right
    gs = 2.0 ** (1.0 / m) * s
    nodes = np.concatenate([left[::-1], right])
    weights = np.concatenate([ws[::-1], ws])
    offsets = np.concatenate([-h[::-1], h])
    g_values = np.concatenate([-gs[::-1], gs])
    for arr in (nodes, weights, offsets, g_values):
        arr.setflags(write=False)
    return QuadGrid(nodes, weights, offsets, g_values, Q, params.n)


def _values(grid, f):
    vals = f.values if isinstance(f, DiscreteFunction) else np.asarray(f, dtype=float)
    if vals.shape != grid.nodes.shape:
        raise DomainError(f"function has {vals.size} samples, grid has {grid.nodes.size} nodes")
    return vals


def _check_grid(params, grid):
    if grid.params_n != params.n:
        raise DomainError(f"grid built for n={grid.params_n}, params have n={params.n}")


def moment_integral(params, i, shifted=False):
    """Closed form of int_0^1 (u - 1/2)**(p/m) du with p = i, or p = i + 1 if shifted.

    The integral vanishes for odd p.  For even p it equals
    m/(m+p) * 2**(-p/m).
    """
    if int(i) != i or i < 0 or i > params.k + 1:
        raise DomainError(f"moment index must satisfy 0 <= i <= k+1, got {i!r}")
    m = params.m
    p = int(i) + (1 if shifted else 0)
    if p % 2 == 1:
        return 0.0
    return m / (m + p) * 2.0 ** (-p / m)


def quadrature_moment(params, grid, i, shifted=False):
    """Grid quadrature of the same moment, for comparison with the closed form."""
    _check_grid(params, grid)
    p = int(i) + (1 if shifted else 0)
    root = np.copysign(np.abs(grid.offsets) ** (1.0 / params.m), grid.offsets)
    return grid.integrate(root**p)


def sample_boundary(params, grid, b):
    """Sample c1 + c2 theta g on the grid nodes."""
    _check_grid(params, grid)
    return DiscreteFunction(b.c1 + b.c2 * params.theta * grid.g_values)


def apply_hammerstein(params, grid, f, dense=False):
    """One application of H_k on grid samples.

    The kernel has rank two, so the output is A + coupling * g(t) * B with
    A = sum w f**k and B = sum w g f**k.  ``dense=True`` builds the full
    kernel matrix instead; use it only to cross-check on small grids.  That
    matrix is evaluated in the unfactorised form
    1 + theta * (4 (t - 1/2)(u - 1/2))**(1/m), taking the offsets from the
    grid: recomputing u - 1/2 from the nodes cancels badly near 1/2 when m is
    large.
    """
    _check_grid(params, grid)
    fk = _values(grid, f) ** params.k
    if dense:
        prod = 4.0 * grid.offsets[:, None] * grid.offsets[None, :]
        K = 1.0 + params.theta * np.copysign(np.abs(prod) ** (1.0 / params.m), prod)
        return DiscreteFunction(K @ (grid.weights * fk))
    A = grid.integrate(fk)
    B = grid.integrate(grid.g_values * fk)
    return DiscreteFunction(A + params.coupling * grid.g_values * B)


def fixed_point_residual(params, grid, b):
    """Return the sup over grid nodes of |H_k phi_b - phi_b|."""
    phi = sample_boundary(params, grid, b)
    out = apply_hammerstein(params, grid, phi)
    return float(np.max(np.abs(out.values - phi.values)))


def project_rank2(params, grid, f):
    """Weighted least-squares fit of f onto span{1, theta g}.

    Returns ``(c1, c2, fit_error)`` with fit_error the sup-norm misfit.  At
    theta = 0 the second basis function vanishes; only c1 is fitted and c2 is
    reported as 0.
    """
    _check_grid(params, grid)
    vals = _values(grid, f)
    w = grid.weights
    if params.theta == 0.0:
        c1 = grid.integrate(vals) / float(w.sum())
        c2 = 0.0
    else:
        basis = np.column_stack([np.ones_like(vals), params.theta * grid.g_values])
        sw = np.sqrt(w)
        (c1, c2), *_ = np.linalg.lstsq(basis * sw[:, None], vals * sw, rcond=None)
        c1, c2 = float(c1), float(c2)
    fit = c1 + c2 * params.theta * grid.g_values
    return c1, c2, float(np.max(np.abs(vals - fit)))


def iterate_hammerstein(params, grid, f0, steps, damping=1.0):
    """Damped iteration f <- (1 - damping) f + damping H_k f.

    Exploratory only.  Returns a list of ``(c1, c2, residual)`` per step,
    where (c1, c2) is the rank-2 projection of the new iterate and residual
    is sup|H_k f - f| before the update.  Raises DivergenceError once
    sup|f| exceeds 1e6; the error carries the trajectory so far.
    """
    if int(steps) != steps or steps < 1:
        raise DomainError(f"steps must be a positive integer, got {steps!r}")
    if not (0.0 < damping <= 1.0):
        raise DomainError(f"damping must lie in (0, 1], got {damping!r}")
    f = _values(grid, f0).copy()
    trajectory = []
    for step in range(int(steps)):
        hf = apply_hammerstein(params, grid, f).values
        residual = float(np.max(np.abs(hf - f)))
        f = (1.0 - damping) * f + damping * hf
        if not np.all(np.isfinite(f)) or np.max(np.abs(f)) > DIVERGENCE_BOUND:
            raise DivergenceError(f"iterate left |f| <= {DIVERGENCE_BOUND:g} at step {step + 1}", trajectory)
        c1, c2, _ = project_rank2(params, grid, f)
        trajectory.append((c1, c2, residual))
    return trajectory
