"""Sweeps over the coupling theta for fixed (k, n)."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._backend import worker_count
from .errors import DomainError, GibbsTreeError
from .model import BoundaryFunction, ModelParams
from .operator import DEFAULT_RESOLUTION, build_grid, fixed_point_residual
from .reduced import FixedPointKind, enumerate_fixed_points, poly_coeffs, v_residual
from .sampler import order_param_analytic

__all__ = ["PhaseRow", "scan_theta", "detect_theta_c", "positive_root_exists", "CSV_HEADER", "row_to_csv"]

CSV_HEADER = "theta,count,positive_count,z0,x0,y0,order_param,residual"

# Largest admissible coupling probed by detect_theta_c.
THETA_UPPER = 1.0 - 1e-12


@dataclass(frozen=True)
class PhaseRow:
    theta: float
    fixed_point_count: int
    positive_law_count: int
    z0: Optional[float] = None
    x0: Optional[float] = None
    y0: Optional[float] = None
    order_param: Optional[float] = None
    residual_max: float = 0.0


def _fmt(value):
    return "" if value is None else format(value, ".17g")


def row_to_csv(row):
    return ",".join(
        [
            _fmt(row.theta),
            str(row.fixed_point_count),
            str(row.positive_law_count),
            _fmt(row.z0),
            _fmt(row.x0),
            _fmt(row.y0),
            _fmt(row.order_param),
            _fmt(row.residual_max),
        ]
    )


def _row(k, n, theta, grid):
    params = ModelParams(k, n, theta)
    points = enumerate_fixed_points(params)
    residual = max(v_residual(params, p.x, p.y) for p in points)
    for p in points:
        if p.positive_law:
            residual = max(residual, fixed_point_residual(params, grid, BoundaryFunction(p.x, p.y)))
    branch = next((p for p in points if p.kind is FixedPointKind.branch_pp), None)
    if branch is None:
        return PhaseRow(theta, len(points), sum(p.positive_law for p in points), residual_max=residual)
    z0 = theta * branch.y / branch.x
    order = order_param_analytic(params, BoundaryFunction(branch.x, branch.y), grid)
    return PhaseRow(
        theta,
        len(points),
        sum(p.positive_law for p in points),
        z0=z0,
        x0=branch.x,
        y0=branch.y,
        order_param=order,
        residual_max=residual,
    )


def scan_theta(k, n, theta_min, theta_max, steps, resolution=DEFAULT_RESOLUTION, workers=None):
    """One PhaseRow per point of the inclusive uniform grid on [theta_min, theta_max].

    Rows are returned in theta order whatever order the workers finish in.
    """
    if not (0.0 <= theta_min < theta_max < 1.0):
        raise DomainError(f"need 0 <= theta_min < theta_max < 1, got [{theta_min}, {theta_max}]")
    if int(steps) != steps or steps < 2:
        raise DomainError(f"steps must be an integer >= 2, got {steps!r}")
    base = ModelParams(k, n, theta_min)
    grid = build_grid(base, resolution)
    thetas = [float(t) for t in np.linspace(theta_min, theta_max, int(steps))]

    def run(theta):
        try:
            return _row(k, n, theta, grid)
        except GibbsTreeError as exc:
            raise type(exc)(f"at theta={theta!r}: {exc}") from exc

    workers = workers or worker_count()
    if workers <= 1:
        return [run(t) for t in thetas]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, thetas))


def positive_root_exists(params):
    """Whether P has a positive real root, decided from numpy's companion-matrix roots.

    This deliberately avoids the sign-counting shortcut used by solve_z0: it
    looks for a real positive root of P(z)/z as a polynomial in w = z**2.
    """
    q = poly_coeffs(params).w_coefficients()
    roots = np.polynomial.polynomial.polyroots(q)
    scale = max(1.0, float(np.max(np.abs(roots)))) if roots.size else 1.0
    real = roots[np.abs(roots.imag) <= 1e-12 * scale].real
    return bool(np.any(real > 0.0))


def detect_theta_c(k, n, tol=1e-6):
    """Locate the onset of a positive root of P by bisection in theta.

    Returns None when no admissible theta < 1 has a positive root.
    """
    if not tol > 0.0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    if not positive_root_exists(ModelParams(k, n, THETA_UPPER)):
        return None
    lo, hi = 0.0, THETA_UPPER
    if positive_root_exists(ModelParams(k, n, lo)):
        return lo
    iterations = max(1, math.ceil(math.log2((hi - lo) / tol)) + 1)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if positive_root_exists(ModelParams(k, n, mid)):
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)
