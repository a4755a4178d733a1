"""Monte Carlo realisation of splitting Gibbs measures on finite Cayley trees.

A positive boundary law phi with H_k phi = phi defines a tree-indexed Markov
chain.  The root spin has density proportional to phi(t)**(k+1), one factor
of phi for each of its k+1 subtrees.  A child of a vertex with spin t has
transition density

    p(u | t) = K(t, u) phi(u)**k / phi(t),

and this integrates to 1 in u exactly because phi is a fixed point.  The
same construction makes every vertex's marginal proportional to
phi**(k+1).  Both densities are sampled by rejection from the uniform
proposal.  phi is monotone, so its maximum sits at an endpoint and the
envelopes are exact.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ._backend import BACKEND, kernels, worker_count
from .errors import DomainError, EnvelopeViolation, InsufficientSamplesError, InvalidLawError
from .model import g_eval
from .operator import build_grid, sample_boundary

__all__ = [
    "TreeSpec",
    "Configuration",
    "SampleStats",
    "ConsistencyResult",
    "derived_stream",
    "sample_root",
    "sample_roots",
    "sample_child",
    "sample_children",
    "sample_configuration",
    "sample_forest",
    "order_param_analytic",
    "order_param_estimate",
    "child_mean_analytic",
    "transition_normalization",
    "conditional_cdf",
    "consistency_statistic",
    "consistency_check",
    "acceptance_floor",
    "CHUNK_SIZE",
    "BACKEND",
]

# Configurations per derived RNG stream; fixed so results do not depend on worker count.
CHUNK_SIZE = 4096
KS_CRITICAL = 1.63
DEFAULT_BINS = 5
MIN_ESTIMATE_SAMPLES = 100
MIN_CONSISTENCY_SAMPLES = 10_000


@dataclass(frozen=True, eq=False)
class TreeSpec:
    """Rooted ball of a Cayley tree: the root has k+1 children, every other
    internal vertex has k.

    Vertices are indexed breadth-first.  ``parent_index[0]`` is -1.
    """

    k: int
    depth: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k!r}")
        if int(self.depth) != self.depth or self.depth < 0:
            raise DomainError(f"depth must be a non-negative integer, got {self.depth!r}")
        parents = [-1]
        depths = [0]
        level = [0]
        for d in range(1, self.depth + 1):
            nxt = []
            for v in level:
                for _ in range(self.k + 1 if v == 0 else self.k):
                    parents.append(v)
                    depths.append(d)
                    nxt.append(len(parents) - 1)
            level = nxt
        object.__setattr__(self, "parent_index", np.asarray(parents, dtype=np.int64))
        object.__setattr__(self, "vertex_depth", np.asarray(depths, dtype=np.int64))

    @property
    def vertex_count(self):
        return int(self.parent_index.size)

    @staticmethod
    def expected_count(k, depth):
        """1 + (k+1)(k**depth - 1)/(k - 1) for depth >= 1."""
        if depth == 0:
            return 1
        if k == 1:
            return 1 + 2 * depth
        return 1 + (k + 1) * (k**depth - 1) // (k - 1)


@dataclass(frozen=True, eq=False)
class Configuration:
    """Spins of one tree in breadth-first order."""

    tree: TreeSpec
    spins: np.ndarray

    def rows(self):
        """Yield ``(vertex_index, depth, parent_index, spin)`` per vertex."""
        for v in range(self.tree.vertex_count):
            yield v, int(self.tree.vertex_depth[v]), int(self.tree.parent_index[v]), float(self.spins[v])


@dataclass(frozen=True)
class SampleStats:
    sample_count: int
    mean_g_root: float
    std_error: float
    acceptance_rate: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ConsistencyResult:
    ks_distance: float
    passed: bool
    bin_distances: tuple
    bin_counts: tuple


def derived_stream(seed, index):
    """Independent generator for block ``index`` of a run with master ``seed``.

    Identical to child ``index`` of ``SeedSequence(seed).spawn(...)``.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(int(index),))))


def _law(params, b):
    """Kernel constants (c1, a, phi_max) for a strictly positive law."""
    a = b.c2 * params.theta
    ends = (b.c1 - a * params.g_max, b.c1 + a * params.g_max)
    if not min(ends) > 0.0:
        raise InvalidLawError(f"boundary function {b} is not strictly positive on [0, 1]")
    return b.c1, a, max(ends)


def _raise_on(status, what):
    if status:
        raise EnvelopeViolation(f"{what}: density exceeded its rejection envelope")


def sample_roots(params, b, size, rng):
    """Draw ``size`` root spins; returns ``(spins, attempts)``."""
    c1, a, phi_max = _law(params, b)
    out = np.empty(int(size))
    attempts, status = kernels.draw_roots(rng, out, c1, a, params.k, 1.0 / params.m, phi_max)
    _raise_on(status, "root sampler")
    return out, attempts


def sample_root(params, b, rng):
    """One draw from the root marginal, density proportional to phi**(k+1)."""
    spins, _ = sample_roots(params, b, 1, rng)
    return float(spins[0])


def sample_children(params, b, parents, rng):
    """One child spin per entry of ``parents``; returns ``(spins, attempts)``."""
    c1, a, phi_max = _law(params, b)
    parents = np.ascontiguousarray(parents, dtype=float)
    if parents.size and (parents.min() < 0.0 or parents.max() > 1.0):
        raise DomainError("parent spins must lie in [0, 1]")
    out = np.empty(parents.size)
    attempts, status = kernels.draw_children(
        rng, parents, out, c1, a, params.coupling, params.theta, params.k, 1.0 / params.m, phi_max
    )
    _raise_on(status, "child sampler")
    return out, attempts


def sample_child(params, b, parent, rng):
    """One draw from p(. | parent)."""
    spins, _ = sample_children(params, b, [parent], rng)
    return float(spins[0])


def sample_forest(params, b, tree, count, rng):
    """Sample ``count`` configurations on ``tree`` from one generator.

    Returns ``(spins, root_attempts, child_attempts)`` with spins of shape
    (count, tree.vertex_count).
    """
    c1, a, phi_max = _law(params, b)
    if tree.k != params.k:
        raise DomainError(f"tree has k={tree.k}, params have k={params.k}")
    out = np.empty((int(count), tree.vertex_count))
    root_att, child_att, status = kernels.draw_forest(
        rng, out, tree.parent_index, c1, a, params.coupling, params.theta, params.k, 1.0 / params.m, phi_max
    )
    _raise_on(status, "tree sampler")
    return out, root_att, child_att


def sample_configuration(params, b, depth, rng):
    tree = TreeSpec(params.k, depth)
    spins, _, _ = sample_forest(params, b, tree, 1, rng)
    return Configuration(tree, spins[0])


def order_param_analytic(params, b, grid=None):
    """Mean of g under the root marginal, by quadrature."""
    grid = grid if grid is not None else build_grid(params)
    _law(params, b)
    dens = sample_boundary(params, grid, b).values ** (params.k + 1)
    return grid.integrate(grid.g_values * dens) / grid.integrate(dens)


def child_mean_analytic(params, b, parent, grid=None):
    """E[g(child) | parent] = (int g phi**k + coupling g(t) int g**2 phi**k) / phi(t)."""
    grid = grid if grid is not None else build_grid(params)
    _law(params, b)
    phik = sample_boundary(params, grid, b).values ** params.k
    gt = g_eval(params, parent)
    phit = b.c1 + b.c2 * params.theta * gt
    g = grid.g_values
    return (grid.integrate(g * phik) + params.coupling * gt * grid.integrate(g * g * phik)) / phit


def transition_normalization(params, b, parent, grid=None):
    """Quadrature of p(u | parent) over u; equals 1 iff phi is a fixed point."""
    grid = grid if grid is not None else build_grid(params)
    _law(params, b)
    phik = sample_boundary(params, grid, b).values ** params.k
    gt = g_eval(params, parent)
    kernel = 1.0 + params.coupling * gt * grid.g_values
    return grid.integrate(kernel * phik) / (b.c1 + b.c2 * params.theta * gt)


def _partial_integrals(params, b):
    """Callables for I0(u) = int_0^u phi**k and I1(u) = int_0^u g phi**k.

    On each half the substitution v = 1/2 +- s**m/2 makes both integrands
    polynomials in s, so the antiderivatives are exact.
    """
    P = np.polynomial.Polynomial
    m, k = params.m, params.k
    gam = params.g_max
    a = b.c2 * params.theta
    jac = P.basis(m - 1) * (m / 2.0)
    halves = {}
    for side in (-1.0, 1.0):
        h0 = P([b.c1, side * a * gam]) ** k * jac
        h1 = P([0.0, side * gam]) * h0
        halves[side] = (h0.integ(), h1.integ())
    left0, left1 = (halves[-1.0][0](1.0), halves[-1.0][1](1.0))

    def integrals(u):
        u = np.asarray(u, dtype=float)
        s = np.abs(2.0 * u - 1.0) ** (1.0 / m)
        lo = u <= 0.5
        i0 = np.where(lo, left0 - halves[-1.0][0](s), left0 + halves[1.0][0](s))
        i1 = np.where(lo, left1 - halves[-1.0][1](s), left1 + halves[1.0][1](s))
        return i0, i1

    return integrals


def conditional_cdf(params, b, parent, u):
    """P(child <= u | parent) for scalar parent and scalar or array u."""
    _law(params, b)
    i0, i1 = _partial_integrals(params, b)(u)
    gt = g_eval(params, parent)
    out = (i0 + params.coupling * gt * i1) / (b.c1 + b.c2 * params.theta * gt)
    return float(out) if np.ndim(out) == 0 else out


def _ks_distance(sorted_x, cdf_values):
    n = sorted_x.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf_values), np.max(cdf_values - (i - 1) / n)))


def consistency_statistic(params, b, roots, children, bins=DEFAULT_BINS):
    """KS comparison of empirical child laws with the exact conditional law.

    Parents are split into ``bins`` equal-count bins.  Within a bin, the
    children are compared with the mixture of p(. | t) over that bin's
    parents.  Each bin is tested at 1.63/sqrt(count), the 1% level, so the
    combined test over 5 bins has family-wise level 5%.
    """
    _law(params, b)
    roots = np.asarray(roots, dtype=float)
    children = np.asarray(children, dtype=float)
    if children.ndim == 1:
        children = children[:, None]
    edges = np.quantile(roots, np.linspace(0.0, 1.0, bins + 1)[1:-1])
    which = np.searchsorted(edges, roots, side="right")
    integrals = _partial_integrals(params, b)
    g_par = g_eval(params, roots)
    phi_par = b.c1 + b.c2 * params.theta * g_par
    distances, counts = [], []
    ok = True
    for j in range(bins):
        sel = which == j
        kids = np.sort(children[sel].ravel())
        if kids.size == 0:
            continue
        per_parent = children.shape[1]
        w0 = np.sum(1.0 / phi_par[sel]) * per_parent / kids.size
        w1 = np.sum(g_par[sel] / phi_par[sel]) * per_parent / kids.size
        i0, i1 = integrals(kids)
        ref = w0 * i0 + params.coupling * w1 * i1
        d = _ks_distance(kids, ref)
        distances.append(d)
        counts.append(int(kids.size))
        ok = ok and d <= KS_CRITICAL / np.sqrt(kids.size)
    return ConsistencyResult(max(distances), bool(ok), tuple(distances), tuple(counts))


def _real_children(params, b, roots, per_parent, rng):
    parents = np.repeat(roots, per_parent)
    kids, _ = sample_children(params, b, parents, rng)
    return kids.reshape(roots.size, per_parent)


def consistency_check(params, b, grid=None, samples=100_000, seed=0, bins=DEFAULT_BINS, child_sampler=None):
    """Sample depth-1 stars and test the children against p(. | root).

    ``child_sampler(params, b, roots, per_parent, rng)`` replaces the child
    draw; test harnesses use it to inject a corrupted sampler.  ``grid`` is
    accepted for interface symmetry; the reference law is integrated
    exactly.  Returns ``(ks_distance, passed)``.
    """
    if samples < MIN_CONSISTENCY_SAMPLES:
        raise InsufficientSamplesError(f"consistency_check needs >= {MIN_CONSISTENCY_SAMPLES} samples, got {samples}")
    child_sampler = child_sampler or _real_children
    per_parent = params.k + 1
    roots_all, kids_all = [], []
    for c, start in enumerate(range(0, samples, CHUNK_SIZE)):
        rng = derived_stream(seed, c)
        roots, _ = sample_roots(params, b, min(CHUNK_SIZE, samples - start), rng)
        roots_all.append(roots)
        kids_all.append(child_sampler(params, b, roots, per_parent, rng))
    result = consistency_statistic(params, b, np.concatenate(roots_all), np.concatenate(kids_all), bins)
    return result.ks_distance, result.passed


def _chunks(samples):
    return [(c, min(CHUNK_SIZE, samples - s)) for c, s in enumerate(range(0, samples, CHUNK_SIZE))]


def _run_chunks(fn, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def order_param_estimate(params, b, depth, samples, seed=0, workers=None):
    """Monte Carlo mean and standard error of g at the root.

    Configurations of the given depth are sampled in fixed-size blocks.
    Each block has its own stream derived from (seed, block index).  Blocks
    may run on parallel threads; results are combined in block order, so the
    output does not depend on the worker count.
    """
    if samples < MIN_ESTIMATE_SAMPLES:
        raise InsufficientSamplesError(f"order_param_estimate needs >= {MIN_ESTIMATE_SAMPLES} samples, got {samples}")
    tree = TreeSpec(params.k, depth)
    _law(params, b)

    def run(item):
        index, count = item
        spins, ra, ca = sample_forest(params, b, tree, count, derived_stream(seed, index))
        return spins[:, 0].copy(), ra, ca

    results = _run_chunks(run, _chunks(samples), workers or worker_count())
    roots = np.concatenate([r for r, _, _ in results])
    attempts = sum(ra + ca for _, ra, ca in results)
    g = g_eval(params, roots)
    mean = float(np.mean(g))
    se = float(np.std(g, ddof=1) / np.sqrt(g.size))
    rate = samples * tree.vertex_count / attempts
    return SampleStats(int(samples), mean, se, float(rate))


def acceptance_floor(params, b):
    """(1-theta)/(1+theta) * (min phi / max phi)**k, a lower bound on child acceptance."""
    c1, a, phi_max = _law(params, b)
    phi_min = c1 - abs(a) * params.g_max
    return (1.0 - params.theta) / (1.0 + params.theta) * (phi_min / phi_max) ** params.k
