"""Pure-Python rejection-sampling kernels.

Statement-for-statement mirror of ``_ckernels.pyx``.  Uniforms come from
``Generator.random()``, which reads the same ``next_double`` slot of the bit
generator as the compiled kernels do, so both backends return bit-identical
draws for the same generator state.

Arguments shared by all kernels:
    c1, a: the boundary function is c1 + a * g(u) (a = c2 * theta).
    coupling: theta * 2**(-2/m), so K(t, u) = 1 + coupling g(t) g(u).
    theta, k, inv_m: model constants, inv_m = 1/m.
    phi_max: max(phi(0), phi(1)); phi is monotone so this bounds phi.

Each kernel returns ``(attempts, status)``; status 1 flags an envelope
violation, i.e. a density value above its analytic bound.
"""

import math

ENVELOPE_SLACK = 1.0 + 1e-12


def _g(t, inv_m):
    v = 4.0 * t - 2.0
    if v == 0.0:
        return 0.0
    return math.copysign(math.pow(abs(v), inv_m), v)


def _ipow(x, k):
    r = 1.0
    for _ in range(k):
        r *= x
    return r


def _root(random, c1, a, k, inv_m, env):
    attempts = 0
    while True:
        attempts += 1
        u = random()
        d = _ipow(c1 + a * _g(u, inv_m), k + 1)
        if d > env * ENVELOPE_SLACK:
            return u, attempts, 1
        if random() * env <= d:
            return u, attempts, 0


def _child(random, t, c1, a, coupling, k, inv_m, env):
    gt = _g(t, inv_m)
    attempts = 0
    while True:
        attempts += 1
        u = random()
        gu = _g(u, inv_m)
        d = (1.0 + coupling * gt * gu) * _ipow(c1 + a * gu, k)
        if d > env * ENVELOPE_SLACK:
            return u, attempts, 1
        if random() * env <= d:
            return u, attempts, 0


def draw_roots(rng, out, c1, a, k, inv_m, phi_max):
    """Fill ``out`` with draws from the density proportional to phi**(k+1)."""
    random = rng.random
    env = _ipow(phi_max, k + 1)
    total = 0
    for i in range(out.shape[0]):
        u, n, status = _root(random, c1, a, k, inv_m, env)
        total += n
        if status:
            return total, status
        out[i] = u
    return total, 0


def draw_children(rng, parents, out, c1, a, coupling, theta, k, inv_m, phi_max):
    """Fill ``out[i]`` with a draw from p(. | parents[i])."""
    random = rng.random
    env = (1.0 + theta) * _ipow(phi_max, k)
    total = 0
    for i in range(out.shape[0]):
        u, n, status = _child(random, float(parents[i]), c1, a, coupling, k, inv_m, env)
        total += n
        if status:
            return total, status
        out[i] = u
    return total, 0


def draw_forest(rng, out, parent, c1, a, coupling, theta, k, inv_m, phi_max):
    """Fill each row of ``out`` with one breadth-first tree configuration.

    ``parent[v]`` is the index of the parent of vertex v; ``parent[0]`` is the
    root marker and is ignored.  Returns ``(root_attempts, child_attempts, status)``.
    """
    random = rng.random
    root_env = _ipow(phi_max, k + 1)
    child_env = (1.0 + theta) * _ipow(phi_max, k)
    n_cfg, n_vert = out.shape
    parent = [int(p) for p in parent]
    root_total = 0
    child_total = 0
    for c in range(n_cfg):
        row = [0.0] * n_vert
        u, n, status = _root(random, c1, a, k, inv_m, root_env)
        root_total += n
        if status:
            return root_total, child_total, status
        row[0] = u
        for v in range(1, n_vert):
            u, n, status = _child(random, row[parent[v]], c1, a, coupling, k, inv_m, child_env)
            child_total += n
            if status:
                return root_total, child_total, status
            row[v] = u
        out[c, :] = row
    return root_total, child_total, 0
