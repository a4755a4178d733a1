"""Time the compiled and pure-Python sampling kernels on the same workload.

    python benchmarks/bench_kernels.py --k 3 --n 1 --theta 0.95 --depth 3 --count 2000

Each backend draws the same forest from the same stream; the script checks
that the spins agree bit for bit before reporting timings.
"""

import argparse
import time

import numpy as np

from gibbstree._backend import available_backends
from gibbstree.model import BoundaryFunction, ModelParams
from gibbstree.reduced import recover_xy, solve_z0
from gibbstree.sampler import TreeSpec, derived_stream


def law(params, branch):
    if branch == "unit" or not params.above_threshold:
        return BoundaryFunction(1.0, 0.0)
    x0, y0 = recover_xy(params, solve_z0(params))
    return BoundaryFunction(x0, y0 if branch == "plus" else -y0)


def run(mod, params, b, tree, count, seed):
    a = b.c2 * params.theta
    phi_max = max(b.c1 - a * params.g_max, b.c1 + a * params.g_max)
    out = np.empty((count, tree.vertex_count))
    start = time.perf_counter()
    ra, ca, status = mod.draw_forest(
        derived_stream(seed, 0), out, tree.parent_index, b.c1, a,
        params.coupling, params.theta, params.k, 1.0 / params.m, phi_max,
    )
    elapsed = time.perf_counter() - start
    if status:
        raise RuntimeError("envelope violation during benchmark")
    return out, ra + ca, elapsed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=3)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--theta", type=float, default=0.95)
    ap.add_argument("--branch", choices=("unit", "plus", "minus"), default="plus")
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--count", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    params = ModelParams(args.k, args.n, args.theta)
    b = law(params, args.branch)
    tree = TreeSpec(args.k, args.depth)
    backends = available_backends()
    spins, best = {}, {}
    for name, mod in sorted(backends.items()):
        times = []
        for _ in range(args.repeat):
            out, attempts, elapsed = run(mod, params, b, tree, args.count, args.seed)
            times.append(elapsed)
        spins[name], best[name] = out, min(times)

    vertices = args.count * tree.vertex_count
    print(f"k={args.k} n={args.n} theta={args.theta} branch={args.branch} depth={args.depth} "
          f"configurations={args.count} vertices={vertices} proposals={attempts}")
    print(f"{'backend':<8} {'best s':>10} {'vertices/s':>14}")
    for name in sorted(best):
        print(f"{name:<8} {best[name]:>10.4f} {vertices / best[name]:>14.0f}")
    if "cython" in best:
        same = np.array_equal(spins["cython"], spins["python"])
        print(f"speedup  {best['python'] / best['cython']:.1f}x   outputs identical: {same}")
        if not same:
            raise SystemExit(1)
    else:
        print("compiled kernels not built; only the fallback was timed")


if __name__ == "__main__":
    main()
