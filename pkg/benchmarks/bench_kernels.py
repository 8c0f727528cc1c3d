"""Time the numba and numpy variants of each hot kernel on the same inputs.

    python3 benchmarks/bench_kernels.py --n 2000 --repeat 5

The jit variants are called once before timing so compilation is excluded.
"""

import argparse
import json
import time

import numpy as np

from biasdisen import kernels
from biasdisen._backend import HAVE_NUMBA
from biasdisen.graph import build_knn_graph


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(n, d, k, p):
    rng = np.random.default_rng(0)
    x = rng.random((n, d))
    a = build_knn_graph(x, k)
    h = rng.normal(size=(n, p))
    half = n // 2
    return {
        "spmm": (a.indptr, a.indices, a.data, h),
        "knn": (x, k),
        "w1": (h[:half, 0].copy(), h[half:, 0].copy()),
        "w1_columns": (h[:half], h[half:]),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000, help="nodes")
    ap.add_argument("--d", type=int, default=16, help="attribute width")
    ap.add_argument("--k", type=int, default=20, help="neighbours")
    ap.add_argument("--p", type=int, default=16, help="embedding width")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="print results as JSON")
    args = ap.parse_args(argv)
    if not HAVE_NUMBA:
        ap.error("numba is not installed")

    rows = []
    for name, inputs in cases(args.n, args.d, args.k, args.p).items():
        jit, ref = kernels.IMPLEMENTATIONS[name]["numba"], kernels.IMPLEMENTATIONS[name]["numpy"]
        jit(*inputs)
        t_jit, out_jit = best_of(lambda: jit(*inputs), args.repeat)
        t_np, out_np = best_of(lambda: ref(*inputs), args.repeat)
        flat_j = out_jit if isinstance(out_jit, tuple) else (out_jit,)
        flat_n = out_np if isinstance(out_np, tuple) else (out_np,)
        agree = all(np.allclose(u, v, atol=1e-10) for u, v in zip(flat_j, flat_n))
        rows.append({"kernel": name, "numba_s": t_jit, "numpy_s": t_np, "speedup": t_np / t_jit, "agree": agree})

    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"n={args.n} d={args.d} k={args.k} p={args.p} (best of {args.repeat})")
    print(f"{'kernel':<12}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}  agree")
    for r in rows:
        print(f"{r['kernel']:<12}{1e3 * r['numba_s']:>12.3f}{1e3 * r['numpy_s']:>12.3f}{r['speedup']:>10.2f}  {r['agree']}")


if __name__ == "__main__":
    main()
