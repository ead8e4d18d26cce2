"""Compare the compiled and numpy loss kernels.

Times ``scan_losses`` and a full CRLM run on default mixtures for a few
sizes, checks that both backends return identical bits, and prints a table.

    python3 benchmarks/bench_kernels.py --sizes 1000,2000,4000 --repeat 3
"""
import argparse
import json
import time

import numpy as np

from crlm import clustering, kernels
from crlm.core import LossConfig
from crlm.datagen import default_spec, sample_gmmub


def best_time(fn, repeat):
    out, best = None, np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def run(sizes, d, repeat, seed):
    try:
        fast = kernels.get_backend("cython")
    except ImportError:
        raise SystemExit("compiled kernels are not built; run pip install -e . first")
    slow = kernels.get_backend("numpy")
    cfg = LossConfig(10.0)
    r2, inv, G = cfg.r2(d), cfg.inv(d), cfg.G
    spec = default_spec(d=d)
    rows = []
    for n in sizes:
        data = sample_gmmub(spec, n, seed)
        X = np.ascontiguousarray(data.values)
        tc, vc = best_time(lambda: fast.scan_losses(X, r2, inv, G, 1), repeat)
        tp, vp = best_time(lambda: slow.scan_losses(X, r2, inv, G, 1), repeat)
        sc, dc = best_time(lambda: fast.sqdist_to(X, X[0]), repeat)
        sp, dp = best_time(lambda: slow.sqdist_to(X, X[0]), repeat)
        # full CRLM with each backend swapped in
        times = {}
        results = {}
        for name, mod in (("cython", fast), ("numpy", slow)):
            saved = kernels._impl
            kernels._impl = mod
            try:
                times[name], results[name] = best_time(lambda: clustering.crlm(data, spec.k, cfg), repeat)
            finally:
                kernels._impl = saved
        same = (np.array_equal(vc, vp) and np.array_equal(dc, dp)
                and np.array_equal(results["cython"].assignment, results["numpy"].assignment))
        rows.append({"n": n, "d": d, "scan_cython_s": tc, "scan_numpy_s": tp,
                     "sqdist_cython_s": sc, "sqdist_numpy_s": sp,
                     "crlm_cython_s": times["cython"], "crlm_numpy_s": times["numpy"],
                     "identical": bool(same)})
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="500,1000,2000,4000")
    p.add_argument("--d", type=int, default=100)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", help="also write the rows to this file")
    args = p.parse_args(argv)
    sizes = [int(v) for v in args.sizes.split(",")]
    rows = run(sizes, args.d, args.repeat, args.seed)
    print(f"{'n':>7} {'scan cy':>10} {'scan np':>10} {'speedup':>8} "
          f"{'crlm cy':>10} {'crlm np':>10} {'speedup':>8}  identical")
    for r in rows:
        print(f"{r['n']:>7} {r['scan_cython_s']:>10.4f} {r['scan_numpy_s']:>10.4f} "
              f"{r['scan_numpy_s'] / r['scan_cython_s']:>8.1f} "
              f"{r['crlm_cython_s']:>10.4f} {r['crlm_numpy_s']:>10.4f} "
              f"{r['crlm_numpy_s'] / r['crlm_cython_s']:>8.1f}  {r['identical']}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0 if all(r["identical"] for r in rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
