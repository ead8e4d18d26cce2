"""Command-line entry point: ``crlm <command> [options]``.

Exit codes: 0 success, 1 infeasible or flagged result, 2 I/O or argument
error. ``CRLM_THREADS`` caps the threads used by the compiled loss scan.
"""
import argparse
import json
import math
import sys

import numpy as np

from . import __version__, kernels
from .clustering import crlm
from .core import DataMatrix, LossConfig
from .datagen import GmmubSpec, default_spec, sample_gmmub
from .estimation import estimate_k, estimate_sigmas, sigma_histogram, suggest_sigma_max
from .experiments import (ALGORITHMS, convergence, loglog_slope, success_interval,
                          summarize_convergence, sweep_sigma)
from .io import (ParseError, read_json, read_labels, read_matrix_csv, sibling_paths,
                 to_jsonable, write_json, write_labels, write_matrix_csv, write_rows_csv)
from .metrics import f_measure_avg, purity, rand_index
from .theory import bound_report, feasible_sigma_region


class CliError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    return [int(round(v)) for v in _floats(text)]


def _seeds(text):
    """``20`` means seeds 0..19; ``3,7,9`` lists them."""
    vals = _ints(text)
    if "," not in text and len(vals) == 1:
        return list(range(vals[0]))
    return vals


def _add_spec_args(p):
    g = p.add_argument_group("mixture")
    g.add_argument("--spec", help="JSON file holding a mixture spec (overrides the flags below)")
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--d", type=int, default=100)
    g.add_argument("--D", type=float, default=None, help="background scale (default: 2x the minimum)")
    g.add_argument("--pi", type=float, default=0.01, help="weight of each cluster")
    g.add_argument("--sigmas", type=_floats, default=None, help="cluster sigmas (default 1,2,...,k)")


def _add_loss_args(p, sigma_required=False):
    p.add_argument("--sigma-max", type=float, default=None if sigma_required else 10.0,
                   required=sigma_required)
    p.add_argument("--g", type=float, default=4.0, help="loss constant G")


def _spec_from(args):
    if args.spec:
        obj = read_json(args.spec)
        return GmmubSpec.from_dict(obj.get("spec", obj))
    return default_spec(args.k, args.d, args.sigmas, args.pi, args.sigma_max, args.g, args.D)


def _cfg(args):
    try:
        return LossConfig(args.sigma_max, args.g)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _config(args):
    return {k: v for k, v in vars(args).items() if k != "func"}


def cmd_generate(args):
    spec = _spec_from(args)
    data = sample_gmmub(spec, args.n, args.seed)
    csv_p, lab_p, js_p = sibling_paths(args.out)
    write_matrix_csv(csv_p, data.values)
    write_labels(lab_p, data.labels)
    write_json(js_p, {"spec": spec.to_dict(), "n": args.n, "seed": args.seed,
                      "rng": "PCG64/SeedSequence", "config": _config(args)})
    print(f"wrote {csv_p}, {lab_p}, {js_p}")
    return 0


def _load_data(path):
    X = read_matrix_csv(path)
    if X.size == 0:
        raise CliError(f"{path}: no observations")
    return DataMatrix(X)


def cmd_cluster(args):
    data = _load_data(args.data)
    cfg = _cfg(args)
    res = crlm(data, args.k_max, cfg, args.min_cluster_size)
    out = {"config": _config(args), "backend": kernels.BACKEND,
           "clusters": [{"center": c.center, "sigma": c.sigma_hat, "members": c.members}
                        for c in res.clusters],
           "assignment": res.assignment, "stopped_early": res.stopped_early}
    if args.labels:
        truth = read_labels(args.labels)
        if len(truth) != data.n:
            raise CliError("labels file length does not match the data")
        k = int(truth.max()) if truth.size else 0
        out["metrics"] = {"rand_index": rand_index(truth, res.assignment),
                          "purity": purity(truth, res.assignment)}
        if k >= 1:
            out["metrics"]["f_measure"] = f_measure_avg(truth, res.assignment, k)
    write_json(args.out, out)
    print(f"{res.k} clusters, stopped_early={res.stopped_early}; wrote {args.out}")
    return 0


def cmd_convergence(args):
    spec = _spec_from(args)
    cfg = _cfg(args)
    algs = args.algorithms.split(",")
    for a in algs:
        if a not in ALGORITHMS:
            raise CliError(f"unknown algorithm {a!r}")
    rows = convergence(spec, cfg, args.n_grid, _seeds(args.seeds), algs, args.min_cluster_size)
    write_rows_csv(args.out, ["n", "seed", "algorithm", "log10_n", "error", "log10_error", "unmatched"],
                   [(r["n"], r["seed"], r["algorithm"], math.log10(r["n"]), r["error"],
                     math.log10(r["error"]) if 0 < r["error"] < math.inf else float("nan"),
                     r["unmatched"]) for r in rows])
    summ = summarize_convergence(rows)
    slopes = {a: loglog_slope(*summ[a]) for a in summ}
    write_json(sibling_paths(args.out)[2], {"spec": spec.to_dict(), "config": _config(args),
                                            "slopes": slopes,
                                            "mean_error": {a: dict(zip(map(int, v[0]), v[1]))
                                                           for a, v in summ.items()}})
    print("slopes: " + ", ".join(f"{a}={s:.3f}" for a, s in slopes.items()))
    return 0


def cmd_sweep_sigma(args):
    spec = _spec_from(args)
    grid = args.sigma_grid
    if grid is None:
        grid = list(np.geomspace(args.sigma_lo, args.sigma_hi, args.sigma_num))
    if len(grid) == 0:
        raise CliError("empty sigma grid")
    rows = sweep_sigma(spec, args.n, grid, _seeds(args.seeds), args.g, None, args.min_cluster_size)
    write_rows_csv(args.out, ["sigma_max", "f_mean", "f_min", "rand_mean", "n_seeds"],
                   [(r["sigma_max"], r["f_mean"], r["f_min"], r["rand_mean"], r["n_seeds"]) for r in rows])
    lo, hi = success_interval(rows)
    th = feasible_sigma_region(spec, args.n, args.g, args.prob_floor)[0]
    write_json(sibling_paths(args.out)[2], {
        "spec": spec.to_dict(), "config": _config(args),
        "experimental_interval": [lo, hi],
        "theory_interval": [th.sigma_lo, th.sigma_hi],
        "theory_limiting": [th.limiting_lower, th.limiting_upper]})
    print(f"experimental F>=0.99: [{lo:.4g}, {hi:.4g}]  theory: [{th.sigma_lo:.4g}, {th.sigma_hi:.4g}]")
    return 0


def cmd_bounds(args):
    spec = _spec_from(args)
    cfg = _cfg(args)
    rep = bound_report(spec, cfg, args.n)
    payload = {"spec": spec.to_dict(), "config": _config(args), "report": rep.to_dict()}
    if args.out:
        write_json(args.out, payload)
    else:
        print(json.dumps(to_jsonable(payload), indent=2))
    return 0 if rep.feasible else 1


def cmd_estimate(args):
    data = _load_data(args.data)
    sig = estimate_sigmas(data, args.quantile, seed=args.seed, G=args.g)
    out = {"config": _config(args), "sigmas": sig}
    code = 0
    if sig:
        sm = suggest_sigma_max(sig, args.factor)
        out["suggested_sigma_max"] = sm
        out["factor"] = args.factor
        out["k_hat"] = estimate_k(data, LossConfig(sm, args.g), args.k_cap, args.min_cluster_size)
    else:
        code = 1
    if args.hist_out:
        h = sigma_histogram(data, args.quantile, seed=args.seed)
        write_rows_csv(args.hist_out, ["bin_center", "count"], list(zip(h.centers, h.counts)))
    write_json(args.out, out)
    print(f"sigmas={['%.4g' % s for s in sig]} k_hat={out.get('k_hat')}")
    return code


def cmd_region(args):
    spec = _spec_from(args)
    rows = feasible_sigma_region(spec, args.n, args.g, args.prob_floor, args.grid,
                                 args.axis, args.values)
    write_rows_csv(args.out, ["axis_value", "sigma_lo", "sigma_hi", "limiting_constraint_name",
                              "limiting_lower"],
                   [(r.axis_value, r.sigma_lo, r.sigma_hi, r.limiting_upper, r.limiting_lower)
                    for r in rows])
    write_json(sibling_paths(args.out)[2], {"spec": spec.to_dict(), "config": _config(args)})
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0 if any(not r.empty for r in rows) else 1


def build_parser():
    p = argparse.ArgumentParser(prog="crlm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("generate", help="sample a labelled mixture to CSV")
    _add_spec_args(s)
    _add_loss_args(s)
    s.add_argument("--n", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output stem or .csv path")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("cluster", help="run CRLM on a CSV matrix")
    s.add_argument("data")
    _add_loss_args(s, sigma_required=True)
    s.add_argument("--k-max", type=int, default=10)
    s.add_argument("--min-cluster-size", type=int, default=1)
    s.add_argument("--labels", help="ground-truth labels file for metrics")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("convergence", help="mean-center error vs n")
    _add_spec_args(s)
    _add_loss_args(s)
    s.add_argument("--n-grid", type=_ints, default=[1000, 3162, 10000])
    s.add_argument("--seeds", default="5")
    s.add_argument("--algorithms", default=",".join(ALGORITHMS))
    s.add_argument("--min-cluster-size", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_convergence)

    s = sub.add_parser("sweep-sigma", help="F-measure and Rand Index vs sigma_max")
    _add_spec_args(s)
    s.add_argument("--g", type=float, default=4.0)
    s.add_argument("--sigma-max", type=float, default=10.0, help="used only to place means")
    s.add_argument("--n", type=int, default=10000)
    s.add_argument("--sigma-grid", type=_floats, default=None)
    s.add_argument("--sigma-lo", type=float, default=1.0)
    s.add_argument("--sigma-hi", type=float, default=20.0)
    s.add_argument("--sigma-num", type=int, default=20)
    s.add_argument("--seeds", default="5")
    s.add_argument("--prob-floor", type=float, default=0.99)
    s.add_argument("--min-cluster-size", type=int, default=1)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep_sigma)

    s = sub.add_parser("bounds", help="margins and success-probability bounds")
    _add_spec_args(s)
    _add_loss_args(s)
    s.add_argument("--n", type=float, default=10000)
    s.add_argument("--out")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("estimate", help="estimate sigmas, sigma_max and k from data")
    s.add_argument("data")
    s.add_argument("--g", type=float, default=4.0)
    s.add_argument("--quantile", type=float, default=0.05)
    s.add_argument("--factor", type=float, default=2.2)
    s.add_argument("--k-cap", type=int, default=10)
    s.add_argument("--min-cluster-size", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--hist-out")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("region", help="theoretical sigma_max region over an axis")
    _add_spec_args(s)
    s.add_argument("--g", type=float, default=4.0)
    s.add_argument("--sigma-max", type=float, default=10.0, help="used only to place means")
    s.add_argument("--n", type=float, default=10000)
    s.add_argument("--axis", choices=["d", "n", "G"], default=None)
    s.add_argument("--values", type=_floats, default=None)
    s.add_argument("--grid", type=int, default=200)
    s.add_argument("--prob-floor", type=float, default=0.99)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_region)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "axis", None) and not args.values:
        parser.error("--axis needs --values")
    try:
        return args.func(args)
    except (OSError, ParseError, CliError, ValueError) as exc:
        print(f"crlm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
