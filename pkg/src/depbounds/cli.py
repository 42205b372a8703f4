"""Command-line front end: evaluate bounds, run verification suites, run
simulations, and emit comparison tables.

Exit codes: 0 success, 2 validity failures, 3 soundness violation, 64 usage.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from itertools import product

from . import bounds as bd
from . import graphcomb as gc
from . import simulate as sim
from .verify import SUITES, run_suite

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_VIOLATED = 3
EXIT_USAGE = 64

FORMATS = ("table", "csv", "json-lines")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage status code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    """17 significant digits for floats; plain str otherwise."""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _emit(records, fmt: str, out=None):
    """Write a list of flat dict records in the requested format."""
    out = out or sys.stdout
    if not records:
        return
    if fmt == "json-lines":
        for rec in records:
            out.write(json.dumps(rec) + "\n")
        return
    keys = list(records[0])
    rows = [[_fmt(rec.get(k, "")) for k in keys] for rec in records]
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(keys)
        writer.writerows(rows)
        return
    widths = [
        max(len(k), *(len(r[i]) for r in rows)) for i, k in enumerate(keys)
    ]
    out.write("  ".join(k.ljust(w) for k, w in zip(keys, widths)).rstrip() + "\n")
    for r in rows:
        out.write("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() + "\n")


# ---------------------------------------------------------------------------
# bound subcommand


def _sweep(text: str, cast):
    try:
        return [cast(part) for part in text.split(",")]
    except ValueError as exc:
        raise UsageError(str(exc))


# (flag, cast, required); threshold mode:
#   sum  -- evaluator takes the sum-scale t; --eps converts via t = n*base*(1+eps)
#   dev  -- evaluator takes the per-variable deviation t; --eps gives t = base*eps
#   eps  -- evaluator takes eps; --t converts via eps = t/(n*base) - 1
#   int  -- evaluator takes an integer t; --eps rejected
#   none -- no threshold flag (linial-luria uses --beta-n)
BOUND_SPECS = {
    "hoeffding": dict(
        flags=[("n", int, True), ("p", float, True)],
        mode="sum", base="p",
        call=lambda a, t: bd.hoeffding_bound(a["n"], a["p"], t),
    ),
    "ik": dict(
        flags=[("n", int, True), ("gamma", float, True), ("c", float, False)],
        mode="eps", base="gamma",
        call=lambda a, e: bd.ik_bound(a["n"], a["gamma"], e, a.get("c", 1.0)),
    ),
    "linial-luria": dict(
        flags=[("n", int, True), ("beta-n", int, True), ("k", int, True),
               ("s-k", float, False), ("gamma", float, False),
               ("p", float, False)],
        mode="none",
        call=None,  # handled specially below
    ),
    "expfunct": dict(
        flags=[("n", int, True), ("gamma", float, True), ("delta", float, True)],
        mode="sum", base="gamma",
        call=lambda a, t: bd.expfunct_bound(a["n"], a["gamma"], a["delta"], t),
    ),
    "bincoupling": dict(
        flags=[("n", int, True), ("p", float, True)],
        mode="sum", base="p",
        call=lambda a, t: bd.bincoupling_bound(a["n"], a["p"], t),
    ),
    "mcdiarmid": dict(
        flags=[("n", int, True), ("p", float, True)],
        mode="dev", base="p",
        call=lambda a, t: bd.mcdiarmid_bound(a["n"], a["p"], t),
    ),
    "mcdiarmid-refined": dict(
        flags=[("n", int, True), ("p", float, True)],
        mode="dev", base="p",
        call=lambda a, t: bd.mcdiarmid_refined_bound(a["n"], a["p"], t),
    ),
    "kwise": dict(
        flags=[("n", int, True), ("k", int, True), ("p", float, True)],
        mode="eps", base="p",
        call=lambda a, e: bd.kwise_bound(a["n"], a["k"], a["p"], e),
    ),
    "kwise-bernoulli": dict(
        flags=[("n", int, True), ("k", int, True), ("p", float, True)],
        mode="eps", base="p",
        call=lambda a, e: bd.kwise_bernoulli_bound(a["n"], a["k"], a["p"], e),
    ),
    "sss": dict(
        flags=[("n", int, True), ("k", int, True), ("p", float, True)],
        mode="eps", base="p",
        call=lambda a, e: bd.sss_bound(a["n"], a["p"], e, a["k"]),
    ),
    "depgraph": dict(
        flags=[("n", int, True), ("alpha", int, True)],
        mode="sum", base=None,  # base rate is fixed at 1/2
        call=lambda a, t: bd.depgraph_bound(
            bd.DependencyGraphParams(a["n"], a["alpha"]), t
        ),
    ),
    "ustat": dict(
        flags=[("n", int, True), ("d", int, True), ("p", float, True)],
        mode="dev", base="p",
        call=lambda a, t: bd.ustat_bound(
            bd.UStatParams(a["n"], a["d"], a["p"]), t
        ),
    ),
    "ustat-refined": dict(
        flags=[("n", int, True), ("d", int, True), ("p", float, True)],
        mode="dev", base="p",
        call=lambda a, t: bd.ustat_refined_bound(
            bd.UStatParams(a["n"], a["d"], a["p"]), t
        ),
    ),
    "gnm-isolated": dict(
        flags=[("n", int, True), ("m", int, True)],
        mode="int", base=None,
        call=lambda a, t: gc.gnm_isolated_bound(a["n"], a["m"], t),
        provenance="grid-minimized",
    ),
    "gnm-triangles": dict(
        flags=[("n", int, True), ("m", int, True)],
        mode="int", base=None,
        call=lambda a, t: gc.gnm_triangles_bound(a["n"], a["m"], t),
        provenance="grid-minimized",
    ),
}

_ALL_BOUND_FLAGS = [
    ("n", int), ("p", float), ("gamma", float), ("delta", float),
    ("c", float), ("k", int), ("beta-n", int), ("alpha", int),
    ("d", int), ("m", int), ("s-k", float),
]


def _linial_luria_call(a):
    if "s-k" in a:
        profile = bd.SymmetricMoments({0: 1.0, a["k"]: a["s-k"]})
    elif "gamma" in a:
        profile = bd.ProductBound(a["gamma"])
    elif "p" in a:
        profile = bd.MeanOnly(a["p"])
    else:
        raise UsageError(
            "linial-luria needs a moment profile: --s-k, --gamma or --p"
        )
    return bd.linial_luria_bound(a["n"], a["beta-n"], a["k"], profile)


def cmd_bound(args) -> int:
    try:
        spec = BOUND_SPECS[args.method]
    except KeyError:
        raise UsageError(
            f"unknown method {args.method!r}; "
            f"available: {', '.join(sorted(BOUND_SPECS))}"
        )
    given = {
        name: getattr(args, name.replace("-", "_"))
        for name, _cast in _ALL_BOUND_FLAGS
        if getattr(args, name.replace("-", "_")) is not None
    }
    allowed = {name for name, _c, _r in spec["flags"]}
    for name in given:
        if name not in allowed:
            raise UsageError(f"--{name} does not apply to {args.method}")
    sweeps, order = {}, []
    for name, cast, required in spec["flags"]:
        if name in given:
            sweeps[name] = _sweep(given[name], cast)
            order.append(name)
        elif required:
            raise UsageError(f"{args.method} requires --{name}")

    mode = spec["mode"]
    if mode == "none":
        if args.t is not None or args.eps is not None:
            raise UsageError(
                f"{args.method} takes its threshold from --beta-n, not --t/--eps"
            )
        thresholds = [None]
        th_flag = None
    else:
        if (args.t is None) == (args.eps is None):
            raise UsageError(f"{args.method} needs exactly one of --t or --eps")
        if args.t is not None:
            th_flag = "t"
            thresholds = _sweep(args.t, int if mode == "int" else float)
        else:
            if mode == "int":
                raise UsageError(f"{args.method} takes --t (an integer), not --eps")
            th_flag = "eps"
            thresholds = _sweep(args.eps, float)

    records = []
    any_invalid = False
    for combo in product(*(sweeps[name] for name in order)):
        a = dict(zip(order, combo))
        for th in thresholds:
            start = time.perf_counter()
            if mode == "none":
                tb = _linial_luria_call(a)
                t_val, eps_val = float(a["beta-n"]), ""
            else:
                n = a["n"]
                base = 0.5 if spec["base"] is None else a[spec["base"]]
                if mode == "eps":
                    eps_val = th if th_flag == "eps" else bd.t_to_eps(n, base, th)
                    t_val = bd.eps_to_t(n, base, eps_val)
                    tb = spec["call"](a, eps_val)
                elif mode == "dev":
                    t_val = th if th_flag == "t" else base * th
                    eps_val = t_val / base
                    tb = spec["call"](a, t_val)
                elif mode == "int":
                    t_val, eps_val = th, ""
                    tb = spec["call"](a, th)
                else:  # sum
                    t_val = th if th_flag == "t" else bd.eps_to_t(n, base, th)
                    eps_val = bd.t_to_eps(n, base, t_val)
                    tb = spec["call"](a, t_val)
            runtime_ms = (time.perf_counter() - start) * 1e3
            rec = {"method": args.method}
            rec.update(a)
            rec["t"] = t_val
            rec["eps"] = eps_val
            rec["log_bound"] = tb.log_bound if tb.is_valid else ""
            rec["bound"] = tb.bound if tb.is_valid else ""
            rec["validity"] = (
                "Valid" if tb.is_valid else f"Invalid: {tb.invalid_reason}"
            )
            rec["provenance"] = spec.get("provenance", "closed-form")
            rec["runtime_ms"] = runtime_ms
            records.append(rec)
            any_invalid = any_invalid or not tb.is_valid
    _emit(records, args.format)
    return EXIT_INVALID if any_invalid else EXIT_OK


# ---------------------------------------------------------------------------
# verify subcommand

_SOUNDNESS_SUITES = {"soundness", "sandwich"}


def cmd_verify(args) -> int:
    kwargs = {}
    if args.n_max is not None:
        kwargs["n_max"] = args.n_max
    if args.trials is not None:
        kwargs["trials"] = args.trials
    if args.seed is not None:
        kwargs["seed"] = args.seed
    results = run_suite(args.suite, **kwargs)
    if args.format == "table":
        for name, passed, detail in results:
            sys.stdout.write(
                f"{'PASS' if passed else 'FAIL'} {name}: {detail}\n"
            )
    else:
        _emit(
            [
                {"name": name, "passed": bool(passed), "detail": detail}
                for name, passed, detail in results
            ],
            args.format,
        )
    if all(passed for _n, passed, _d in results):
        return EXIT_OK
    return EXIT_VIOLATED if args.suite in _SOUNDNESS_SUITES else EXIT_INVALID


# ---------------------------------------------------------------------------
# simulate subcommand

SIM_MODELS = (
    "gnp-isolated", "gnp-triangles", "gnp-4cliques",
    "gnm-isolated", "gnm-triangles",
    "orientation-parity", "degree-parity", "mds",
    "ustat", "ustat-triangles",
)


def _require(args, *names):
    vals = []
    for name in names:
        v = getattr(args, name.replace("-", "_"))
        if v is None:
            raise UsageError(f"{args.model} requires --{name}")
        vals.append(v)
    return vals


def _build_model(args):
    name = args.model
    if name == "gnp-isolated":
        n, p = _require(args, "n", "p")
        return sim.GnpIsolated(n, p)
    if name == "gnp-triangles":
        n, p = _require(args, "n", "p")
        return sim.GnpTriangles(n, p)
    if name == "gnp-4cliques":
        n, p = _require(args, "n", "p")
        return sim.Gnp4Cliques(n, p)
    if name == "gnm-isolated":
        n, m = _require(args, "n", "m")
        return sim.GnmIsolated(n, m)
    if name == "gnm-triangles":
        n, m = _require(args, "n", "m")
        return sim.GnmTriangles(n, m)
    if name == "orientation-parity":
        (path,) = _require(args, "graph")
        return sim.OrientationParity(gc.Graph.load(path))
    if name == "degree-parity":
        (n,) = _require(args, "n")
        return sim.DegreeParity(n)
    if name == "mds":
        (n,) = _require(args, "n")
        if args.p_vector is not None:
            p_vec = tuple(_sweep(args.p_vector, float))
            if len(p_vec) != n:
                raise UsageError("--p-vector length must equal --n")
        elif args.p is not None:
            p_vec = (args.p,) * n
        else:
            raise UsageError("mds requires --p or --p-vector")
        return sim.MartingaleDiff(n, p_vec, args.kernel or "polya-style")
    if name == "ustat":
        n, d = _require(args, "n", "d")
        kernel = args.kernel or "all-below"
        if kernel == "all-below":
            (c,) = _require(args, "c")
            kernel_args = (("c", c),)
        elif kernel == "threshold-sum":
            (theta,) = _require(args, "theta")
            kernel_args = (("theta", theta),)
        else:
            raise UsageError(f"unknown U-statistic kernel {kernel!r}")
        return sim.UStat(n, d, kernel, "uniform", kernel_args)
    if name == "ustat-triangles":
        m, p = _require(args, "m", "p")
        return sim.UStat(m, 3, "triangle-indicator", "gnp", (("p", p),))
    raise UsageError(f"unknown model {name!r}")


def _auto_bound(args, t):
    """The matching analytic bound for a simulation model, or None."""
    name = args.model
    if name in ("gnp-isolated", "gnp-triangles", "gnp-4cliques", "ustat-triangles"):
        kind = {
            "gnp-isolated": "isolated",
            "gnp-triangles": "triangles",
            "gnp-4cliques": "cliques4",
            "ustat-triangles": "triangles",
        }[name]
        n = args.m if name == "ustat-triangles" else args.n
        gamma = gc.gnp_constants(kind, n, args.p)
        count = gc.gnp_count(kind, n)
        return bd.ik_bound(count, gamma, bd.t_to_eps(count, gamma, t))
    if name == "gnm-isolated":
        return gc.gnm_isolated_bound(args.n, args.m, int(round(t)))
    if name == "gnm-triangles":
        return gc.gnm_triangles_bound(args.n, args.m, int(round(t)))
    if name == "mds":
        if args.p is None:
            raise UsageError("--bound auto for mds needs a constant --p")
        return bd.mcdiarmid_bound(args.n, args.p, t / args.n)
    if name == "ustat":
        kernel = args.kernel or "all-below"
        if kernel != "all-below":
            raise UsageError(
                "--bound auto for ustat needs the all-below kernel "
                "(closed-form mean)"
            )
        p = args.c ** args.d
        count = math.comb(args.n, args.d)
        return bd.ustat_bound(bd.UStatParams(args.n, args.d, p), t / count - p)
    raise UsageError(f"no automatic bound is defined for {name}")


def cmd_simulate(args) -> int:
    if args.reps is None or args.reps < 1:
        raise UsageError("--reps must be a positive integer")
    if args.t is None:
        raise UsageError("--t is required")
    model = _build_model(args)
    res = sim.empirical_tail(
        model, args.t, args.reps, args.seed or 0, threads=args.threads or 1
    )
    rec = {
        "model": args.model,
        "replications": res.replications,
        "threshold": res.threshold,
        "empirical_tail": res.empirical_tail,
        "ci_low": res.ci_low,
        "ci_high": res.ci_high,
        "sum_mean": res.sum_mean,
        "seed": res.seed,
    }
    status = EXIT_OK
    if args.bound is not None:
        if args.bound != "auto":
            raise UsageError("--bound only supports 'auto'")
        tb = _auto_bound(args, args.t)
        rec["bound_method"] = tb.method
        rec["log_bound"] = tb.log_bound if tb.is_valid else ""
        rec["bound"] = tb.bound if tb.is_valid else ""
        if not tb.is_valid:
            rec["verdict"] = f"Invalid: {tb.invalid_reason}"
            status = EXIT_INVALID
        elif res.ci_high <= tb.bound:
            rec["verdict"] = "DOMINATED"
        else:
            rec["verdict"] = "VIOLATED"
            status = EXIT_VIOLATED
    if args.format == "table":
        for k, v in rec.items():
            sys.stdout.write(f"{k}={_fmt(v)}\n")
    else:
        _emit([rec], args.format)
    return status


# ---------------------------------------------------------------------------
# compare subcommand

# every entry evaluates at a sum-scale threshold t so columns are aligned
COMPARE_EVALS = {
    "hoeffding": lambda a, t: bd.hoeffding_bound(a["n"], a["p"], t),
    "mcdiarmid": lambda a, t: bd.mcdiarmid_bound(
        a["n"], a["p"], t / a["n"] - a["p"]
    ),
    "mcdiarmid-refined": lambda a, t: bd.mcdiarmid_refined_bound(
        a["n"], a["p"], t / a["n"] - a["p"]
    ),
    "ik": lambda a, t: bd.ik_bound(
        a["n"], a["gamma"], bd.t_to_eps(a["n"], a["gamma"], t)
    ),
    "bincoupling": lambda a, t: bd.bincoupling_bound(a["n"], a["p"], t),
    "expfunct": lambda a, t: bd.expfunct_bound(
        a["n"], a["gamma"], a["delta"], t
    ),
    "kwise": lambda a, t: bd.kwise_bound(
        a["n"], a["k"], a["p"], bd.t_to_eps(a["n"], a["p"], t)
    ),
    "kwise-bernoulli": lambda a, t: bd.kwise_bernoulli_bound(
        a["n"], a["k"], a["p"], bd.t_to_eps(a["n"], a["p"], t)
    ),
    "sss": lambda a, t: bd.sss_bound(
        a["n"], a["p"], bd.t_to_eps(a["n"], a["p"], t), a["k"]
    ),
    "depgraph": lambda a, t: bd.depgraph_bound(
        bd.DependencyGraphParams(a["n"], a["alpha"]), t
    ),
    "ustat": lambda a, t: bd.ustat_bound(
        bd.UStatParams(a["n"], a["d"], a["p"]),
        t / math.comb(a["n"], a["d"]) - a["p"],
    ),
    "ustat-refined": lambda a, t: bd.ustat_refined_bound(
        bd.UStatParams(a["n"], a["d"], a["p"]),
        t / math.comb(a["n"], a["d"]) - a["p"],
    ),
    "linial-luria": None,  # optimal-k evaluation handled specially
    "gnm-isolated": lambda a, t: gc.gnm_isolated_bound(
        a["n"], a["m"], int(round(t))
    ),
    "gnm-triangles": lambda a, t: gc.gnm_triangles_bound(
        a["n"], a["m"], int(round(t))
    ),
}


def _compare_ll(a, t):
    beta_n = int(round(t))
    if abs(t - beta_n) > 1e-9:
        return bd.linial_luria_bound(a["n"], -1, 1, bd.ProductBound(0.5))
    profile = bd.ProductBound(a["gamma"]) if "gamma" in a else bd.MeanOnly(
        a.get("p", 0.0)
    )
    best = None
    for k in range(1, beta_n):
        tb = bd.linial_luria_bound(a["n"], beta_n, k, profile)
        if tb.is_valid and (best is None or tb.log_bound < best.log_bound):
            best = tb
    if best is None:
        return bd.linial_luria_bound(a["n"], beta_n, 1, profile)
    return best


def cmd_compare(args) -> int:
    methods = [m for m in (args.methods or "").split(",") if m]
    if len(methods) < 2:
        raise UsageError("--methods needs at least two comma-separated methods")
    for m in methods:
        if m not in COMPARE_EVALS:
            raise UsageError(
                f"unknown method {m!r}; available: "
                f"{', '.join(sorted(COMPARE_EVALS))}"
            )
    if args.t is None:
        raise UsageError("--t is required (comma-separated sweep)")
    ts = _sweep(args.t, float)
    shared = {
        name: getattr(args, name.replace("-", "_"))
        for name, _cast in _ALL_BOUND_FLAGS
        if getattr(args, name.replace("-", "_")) is not None
    }
    a = {}
    for name, cast in _ALL_BOUND_FLAGS:
        if name in shared:
            try:
                a[name] = cast(shared[name])
            except ValueError:
                raise UsageError(f"--{name} must be a single {cast.__name__}")

    records = []
    for t in sorted(ts):
        rec = {"t": t}
        best_method, best_log = None, math.inf
        for m in methods:
            fn = _compare_ll if m == "linial-luria" else COMPARE_EVALS[m]
            try:
                tb = fn(a, t)
            except KeyError as exc:
                raise UsageError(f"{m} requires --{exc.args[0]}")
            if tb.is_valid:
                rec[m] = tb.bound
                rec[f"{m}_log"] = tb.log_bound
                if tb.log_bound < best_log:
                    best_method, best_log = m, tb.log_bound
            else:
                rec[m] = f"Invalid: {tb.invalid_reason}"
                rec[f"{m}_log"] = ""
        rec["minimum"] = best_method or ""
        records.append(rec)
    _emit(records, args.format)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument wiring


def _build_parser() -> _Parser:
    parser = _Parser(prog="depbounds")
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="table")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p_bound = sub.add_parser("bound", parents=[common],
                             help="evaluate a tail bound over a parameter grid")
    p_bound.add_argument("method")
    for name, cast in _ALL_BOUND_FLAGS:
        p_bound.add_argument(f"--{name}", type=str, default=None)
    p_bound.add_argument("--t", type=str, default=None)
    p_bound.add_argument("--eps", type=str, default=None)
    p_bound.set_defaults(func=cmd_bound)

    p_verify = sub.add_parser("verify", parents=[common],
                              help="run a verification suite")
    p_verify.add_argument("suite", choices=sorted(SUITES))
    p_verify.add_argument("--n-max", type=int, default=None)
    p_verify.add_argument("--trials", type=int, default=None)
    p_verify.set_defaults(func=cmd_verify)

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="estimate an empirical tail by Monte Carlo")
    p_sim.add_argument("model", choices=SIM_MODELS)
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.add_argument("--m", type=int, default=None)
    p_sim.add_argument("--d", type=int, default=None)
    p_sim.add_argument("--p", type=float, default=None)
    p_sim.add_argument("--c", type=float, default=None)
    p_sim.add_argument("--theta", type=float, default=None)
    p_sim.add_argument("--p-vector", type=str, default=None)
    p_sim.add_argument("--kernel", type=str, default=None)
    p_sim.add_argument("--graph", type=str, default=None,
                       help="edge-list file for orientation-parity")
    p_sim.add_argument("--t", type=float, default=None)
    p_sim.add_argument("--reps", type=int, default=None)
    p_sim.add_argument("--bound", type=str, default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_cmp = sub.add_parser("compare", parents=[common],
                           help="tabulate several bounds over a t-sweep")
    p_cmp.add_argument("--methods", type=str, default=None)
    for name, cast in _ALL_BOUND_FLAGS:
        p_cmp.add_argument(f"--{name}", type=str, default=None)
    p_cmp.add_argument("--t", type=str, default=None)
    p_cmp.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"depbounds: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
