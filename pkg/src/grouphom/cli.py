"""Command-line front end.

Four subcommands::

    grouphom test DATA.csv       global homogeneity test
    grouphom pergroup DATA.csv   per-group bootstrap p-values
    grouphom simulate ...        rejection-rate study / table reproduction
    grouphom benchmark           estimator timing comparison

Exit codes: 0 success, 2 bad input (data, arguments, unknown tables),
3 estimator precondition violated by otherwise-valid data.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__, classical, decision, simulate, ustat
from .data import load_dataset, write_dataset_csv
from .errors import (
    DatasetError,
    EstimatorPrecondition,
    GrouphomError,
    OutOfRange,
)

_FORMATS = ("human", "json", "csv")


def _resolve_seed(seed):
    """A concrete seed: the given one, else fresh OS entropy."""
    if seed is not None:
        return int(seed)
    return int(np.random.SeedSequence().entropy)


def _fmt(x, digits=6) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.{digits}g}"
    return str(x)


def _report_payload(report: decision.TestReport) -> dict:
    return {
        "statistic": float(report.statistic),
        "variance": float(report.variance.value),
        "variance_estimator": report.variance.estimator,
        "z": float(report.z),
        "p_value": float(report.p_value),
        "alpha": float(report.alpha),
        "reject": bool(report.reject),
        "degenerate_variance": bool(report.degenerate_variance),
    }


# ---------------------------------------------------------------------------
# test
# ---------------------------------------------------------------------------


def _cmd_test(args) -> int:
    ds = load_dataset(args.data)
    needs_seed = args.estimator in ("test7", "all")
    seed = _resolve_seed(args.seed) if needs_seed else args.seed
    if args.estimator == "all":
        reports = decision.run_all_tests(
            ds, alpha=args.alpha, seed=seed, B=args.bootstrap_b
        )
    else:
        reports = {
            args.estimator: decision.run_global_test(
                ds, args.estimator, alpha=args.alpha, seed=seed,
                B=args.bootstrap_b,
            )
        }
    chi2_stat = chi2_p = None
    if args.estimator == "all":
        chi2_stat, chi2_p = classical.chi_square_pooled(ds)

    if args.format == "json":
        payload = {
            "groups": ds.k,
            "categories": ds.d,
            "alpha": args.alpha,
            "seed": seed,
            "reports": {est: _report_payload(r) for est, r in reports.items()},
        }
        if chi2_stat is not None:
            payload["chi2_pooled"] = {
                "statistic": float(chi2_stat),
                "p_value": float(chi2_p),
            }
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
    elif args.format == "csv":
        print("estimator,statistic,variance,z,p_value,reject,degenerate")
        for est, r in reports.items():
            print(
                ",".join(
                    _fmt(v)
                    for v in (
                        est, float(r.statistic), float(r.variance.value),
                        float(r.z), float(r.p_value), bool(r.reject),
                        bool(r.degenerate_variance),
                    )
                )
            )
        if chi2_stat is not None:
            print(
                f"chi2_pooled,{_fmt(float(chi2_stat))},,,"
                f"{_fmt(float(chi2_p))},{_fmt(chi2_p <= args.alpha)},false"
            )
    else:
        print(f"dataset: {ds.k} groups, {ds.d} categories")
        if needs_seed:
            print(f"bootstrap seed: {seed}")
        for est, r in reports.items():
            verdict = "reject homogeneity" if r.reject else "retain homogeneity"
            flag = "  [degenerate variance]" if r.degenerate_variance else ""
            print(
                f"{est}: T_U = {_fmt(float(r.statistic), 4)}, "
                f"var = {_fmt(float(r.variance.value), 4)}, "
                f"z = {_fmt(float(r.z), 4)}, "
                f"p = {_fmt(float(r.p_value), 4)}  "
                f"-> {verdict} at alpha = {args.alpha:g}{flag}"
            )
        if chi2_stat is not None:
            verdict = (
                "reject" if chi2_p <= args.alpha else "retain"
            )
            print(
                f"chi2 (no grouping): stat = {_fmt(float(chi2_stat), 4)}, "
                f"p = {_fmt(float(chi2_p), 4)}  -> {verdict}"
            )
        stats = ustat.group_statistics(ds)
        order = np.argsort(stats)[::-1][: min(5, ds.k)]
        ids = list(ds.group_ids())
        print("largest per-group statistics:")
        for i in order:
            print(f"  {ids[i]}: T_U_r = {_fmt(float(stats[i]), 4)}")
    return 0


# ---------------------------------------------------------------------------
# pergroup
# ---------------------------------------------------------------------------


def _cmd_pergroup(args) -> int:
    ds = load_dataset(args.data)
    seed = _resolve_seed(args.seed)
    results = decision.pergroup_bootstrap_pvalues(
        ds, B=args.bootstrap_b, seed=seed, smoothed=args.smoothed
    )
    raw = [r.p_raw for r in results]
    minp_reject = decision.global_minp_rule(raw, alpha=args.alpha)
    n_bh = sum(r.p_bh <= args.alpha for r in results)
    n_bonf = sum(r.p_bonferroni <= args.alpha for r in results)

    if args.format == "json":
        json.dump(
            {
                "groups": ds.k,
                "categories": ds.d,
                "alpha": args.alpha,
                "seed": seed,
                "bootstrap_b": args.bootstrap_b,
                "smoothed": bool(args.smoothed),
                "minp_reject": bool(minp_reject),
                "significant_bh": int(n_bh),
                "significant_bonferroni": int(n_bonf),
                "per_group": [
                    {
                        "group": r.group_id,
                        "statistic": float(r.statistic),
                        "p_raw": float(r.p_raw),
                        "p_bh": float(r.p_bh),
                        "p_bonferroni": float(r.p_bonferroni),
                        "degenerate": bool(r.degenerate),
                    }
                    for r in results
                ],
            },
            sys.stdout,
            indent=2,
        )
        sys.stdout.write("\n")
    elif args.format == "csv":
        print("group,statistic,p_raw,p_bh,p_bonferroni,degenerate")
        for r in results:
            print(
                ",".join(
                    _fmt(v)
                    for v in (
                        r.group_id, float(r.statistic), float(r.p_raw),
                        float(r.p_bh), float(r.p_bonferroni),
                        bool(r.degenerate),
                    )
                )
            )
        print(
            f"min-p global rule: "
            f"{'reject' if minp_reject else 'retain'}",
            file=sys.stderr,
        )
    else:
        print(
            f"dataset: {ds.k} groups, {ds.d} categories; "
            f"B = {args.bootstrap_b}, seed = {seed}"
        )
        print(f"{'group':<12}{'T_U_r':>10}{'p_raw':>9}{'p_BH':>9}"
              f"{'p_Bonf':>9}")
        for r in results:
            mark = "  *" if r.p_bh <= args.alpha else ""
            flag = "  [degenerate]" if r.degenerate else ""
            print(
                f"{r.group_id:<12}{float(r.statistic):>10.4f}"
                f"{float(r.p_raw):>9.4f}{float(r.p_bh):>9.4f}"
                f"{float(r.p_bonferroni):>9.4f}{mark}{flag}"
            )
        print(
            f"BH-significant groups at alpha = {args.alpha:g}: {n_bh} "
            f"(Bonferroni: {n_bonf})"
        )
        print(
            "min-p global rule: "
            + ("reject homogeneity" if minp_reject else "retain homogeneity")
        )
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _parse_sizes(text: str) -> list[tuple[int, int]]:
    pairs = []
    for part in text.split(";"):
        bits = part.split(",")
        if len(bits) != 2:
            raise OutOfRange(
                f"size pairs look like 'n1,n2' separated by ';', got {text!r}"
            )
        pairs.append((int(bits[0]), int(bits[1])))
    return pairs


def _cmd_simulate(args) -> int:
    if args.table is not None and args.setting is not None:
        raise OutOfRange("--table and --setting are mutually exclusive")
    if args.table is None and args.setting is None:
        raise OutOfRange("one of --table or --setting is required")

    if args.table is not None:
        if args.export_replicate is not None:
            raise OutOfRange("--export-replicate needs the --setting form")
        result = simulate.reproduce_table(
            args.table,
            reps=args.reps,
            seed=args.seed,
            alpha=args.alpha,
            workers=args.workers,
            outdir=args.outdir,
            k_values=args.k_values,
            size_pairs=_parse_sizes(args.sizes) if args.sizes else None,
            d_values=args.d_values,
            progress=(
                (lambda msg: print(msg, file=sys.stderr))
                if args.progress
                else None
            ),
        )
        if result.csv_path is not None:
            print(f"wrote {result.csv_path}")
            print(f"wrote {result.sidecar_path}")
        else:
            print(",".join(result.columns))
            for row in result.rows:
                print(",".join(_fmt(row.get(c)) for c in result.columns))
        return 0

    spec = simulate.SettingSpec(
        setting=args.setting,
        d=args.d,
        k=args.k,
        n1=args.n1,
        n2=args.n2,
        pi0=args.pi0,
        master_seed=args.seed,
    )
    if args.export_replicate is not None:
        if args.out is None:
            raise OutOfRange("--export-replicate requires --out PATH")
        ds, null_flags = simulate.generate_replicate(spec, args.export_replicate)
        write_dataset_csv(ds, args.out)
        print(
            f"wrote replicate {args.export_replicate} to {args.out} "
            f"({ds.k} groups, {ds.d} categories, "
            f"{int(null_flags.sum())} null groups)"
        )
        return 0

    tests = tuple(t.strip() for t in args.tests.split(",") if t.strip())
    reps = args.reps if args.reps is not None else 10_000
    results = simulate.estimate_rejection_rate(
        spec,
        tests,
        reps=reps,
        alpha=args.alpha,
        workers=args.workers,
        moment_reps=args.moment_reps,
    )
    if args.format == "json":
        json.dump(
            {
                "spec": {
                    "setting": spec.setting,
                    "d": spec.d,
                    "k": spec.k,
                    "n1": spec.n1,
                    "n2": spec.n2,
                    "pi0": spec.pi0,
                    "seed": spec.master_seed,
                },
                "reps": reps,
                "alpha": args.alpha,
                "results": {
                    t: {
                        "rate": float(r.rate),
                        "se": float(r.se),
                        "rejections": int(r.rejections),
                        "degenerate": int(r.degenerate),
                    }
                    for t, r in results.items()
                },
            },
            sys.stdout,
            indent=2,
        )
        sys.stdout.write("\n")
    elif args.format == "csv":
        print("test,rate,se,rejections,reps,degenerate")
        for t, r in results.items():
            print(
                f"{t},{_fmt(float(r.rate))},{_fmt(float(r.se))},"
                f"{r.rejections},{r.reps},{r.degenerate}"
            )
    else:
        print(
            f"setting {spec.setting}, d = {spec.d}, k = {spec.k}, "
            f"sizes = ({spec.n1}, {spec.n2}), reps = {reps}, "
            f"seed = {spec.master_seed}"
        )
        for t, r in results.items():
            extra = f", degenerate = {r.degenerate}" if r.degenerate else ""
            print(
                f"{t}: rejection rate = {r.rate:.4f} "
                f"(se = {r.se:.4f}){extra}"
            )
    return 0


# ---------------------------------------------------------------------------
# benchmark
# ---------------------------------------------------------------------------


def _cmd_benchmark(args) -> int:
    rows = simulate.benchmark_statistics(
        k_values=tuple(args.k_values),
        d=args.d,
        sizes=tuple(args.sizes_pair),
        reps=args.reps,
        seed=args.seed,
    )
    if args.format == "json":
        json.dump(rows, sys.stdout, indent=2)
        sys.stdout.write("\n")
    elif args.format == "csv":
        print("d,k,n1,n2,estimator,seconds")
        for row in rows:
            print(
                f"{row['d']},{row['k']},{row['n1']},{row['n2']},"
                f"{row['estimator']},{row['seconds']:.6g}"
            )
    else:
        print(f"median seconds per global test (d = {args.d}, "
              f"sizes = {tuple(args.sizes_pair)})")
        print(f"{'k':>6}  " + "".join(f"{e:>10}" for e in decision.ESTIMATORS))
        for k in args.k_values:
            cells = [r for r in rows if r["k"] == k]
            line = f"{k:>6}  " + "".join(
                f"{c['seconds']:>10.4f}" for c in cells
            )
            print(line)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grouphom",
        description=(
            "Tests of simultaneous homogeneity of two multinomial "
            "populations across many small groups."
        ),
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser(
        "test", help="global homogeneity test from a counts CSV"
    )
    p_test.add_argument("data", help="counts CSV (group,population,c1,...,cd)")
    p_test.add_argument(
        "--estimator",
        default="test1",
        choices=tuple(decision.ESTIMATORS) + ("all",),
        help="null-variance estimator (default: test1)",
    )
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--seed", type=int, default=None,
                        help="bootstrap seed (test7); default: OS entropy")
    p_test.add_argument("--bootstrap-b", type=int, default=200,
                        help="bootstrap replicates for test7 (default: 200)")
    p_test.add_argument("--format", choices=_FORMATS, default="human")
    p_test.set_defaults(func=_cmd_test)

    p_pg = sub.add_parser(
        "pergroup", help="per-group bootstrap p-values with BH/Bonferroni"
    )
    p_pg.add_argument("data")
    p_pg.add_argument("--alpha", type=float, default=0.05)
    p_pg.add_argument("--seed", type=int, default=None,
                      help="bootstrap seed; default: OS entropy")
    p_pg.add_argument("--bootstrap-b", type=int, default=1000)
    p_pg.add_argument("--smoothed", action="store_true",
                      help="use the (count+1)/(B+1) p-value convention")
    p_pg.add_argument("--format", choices=_FORMATS, default="human")
    p_pg.set_defaults(func=_cmd_pergroup)

    p_sim = sub.add_parser(
        "simulate", help="Monte Carlo rejection rates / table reproduction"
    )
    p_sim.add_argument("--table", default=None,
                       choices=simulate.TABLE_IDS, metavar="TABLE",
                       help=f"one of {', '.join(simulate.TABLE_IDS)}")
    p_sim.add_argument("--setting", type=int, default=None,
                       help="data-generating setting 1..5")
    p_sim.add_argument("--d", type=int, default=5)
    p_sim.add_argument("--k", type=int, default=50)
    p_sim.add_argument("--n1", type=int, default=10)
    p_sim.add_argument("--n2", type=int, default=10)
    p_sim.add_argument("--pi0", type=int, default=None, choices=(2, 4),
                       help="alternative library vector (settings 3-4)")
    p_sim.add_argument("--tests", default="test1",
                       help="comma-separated test ids (default: test1)")
    p_sim.add_argument("--reps", type=int, default=None,
                       help="replicates (default: the table's published "
                            "count, or 10000)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--alpha", type=float, default=0.05)
    p_sim.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: MH_WORKERS or 1)")
    p_sim.add_argument("--outdir", default=None,
                       help="write <table>.csv and a JSON sidecar here")
    p_sim.add_argument("--k-values", type=int, nargs="+", default=None)
    p_sim.add_argument("--d-values", type=int, nargs="+", default=None)
    p_sim.add_argument("--sizes", default=None,
                       help="size pairs like '5,10;10,10'")
    p_sim.add_argument("--moment-reps", type=int, default=100_000)
    p_sim.add_argument("--progress", action="store_true",
                       help="report cells on stderr as they finish")
    p_sim.add_argument("--export-replicate", type=int, default=None,
                       metavar="INDEX",
                       help="write one generated replicate as a counts CSV")
    p_sim.add_argument("--out", default=None,
                       help="output path for --export-replicate")
    p_sim.add_argument("--format", choices=_FORMATS, default="human")
    p_sim.set_defaults(func=_cmd_simulate)

    p_bm = sub.add_parser("benchmark", help="time the seven estimators")
    p_bm.add_argument("--d", type=int, default=5)
    p_bm.add_argument("--k-values", type=int, nargs="+",
                      default=[50, 200, 750])
    p_bm.add_argument("--sizes-pair", type=int, nargs=2, default=[30, 30],
                      metavar=("N1", "N2"))
    p_bm.add_argument("--reps", type=int, default=5)
    p_bm.add_argument("--seed", type=int, default=0)
    p_bm.add_argument("--format", choices=_FORMATS, default="human")
    p_bm.set_defaults(func=_cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EstimatorPrecondition as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DatasetError, OutOfRange) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GrouphomError as exc:
        # UnknownTable is a KeyError, whose str() quotes the message.
        print(f"error: {exc.args[0] if exc.args else exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
