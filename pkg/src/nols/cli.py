"""Command line front end: gen, solve, verify, bench.

Every command is a deterministic function of its arguments, the seed, and
the instance bytes (bench's wall_time column is the one exception), so
reports and instances can be diffed byte for byte across runs.

Exit codes: 0 success, 1 verification failure or bad input, 2 randomized
solve that exhausted its retry budget.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

from .core import ElementSet
from .instances import (
    FAMILIES,
    InstanceFile,
    dumps_canonical,
    generate_instance,
    load_instance,
    save_instance,
)
from .matroids import lift
from .objectives import LiftedGuide, RegularizedGuide, guide_weights, project_all
from .solvers import (
    DETERMINISTIC,
    PLAIN_GREEDY,
    RANDOMIZED,
    LocalOptCertificate,
    RunReport,
    SolverConfig,
    THRESHOLD_GREEDY,
    non_oblivious_solve,
)
from .verify import (
    MAX_BRUTE_FORCE,
    approximation_report,
    brute_force_opt,
    check_certificate,
)

REPORT_FORMAT_VERSION = 1

BENCH_COLUMNS = [
    "instance",
    "n",
    "r",
    "eps",
    "variant",
    "seed",
    "f_S",
    "f_opt",
    "ratio",
    "value_queries",
    "independence_queries",
    "iterations",
    "wall_time",
    "failed",
]


def _ceil_sqrt(n: int) -> int:
    root = math.isqrt(n)
    return root + (1 if root * root < n else 0)


def det_normalizer(n: int, r: int) -> float:
    return n * r * (1.0 + math.log2(r)) if r >= 1 else float(n)


def rand_normalizer(n: int, r: int) -> float:
    return (n + r * _ceil_sqrt(n)) * (1.0 + math.log2(r)) if r >= 1 else float(n)


def report_document(
    report: RunReport, instance: InstanceFile, config: SolverConfig, regularized: bool
) -> dict:
    cert = None
    if report.certificate is not None:
        c = report.certificate
        cert = {
            "witness": c.witness.to_list(),
            "gap": c.gap,
            "bound": c.bound,
            "eps": c.eps,
            "warm_value": c.warm_value,
        }
    return {
        "format_version": REPORT_FORMAT_VERSION,
        "instance": instance.name,
        "n": instance.n,
        "rank": report.rank,
        "eps": report.eps,
        "eps_inner": report.eps_inner,
        "levels": report.levels,
        "variant": report.variant,
        "seed": report.seed,
        "warm_start": config.warm_start,
        "regularized": regularized,
        "failed": report.failed,
        "output_set": report.output_set.to_list(),
        "objective_value": report.objective_value,
        "value_queries": report.ledger.value_queries,
        "independence_queries": report.ledger.independence_queries,
        "iterations": report.iterations,
        "lifted_solution": (
            None
            if report.lifted_solution is None
            else report.lifted_solution.to_list()
        ),
        "warm_value": report.warm_value,
        "certificate": cert,
    }


def cmd_gen(args) -> int:
    instance = generate_instance(args.family, args.n, args.r, args.seed)
    save_instance(instance, args.out)
    print(f"wrote {args.out} ({instance.name})")
    return 0


def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    f = instance.build_objective()
    matroid = instance.build_matroid()
    regularizer = instance.build_regularizer()
    config = SolverConfig(
        eps=args.eps,
        variant=args.variant,
        seed=args.seed,
        levels_override=args.levels,
        warm_start=args.warm_start,
    )
    report = non_oblivious_solve(
        f,
        matroid,
        config,
        regularizer=regularizer,
        retry_budget=args.retry_budget,
    )
    doc = report_document(report, instance, config, regularizer is not None)
    text = dumps_canonical(doc)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if report.failed:
        print("randomized search failed on every attempt; output is empty", file=sys.stderr)
        return 2
    return 0


def cmd_verify(args) -> int:
    instance = load_instance(args.instance)
    doc = json.loads(Path(args.report).read_text())
    problems: list[str] = []

    def check(ok: bool, label: str):
        line = f"{'ok' if ok else 'FAIL'}: {label}"
        print(line)
        if not ok:
            problems.append(label)

    check(doc.get("format_version") == REPORT_FORMAT_VERSION, "report format version")
    check(doc.get("instance") == instance.name, "report names this instance")
    f = instance.build_objective()
    matroid = instance.build_matroid()
    n = instance.n
    output = ElementSet.from_iterable(n, doc["output_set"])
    check(
        f.eval(output) == doc["objective_value"],
        "objective value matches the output set",
    )
    check(matroid.is_independent(output), "output set is independent")

    if doc["failed"]:
        check(len(output) == 0, "failed run reports the empty set")
        check(doc["certificate"] is None, "failed run carries no certificate")
        if problems:
            return 1
        print("verified (failed run, consistent)")
        return 0

    levels = doc["levels"]
    weights = guide_weights(levels)
    regularizer = instance.build_regularizer()
    if doc.get("regularized"):
        check(regularizer is not None, "instance carries the regularizer")
    if doc.get("regularized") and regularizer is not None:
        guide = RegularizedGuide(f, weights, regularizer)
    else:
        guide = LiftedGuide(f, weights)
    lifted_matroid = lift(matroid, levels)
    lifted_solution = ElementSet.from_iterable(n * levels, doc["lifted_solution"])
    check(
        lifted_matroid.is_independent(lifted_solution),
        "lifted solution is independent in the lifted matroid",
    )
    check(
        project_all(lifted_solution, levels) == output,
        "output set is the projection of the lifted solution",
    )
    cert_doc = doc["certificate"]
    certificate = LocalOptCertificate(
        witness=ElementSet.from_iterable(n * levels, cert_doc["witness"]),
        gap=cert_doc["gap"],
        bound=cert_doc["bound"],
        eps=cert_doc["eps"],
        warm_value=cert_doc["warm_value"],
    )
    issues = check_certificate(certificate, guide, lifted_matroid, lifted_solution)
    check(not issues, "certificate recomputation matches" + (
        "" if not issues else f" ({'; '.join(issues)})"
    ))

    if not args.certificate_only:
        if n > MAX_BRUTE_FORCE:
            check(
                False,
                f"n={n} exceeds brute force scale; rerun with --certificate-only",
            )
        else:
            truth = brute_force_opt(f, matroid)
            run = RunReport(
                output_set=output,
                objective_value=doc["objective_value"],
                ledger=None,  # unused by the report
                iterations=doc["iterations"],
                failed=False,
                certificate=certificate,
                eps=doc["eps"],
                eps_inner=doc["eps_inner"],
                levels=levels,
                variant=doc["variant"],
                seed=doc["seed"],
                rank=doc["rank"],
                lifted_solution=lifted_solution,
                warm_value=doc["warm_value"],
            )
            appr = approximation_report(run, truth)
            check(
                appr.passed,
                f"approximation ratio {appr.ratio:.4f} meets target "
                f"{appr.target:.4f}",
            )

    if problems:
        return 1
    print("verified")
    return 0


def bench_grid(
    family: str,
    cells: list[tuple[int, int]],
    eps_list: list[float],
    seeds: list[int],
    variants: list[str],
    out_csv: str | Path,
    gen_seed: int = 0,
) -> dict:
    """Run the grid, stream rows to CSV, and return the normalized summary.

    Returns {(variant, eps): {"per_cell": {(n, r): mean normalized queries},
    "max": float, "min": float}}. Rows are written incrementally; wall_time
    is measured, everything else is deterministic.
    """
    samples: dict[tuple[str, float], dict[tuple[int, int], list[float]]] = {}
    with open(out_csv, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        handle.flush()
        for n, r in cells:
            instance = generate_instance(family, n, r, gen_seed)
            f = instance.build_objective()
            matroid = instance.build_matroid()
            truth = None
            if n <= MAX_BRUTE_FORCE:
                truth = brute_force_opt(f, matroid)
            for eps in eps_list:
                for variant in variants:
                    for seed in seeds:
                        config = SolverConfig(eps=eps, variant=variant, seed=seed)
                        start = time.perf_counter()
                        report = non_oblivious_solve(f, matroid, config)
                        wall = time.perf_counter() - start
                        queries = report.ledger.total
                        denom = (
                            det_normalizer(n, r)
                            if variant == DETERMINISTIC
                            else rand_normalizer(n, r)
                        )
                        samples.setdefault((variant, eps), {}).setdefault(
                            (n, r), []
                        ).append(queries / denom)
                        if truth is not None and truth.opt_value > 0:
                            f_opt = truth.opt_value
                            ratio = report.objective_value / truth.opt_value
                        elif truth is not None:
                            f_opt = truth.opt_value
                            ratio = 1.0
                        else:
                            f_opt = ""
                            ratio = ""
                        writer.writerow(
                            {
                                "instance": instance.name,
                                "n": n,
                                "r": r,
                                "eps": eps,
                                "variant": variant,
                                "seed": seed,
                                "f_S": report.objective_value,
                                "f_opt": f_opt,
                                "ratio": ratio,
                                "value_queries": report.ledger.value_queries,
                                "independence_queries": report.ledger.independence_queries,
                                "iterations": report.iterations,
                                "wall_time": f"{wall:.6f}",
                                "failed": int(report.failed),
                            }
                        )
                        handle.flush()
    summary = {}
    for key, per_cell in samples.items():
        means = {cell: sum(vals) / len(vals) for cell, vals in per_cell.items()}
        summary[key] = {
            "per_cell": means,
            "max": max(means.values()),
            "min": min(means.values()),
        }
    return summary


def cmd_bench(args) -> int:
    ns = _int_list(args.n)
    if args.r:
        rs = _int_list(args.r)
        if len(rs) == 1:
            rs = rs * len(ns)
        if len(rs) != len(ns):
            print("--r must have one value or match --n", file=sys.stderr)
            return 1
    else:
        rs = [_ceil_sqrt(n) for n in ns]
    cells = list(zip(ns, rs))
    eps_list = [float(x) for x in args.eps.split(",") if x] if args.eps else []
    seeds = _int_list(args.seeds) if args.seeds else []
    variants = [v for v in args.variants.split(",") if v] if args.variants else []
    for v in variants:
        if v not in (DETERMINISTIC, RANDOMIZED):
            print(f"unknown variant {v!r}", file=sys.stderr)
            return 1
    summary = bench_grid(
        args.family, cells, eps_list, seeds, variants, args.out, args.gen_seed
    )
    for (variant, eps), stats in sorted(summary.items()):
        print(
            f"summary variant={variant} eps={eps} "
            f"max_normalized_queries={stats['max']:.6g} "
            f"min_normalized_queries={stats['min']:.6g}"
        )
    print(f"wrote {args.out}")
    return 0


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nols",
        description=(
            "Non-oblivious local search for monotone submodular maximization "
            "under a matroid constraint."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate an instance file")
    p_gen.add_argument("--family", choices=FAMILIES, required=True)
    p_gen.add_argument("--n", type=int, required=True, help="ground set size")
    p_gen.add_argument("--r", type=int, required=True, help="matroid rank")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen)

    p_solve = sub.add_parser("solve", help="run the solver on an instance")
    p_solve.add_argument("--instance", required=True)
    p_solve.add_argument("--eps", type=float, required=True)
    p_solve.add_argument(
        "--variant", choices=(DETERMINISTIC, RANDOMIZED), default=DETERMINISTIC
    )
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument(
        "--levels", type=int, default=None, help="override the level count"
    )
    p_solve.add_argument(
        "--warm-start",
        choices=(THRESHOLD_GREEDY, PLAIN_GREEDY),
        default=THRESHOLD_GREEDY,
    )
    p_solve.add_argument("--out", default=None, help="report path (stdout if unset)")
    p_solve.add_argument(
        "--retry-budget", type=int, default=None, help=argparse.SUPPRESS
    )
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="recheck a solve report")
    p_verify.add_argument("--instance", required=True)
    p_verify.add_argument("--report", required=True)
    p_verify.add_argument(
        "--certificate-only",
        action="store_true",
        help="skip the brute-force ratio check",
    )
    p_verify.set_defaults(func=cmd_verify)

    p_bench = sub.add_parser("bench", help="run a benchmark grid to CSV")
    p_bench.add_argument("--family", choices=FAMILIES, default="coverage")
    p_bench.add_argument("--n", required=True, help="comma list of ground sizes")
    p_bench.add_argument(
        "--r", default=None, help="comma list of ranks (default ceil(sqrt(n)))"
    )
    p_bench.add_argument("--eps", default="0.5", help="comma list of eps values")
    p_bench.add_argument("--seeds", default="0", help="comma list of seeds")
    p_bench.add_argument(
        "--variants", default=DETERMINISTIC, help="comma list of variants"
    )
    p_bench.add_argument("--gen-seed", type=int, default=0)
    p_bench.add_argument("--out", required=True, help="CSV output path")
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
