"""``direp`` command line: EPs, agglomeration, poll posteriors, RFX BMS, benchmark.

All category, group and family indices on the command line are 1-based.
Exit status: 0 success, 2 bad input, 3 numerical non-convergence.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import bench
from .bms import vb_estimate, family_ep
from .dirichlet import (
    SAMPLING,
    agglomerate,
    as_alpha,
    ep_auto,
    ep_batch,
    poll_posterior,
    validate_partition,
)
from .errors import ConvergenceError, DomainError, PartitionError
from .quadrature import QuadratureConfig

EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(Exception):
    """Bad command-line input; reported with exit status 2."""


# -- parsing -------------------------------------------------------------------

def parse_floats(text, where):
    try:
        values = [float(tok) for tok in text.split(",")]
    except ValueError:
        raise InputError(f"{where}: malformed number list {text.strip()!r}") from None
    if not all(np.isfinite(values)):
        raise InputError(f"{where}: non-finite value in {text.strip()!r}")
    return values


def parse_alpha(text, where):
    values = parse_floats(text, where)
    try:
        return as_alpha(values)
    except DomainError as exc:
        raise InputError(f"{where}: {exc}") from None


def parse_groups(text):
    """``"1,3;2,4;5,6"`` -> ``[[1, 3], [2, 4], [5, 6]]`` (indices stay 1-based)."""
    groups = []
    for n, chunk in enumerate(text.split(";"), start=1):
        chunk = chunk.strip()
        if not chunk:
            groups.append([])
            continue
        try:
            groups.append([int(tok) for tok in chunk.split(",")])
        except ValueError:
            raise InputError(f"--groups: group {n} is not a list of integers: {chunk!r}") from None
    return groups


def read_alpha_file(path):
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append(parse_alpha(line, f"{path}:{lineno}"))
    if not rows:
        raise InputError(f"{path}: no alpha vectors found")
    return rows


def read_lme_file(path):
    """Matrices from a CSV file; a line ``---`` starts the next matrix."""
    matrices, current, width = [], [], None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line.startswith("#") or not line:
                continue
            if line == "---":
                if current:
                    matrices.append(np.array(current))
                current, width = [], None
                continue
            row = parse_floats(line, f"{path}:{lineno}")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise InputError(
                    f"{path}:{lineno}: row has {len(row)} columns, expected {width}")
            current.append(row)
    if current:
        matrices.append(np.array(current))
    if not matrices:
        raise InputError(f"{path}: no log-evidence rows found")
    for n, m in enumerate(matrices, start=1):
        if m.shape[1] < 2:
            raise InputError(f"{path}: matrix {n} has fewer than 2 models")
    return matrices


# -- formatting ----------------------------------------------------------------

def fmt_list(values, spec=".6f"):
    return ";".join(format(float(v), spec) for v in values)


def to_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def to_json(obj):
    return json.dumps(obj, indent=2) + "\n"


def ep_record(alpha, ev):
    return {
        "alpha": [float(a) for a in alpha],
        "phi": ev.phi.tolist(),
        "method": ev.method,
        "error": ev.error.tolist(),
        "sum_deviation": ev.sum_deviation,
    }


def emit(args, text):
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def quad_config(args):
    try:
        return QuadratureConfig(abs_tol=args.abs_tol, rel_tol=args.rel_tol)
    except ValueError as exc:
        raise InputError(str(exc)) from None


# -- subcommands ---------------------------------------------------------------

def cmd_ep(args):
    if args.alpha is not None:
        rows = [parse_alpha(args.alpha, "--alpha")]
    else:
        rows = read_alpha_file(args.input)
    if args.method == SAMPLING:
        if args.seed is None:
            raise InputError("--seed is required with --method sampling")
        if args.samples < 1:
            raise InputError("--samples must be positive")
        for n, r in enumerate(rows, start=1):
            if r.size < 2:
                raise InputError(f"row {n}: sampling needs at least 2 categories")
    if args.method == "integration":
        for n, r in enumerate(rows, start=1):
            if r.size < 2:
                raise InputError(f"row {n}: integration needs at least 2 categories")
    results = ep_batch(rows, args.method, quad_config(args), args.samples, args.seed)

    if args.format == "json":
        records = [ep_record(a, ev) for a, ev in zip(rows, results)]
        return to_json(records[0] if args.alpha is not None else records)
    return to_csv(
        ["row", "method", "k", "sum_deviation", "phi", "error"],
        [[n, ev.method, len(ev), f"{ev.sum_deviation:.3e}", fmt_list(ev.phi), fmt_list(ev.error, ".3e")]
         for n, ev in enumerate(results, start=1)],
    )


def cmd_agglom(args):
    alpha = parse_alpha(args.alpha, "--alpha")
    groups = validate_partition(parse_groups(args.groups), alpha.size, base=1)
    merged = agglomerate(alpha, groups)
    ev = ep_auto(merged, quad_config(args))
    members = [[i + 1 for i in g] for g in groups]
    if args.format == "json":
        record = ep_record(merged, ev)
        record["groups"] = members
        return to_json(record)
    return to_csv(
        ["group", "members", "alpha", "phi"],
        [[n, ";".join(map(str, m)), f"{a:.6f}", f"{p:.6f}"]
         for n, (m, a, p) in enumerate(zip(members, merged, ev.phi), start=1)],
    )


def cmd_poll(args):
    percent = parse_floats(args.percent, "--percent")
    prior = None
    if args.prior is not None:
        prior = parse_alpha(args.prior, "--prior")
        if prior.size != len(percent):
            raise InputError(f"--prior has {prior.size} entries, --percent has {len(percent)}")
    total = sum(percent)
    if abs(total - 100.0) > 0.5:
        print(f"direp: warning: percentages sum to {total:g}, not 100", file=sys.stderr)
    try:
        alpha = poll_posterior(percent, args.n, prior, args.round)
    except DomainError as exc:
        raise InputError(str(exc)) from None
    ev = ep_auto(alpha, quad_config(args))
    if args.format == "json":
        record = ep_record(alpha, ev)
        record["percent"] = percent
        record["n"] = args.n
        return to_json(record)
    return to_csv(
        ["category", "percent", "alpha", "phi"],
        [[j, f"{p:g}", f"{a:.6f}", f"{f:.6f}"]
         for j, (p, a, f) in enumerate(zip(percent, alpha, ev.phi), start=1)],
    )


def cmd_bms(args):
    matrices = read_lme_file(args.lme)
    groups = parse_groups(args.families) if args.families else None
    cfg = quad_config(args)
    records = []
    for n, lme in enumerate(matrices, start=1):
        if groups is not None:
            try:
                validate_partition(groups, lme.shape[1], base=1)
            except PartitionError as exc:
                raise InputError(f"matrix {n}: {exc}") from None
        res = vb_estimate(lme, tol=args.tol, max_iter=args.max_iter, quad_cfg=cfg)
        rec = {
            "matrix": n,
            "subjects": lme.shape[0],
            "models": lme.shape[1],
            "alpha_post": res.alpha_post.tolist(),
            "expected_freq": res.expected_freq.tolist(),
            "phi": res.exceedance.phi.tolist(),
            "iterations": res.iterations,
            "converged": res.converged,
        }
        if groups is not None:
            rec["families"] = groups
            rec["family_phi"] = family_ep(res, groups, cfg, base=1).phi.tolist()
        records.append(rec)

    if args.format == "json":
        return to_json(records)
    header = ["matrix", "subjects", "models", "iterations", "converged",
              "alpha_post", "expected_freq", "phi"]
    if groups is not None:
        header.append("family_phi")
    rows = []
    for r in records:
        row = [r["matrix"], r["subjects"], r["models"], r["iterations"], str(r["converged"]).lower(),
               fmt_list(r["alpha_post"]), fmt_list(r["expected_freq"]), fmt_list(r["phi"])]
        if groups is not None:
            row.append(fmt_list(r["family_phi"]))
        rows.append(row)
    return to_csv(header, rows)


def cmd_bench(args):
    if args.k < 3:
        raise InputError("--k must be at least 3 (k = 2 has a closed form)")
    if args.batch < 1 or args.samples < 1:
        raise InputError("--batch and --samples must be positive")
    report = bench.run_benchmark(args.k, args.batch, args.samples, args.seed, quad_config(args))
    d = report.as_dict()
    if args.format == "json":
        return to_json(d)
    return to_csv(list(d), [[
        d["k"], d["batch_size"], f"{d['integration_seconds']:.6f}", f"{d['sampling_seconds']:.6f}",
        d["samples"], f"{d['ratio']:.6f}", f"{d['max_abs_discrepancy']:.6f}",
    ]])


# -- entry point ---------------------------------------------------------------

def u64(text):
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="csv")
    common.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    common.add_argument("--abs-tol", type=float, default=1e-10)
    common.add_argument("--rel-tol", type=float, default=1e-8)

    parser = argparse.ArgumentParser(
        prog="direp", description="Exceedance probabilities for the Dirichlet distribution.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ep", parents=[common], help="exceedance probabilities")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--alpha", help="comma-separated concentrations")
    src.add_argument("--input", metavar="FILE", help="one alpha vector per line")
    p.add_argument("--method", choices=("auto", "integration", "sampling"), default="auto")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=u64)
    p.set_defaults(run=cmd_ep)

    p = sub.add_parser("agglom", parents=[common], help="merge categories, then EPs")
    p.add_argument("--alpha", required=True)
    p.add_argument("--groups", required=True, help='e.g. "1,3;2,4;5,6"')
    p.set_defaults(run=cmd_agglom)

    p = sub.add_parser("poll", parents=[common], help="posterior from poll percentages")
    p.add_argument("--percent", required=True)
    p.add_argument("--n", type=float, required=True, help="number of respondents")
    p.add_argument("--prior", help="prior concentrations (default all 1)")
    p.add_argument("--round", action="store_true", help="round the posterior to integers")
    p.set_defaults(run=cmd_poll)

    p = sub.add_parser("bms", parents=[common], help="random-effects Bayesian model selection")
    p.add_argument("--lme", required=True, metavar="FILE",
                   help="subjects x models CSV; '---' separates matrices")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--families", help='model families, e.g. "1,3;2,4"')
    p.set_defaults(run=cmd_bms)

    p = sub.add_parser("bench", parents=[common], help="integration vs sampling timing")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--batch", type=int, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=u64, default=0)
    p.set_defaults(run=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        emit(args, args.run(args))
    except (InputError, PartitionError, DomainError, OSError) as exc:
        print(f"direp: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        if getattr(exc, "component", None) is not None and exc.__cause__ is not None:
            # report the category 1-based, like every other CLI index
            exc = f"category {exc.component + 1}: {exc.__cause__}"
        print(f"direp: non-convergence: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"direp: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return 0


if __name__ == "__main__":
    sys.exit(main())
