"""Command-line entry point.

Exit codes: 0 success, 2 input error, 3 solver / numerical hard error.
Every run echoes its fully resolved configuration (including the seed):
inside the JSON output under ``"config"``, as a ``# config:`` first line of
CSV output, and on stderr for plain-text results.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import asdict, fields
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .errors import DegeneracyError, DomainError, SizeError, SolverError

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3


class _InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _InputError(f"{self.prog}: error: {message}")


# -- io helpers ----------------------------------------------------------------------

def _write(path: Optional[str], text: str) -> None:
    """Write atomically (temp file + rename) or to stdout when ``path`` is None."""
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path} is not valid JSON: {exc}") from None


def _load_stats(path: str):
    from .model import Dataset, SuffStats, reduce
    d = _read_json(path)
    if not isinstance(d, dict):
        raise _InputError(f"{path}: expected a JSON object")
    d = d.get("stats", d)
    if "y" in d:
        return reduce(Dataset.from_dict(d))
    return SuffStats.from_dict(d)


def _load_table(path: str):
    from .model import CountTable
    d = _read_json(path)
    if not isinstance(d, dict):
        raise _InputError(f"{path}: expected a JSON object")
    return CountTable.from_dict(d)


def _seed(args) -> int:
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().entropy % (2**63))
    return args.seed


def _config(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _echo(cfg: dict) -> None:
    print("# config: " + json.dumps(cfg, sort_keys=True, default=_json_default), file=sys.stderr)


# -- solver options --------------------------------------------------------------------

def _add_solver_flags(p):
    from .homotopy import SolverOptions
    g = p.add_argument_group("solver tolerances")
    g.add_argument("--formulation", choices=("sigma", "gamma_reduced", "gamma_full"),
                   default=SolverOptions.formulation)
    for f in fields(SolverOptions):
        if f.name in ("formulation", "expected_roots"):
            continue
        g.add_argument("--" + f.name.replace("_", "-"), type=type(f.default), default=f.default)


def _options(args):
    from .homotopy import SolverOptions
    kw = {f.name: getattr(args, f.name) for f in fields(SolverOptions) if hasattr(args, f.name)}
    return SolverOptions(**kw)


# -- subcommands -----------------------------------------------------------------------

def cmd_solve(args) -> int:
    from .critical_system import build
    from .homotopy import solve_parameter_homotopy, solve_total_degree
    seed = _seed(args)
    opts = _options(args)
    stats = _load_stats(args.stats)
    system = build(stats, opts.formulation)
    if args.method == "parameter":
        from .scenarios import anchor
        rep = solve_parameter_homotopy(system, anchor(opts), seed, opts)
    else:
        rep = solve_total_degree(system, seed, opts)
    _write(args.output, _dumps({"config": _config(args), "stats": stats.to_dict(), "report": rep.to_dict()}))
    return EXIT_OK


def cmd_em(args) -> int:
    from .em import em_gaussian, em_multinomial
    if (args.stats is None) == (args.table is None):
        raise _InputError("em: give exactly one of --stats or --table")
    if args.stats is not None:
        trace = em_gaussian(_load_stats(args.stats), em_tol=args.em_tol, max_iter=args.max_iter)
        fitted = trace.final.to_dict()
    else:
        trace = em_multinomial(_load_table(args.table), em_tol=args.em_tol, max_iter=args.max_iter)
        fitted = trace.final.to_dict()
    if args.trace_csv:
        _write(args.trace_csv, "# config: " + json.dumps(_config(args), sort_keys=True) + "\n" + trace.to_csv())
    out = {"config": _config(args), "fitted": fitted, "loglik": trace.iterates[-1][1],
           "converged": trace.converged, "iterations": trace.iterations, "residual": trace.residual,
           "monotone": trace.is_monotone()}
    _write(args.output, _dumps(out))
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .scenarios import ScenarioSpec, run
    seed = _seed(args)
    spec = ScenarioSpec(args.scenario, samples_per_trial=args.samples, trials=args.trials, master_seed=seed,
                        mixture_weight=args.mixture_weight, censor_prob=args.censor_prob,
                        distribution=args.distribution)
    hist = run(spec, jobs=args.jobs, options=_options(args))
    cfg = _config(args)
    if args.format == "csv":
        text = "# config: " + json.dumps(cfg, sort_keys=True) + "\n" + hist.to_csv()
    else:
        text = _dumps({"config": cfg, "histogram": hist.to_dict(),
                       "records": [asdict(r) for r in hist.records]})
    _write(args.output, text)
    return EXIT_OK


def cmd_mldegree(args) -> int:
    from .combinatorics import count_lonesum, ml_degree, ml_degree_two_rows
    _echo(_config(args))
    value = ml_degree(args.m, args.n)
    lines = [str(value)]
    status = EXIT_OK
    if args.verify_lonesum:
        count = count_lonesum(args.m, args.n, True, override_limit=args.override_limit, jobs=args.jobs)
        lines.append(f"lonesum_positive_margins {count} {'match' if count == value else 'MISMATCH'}")
        status = status if count == value else EXIT_SOLVER
    if args.closed_form_check:
        if min(args.m, args.n) == 2:
            closed = ml_degree_two_rows(max(args.m, args.n))
            lines.append(f"closed_form {closed} {'match' if closed == value else 'MISMATCH'}")
            status = status if closed == value else EXIT_SOLVER
        else:
            lines.append("closed_form n/a (needs a two-row or two-column table)")
    _write(None, "\n".join(lines))
    return status


def cmd_count_regions(args) -> int:
    from .arrangement import (BOUNDED, classify_combinatorial, classify_lp, count_bounded_regions,
                              iter_partitions, regions_csv)
    from .combinatorics import ml_degree
    _echo(_config(args))
    count = count_bounded_regions(args.m, args.n, jobs=args.jobs)
    lines = [str(count)]
    status = EXIT_OK
    if args.cross_check:
        formula = ml_degree(args.m, args.n)
        disagree = sum((classify_lp(p).status == BOUNDED) != (classify_combinatorial(p) == BOUNDED)
                       for p in iter_partitions(args.m, args.n))
        lines.append(f"ml_degree {formula} {'match' if formula == count else 'MISMATCH'}")
        lines.append(f"combinatorial_disagreements {disagree}")
        if formula != count or disagree:
            status = EXIT_SOLVER
    if args.csv:
        _write(args.csv, "# config: " + json.dumps(_config(args), sort_keys=True) + "\n"
               + regions_csv(args.m, args.n))
    _write(None, "\n".join(lines))
    return status


def cmd_discrete_critical(args) -> int:
    from .arrangement import discrete_critical_points
    table = _load_table(args.table)
    pts = discrete_critical_points(table)
    _write(args.output, _dumps({"config": _config(args), "count": len(pts),
                                "points": [p.to_dict() for p in pts]}))
    return EXIT_OK


def cmd_discrete_mle(args) -> int:
    from .em import em_multinomial
    trace = em_multinomial(_load_table(args.table), em_tol=args.em_tol, max_iter=args.max_iter)
    if not trace.converged:
        raise DegeneracyError(f"EM did not converge in {args.max_iter} iterations")
    _write(args.output, _dumps({"config": _config(args), "p": trace.final.p.tolist(),
                                "converged": trace.converged, "loglik": trace.iterates[-1][1], "iterations": trace.iterations,
                                "residual": trace.residual}))
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    jobs_default = os.cpu_count() or 1
    p = _Parser(prog="missml", description="Critical points of bivariate missing-data likelihoods.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="all complex critical points of the Gaussian likelihood")
    s.add_argument("--stats", required=True, help="JSON with SuffStats fields or a dataset {y, z, w}")
    s.add_argument("--seed", type=int)
    s.add_argument("--method", choices=("total_degree", "parameter"), default="total_degree")
    s.add_argument("--output", "-o")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("em", help="EM fit of the Gaussian (--stats) or multinomial (--table) model")
    s.add_argument("--stats")
    s.add_argument("--table")
    s.add_argument("--em-tol", type=float, default=1e-9)
    s.add_argument("--max-iter", type=int, default=10000)
    s.add_argument("--trace-csv")
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_em)

    s = sub.add_parser("simulate", help="real-root histogram of a censoring scenario")
    s.add_argument("--scenario", required=True, choices=("mcar", "mar", "nmar", "wild", "random_stats"))
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--seed", type=int)
    s.add_argument("--mixture-weight", type=float, default=0.5)
    s.add_argument("--censor-prob", type=float, default=0.2)
    s.add_argument("--distribution", choices=("gaussian", "uniform"), default="gaussian")
    s.add_argument("--jobs", type=int, default=jobs_default)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.add_argument("--output", "-o")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("mldegree", help="ML degree of the m x n multinomial model")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--verify-lonesum", action="store_true")
    s.add_argument("--closed-form-check", action="store_true")
    s.add_argument("--override-limit", action="store_true")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_mldegree)

    s = sub.add_parser("count-regions", help="bounded regions of the arrangement by exact LP")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--cross-check", action="store_true")
    s.add_argument("--csv")
    s.add_argument("--jobs", type=int, default=jobs_default)
    s.set_defaults(func=cmd_count_regions)

    s = sub.add_parser("discrete-critical", help="one critical point per bounded region")
    s.add_argument("--table", required=True)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_discrete_critical)

    s = sub.add_parser("discrete-mle", help="nonnegative MLE of a count table by EM")
    s.add_argument("--table", required=True)
    s.add_argument("--em-tol", type=float, default=1e-9)
    s.add_argument("--max-iter", type=int, default=10000)
    s.add_argument("--output", "-o")
    s.set_defaults(func=cmd_discrete_mle)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _InputError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, SizeError, ValueError, KeyError, TypeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, DegeneracyError, ArithmeticError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
