"""
charstrat command line: codimension formulas, censuses, Monte-Carlo fits,
pointwise classification, normal forms and the acceptance battery.

Usage:
    python3 src/cli.py codim --crit 2 2 1
    python3 src/cli.py minimize --e 4 --a 2 --f 1 --sign plus
    python3 src/cli.py census --e 3 --a 2 --f 1 --sym alt --field F2 --format csv
    python3 src/cli.py mc --singular 2 --tower F2,F4,F16 --samples 100000
    python3 src/cli.py classify --map "x0^2; x0*x1" --point 0,0 --field F3
    python3 src/cli.py morse --series "x1^2 + x0*x1^3" --params 1 --trunc 6
    python3 src/cli.py milnor --series "x0^3 + x1^3" --field F2
    python3 src/cli.py verify --mode quick

Exit codes: 0 success, 1 computational failure (or a failed verify run),
2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from dataclasses import field as dc_field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from config import (CENSUS_BUDGET, DEFAULT_MC_SAMPLES, DEFAULT_SEED, DEFAULT_TOWER, DEFAULT_TRUNCATION,
                    LOG_DATEFMT, LOG_FORMAT, LOG_ROTATE_BYTES, MC_TOLERANCE, MILNOR_MAX_TRUNC,
                    REPORTS_DIR, SCHEMA, TOOL_VERSION)
from errors import CharstratError, UsageError

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Logging
# ---------------------------------------------------------------------------

def setup_logging(verbose: int = 0, log_file: Path | None = None) -> None:
    """Stderr logging, plus an optional file rotated to ``.log.old`` past LOG_ROTATE_BYTES."""
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    fmt = logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT)
    root = logging.getLogger()
    for h in list(root.handlers):
        root.removeHandler(h)
    root.setLevel(level)
    sh = logging.StreamHandler(sys.stderr)
    sh.setFormatter(fmt)
    root.addHandler(sh)
    if log_file is not None:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)
        try:
            if log_file.exists() and log_file.stat().st_size > LOG_ROTATE_BYTES:
                log_file.replace(log_file.with_suffix(".log.old"))
        except OSError:
            pass  # rotation is best-effort
        fh = logging.FileHandler(log_file, encoding="utf-8")
        fh.setFormatter(fmt)
        root.addHandler(fh)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

_SHARED = ("field", "seed", "trunc", "samples", "tower", "format", "budget", "workers")
_NOT_CONFIG = ("func", "command", "out", "log_file", "verbose")


@dataclass(frozen=True)
class RunConfig:
    """The resolved settings of one invocation, echoed into every report."""
    command: str
    field: str
    seed: int
    trunc: int
    samples: int
    tower: str
    format: str
    budget: int
    workers: int
    options: dict[str, Any] = dc_field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        """Split parsed arguments into the shared settings and per-command options."""
        ns = vars(args)
        options = {k: v for k, v in ns.items()
                   if k not in _SHARED and k not in _NOT_CONFIG and v is not None}
        return cls(command=args.command, options=options, **{k: ns[k] for k in _SHARED})

    def to_dict(self) -> dict[str, Any]:
        out = {k: getattr(self, k) for k in _SHARED}
        out.update(self.options)
        return dict(sorted(out.items()))


def envelope(command: str, args: argparse.Namespace, result: dict[str, Any]) -> dict[str, Any]:
    """Result fields plus the reproducibility header every report carries."""
    config = RunConfig.from_args(args)
    return {
        **result,
        "schema": SCHEMA,
        "tool_version": TOOL_VERSION,
        "command": command,
        "seed": config.seed,
        "config": config.to_dict(),
        "generated_at": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }


def dumps(payload: dict[str, Any]) -> str:
    """Stable JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, default=str) + "\n"


def emit(text: str, out: Path | None) -> None:
    """Write *text* to *out* atomically, or to stdout when no path is given."""
    from atomic import write_atomic_text

    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic_text(Path(out), text)
        logger.info(f"wrote {out}")


def _field(args: argparse.Namespace):
    from exactfield import FieldSpec, field_create

    return field_create(FieldSpec.parse(args.field))


def _sym(text: str):
    from codim import Symmetry

    try:
        return Symmetry.parse(text)
    except ValueError as exc:
        raise UsageError(f"unknown symmetry {text!r} (use sym/plus or alt/minus)") from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_codim(args: argparse.Namespace) -> int:
    """Closed-form codimensions, one family per flag, or the whole grid."""
    import codim

    char = args.char if args.char is not None else _field(args).characteristic()

    def report(value: int | None) -> dict[str, Any]:
        return {"nonempty": False} if value is None else {"nonempty": True, "codim": value}

    if args.grid:
        frame = codim.codim_grid(args.max_dim, char)
        if args.format == "csv":
            from atomic import write_atomic_csv

            if args.out:
                write_atomic_csv(frame, Path(args.out))
            else:
                sys.stdout.write(frame.to_csv(index=False))
            return 0
        result = {"rows": json.loads(frame.to_json(orient="records"))}
    elif args.crit:
        result = report(codim.crit_codim(*args.crit))
    elif args.second:
        result = report(codim.second_order_codim(*args.second, char))
    elif args.bad:
        result = report(codim.bad_locus_codim(*args.bad, char))
    elif args.delta:
        e, a, f, i, p = args.delta
        spec = codim.DeltaSpec(e, a, f, i, p, _sym(args.sym))
        result = report(codim.delta_codim(spec))
        result["ambient_dim"] = spec.ambient_dim
    elif args.box:
        result = report(codim.box_rank_stratum_codim(*args.box, _sym(args.sym)))
    elif args.first:
        result = {"codim": codim.first_degeneracy_codim(*args.first, _sym(args.sym))}
    else:
        raise UsageError("codim needs one of --crit, --second, --bad, --delta, --box, --first, --grid")
    emit(dumps(envelope("codim", args, result)), args.out)
    return 0


def cmd_minimize(args: argparse.Namespace) -> int:
    """Closed-form minimum of C next to the brute-force minimum over the region."""
    import codim

    spec = codim.CMinSpec(args.e, args.a, args.f, _sym(args.sign))
    value, witness = codim.minimize_C(spec)
    brute, argmin = codim.brute_force_min_C(spec)
    result = {
        "closed_form": value,
        "witness": list(witness),
        "brute_force": brute,
        "argmin": [list(pt) for pt in argmin],
        "agree": value == brute,
    }
    emit(dumps(envelope("minimize", args, result)), args.out)
    return 0


def cmd_census(args: argparse.Namespace) -> int:
    """Exhaustive stratum counts as JSON or CSV."""
    from census import ConstrainedSpec, stratum_census

    spec = ConstrainedSpec(args.e, args.a, args.f, _sym(args.sym), _field(args))
    table = stratum_census(spec, workers=args.workers, budget=args.budget)
    if args.format == "csv":
        from atomic import write_atomic_csv

        frame = table.to_frame()
        if args.out:
            write_atomic_csv(frame, Path(args.out))
        else:
            sys.stdout.write(frame.to_csv(index=False))
        return 0
    emit(dumps(envelope("census", args, table.to_dict())), args.out)
    return 0


def cmd_mc(args: argparse.Namespace) -> int:
    """Tower fit of a codimension by Monte-Carlo, next to its formula value."""
    import codim
    from census import CriticalJetTrial, DeltaTrial, SingularMatrixTrial, estimate_codim_mc
    from exactfield import field_create, parse_tower

    tower = [field_create(s) for s in parse_tower(args.tower)]
    if args.crit:
        n, r, i = args.crit
        trial, formula = CriticalJetTrial(n, r, i), codim.crit_codim(n, r, i)
    elif args.singular:
        trial, formula = SingularMatrixTrial(args.singular), 1
    elif None not in (args.e, args.a, args.f, args.i, args.p):
        sym = _sym(args.sym)
        trial = DeltaTrial(args.e, args.a, args.f, sym, args.i, args.p)
        formula = codim.delta_codim(codim.DeltaSpec(args.e, args.a, args.f, args.i, args.p, sym))
    else:
        raise UsageError("mc needs --crit n r i, --singular k, or all of --e --a --f --i --p")
    est = estimate_codim_mc(trial, tower, args.samples, args.seed, args.workers, formula)
    emit(dumps(envelope("mc", args, est.to_dict(args.tolerance))), args.out)
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    """Corank, symbol and bad-locus membership of a map at a point."""
    from poly import parse_map, parse_point
    from strata import classify

    K = _field(args)
    F = parse_map(args.map, K)
    x = parse_point(args.point, K)
    emit(dumps(envelope("classify", args, classify(F, x))), args.out)
    return 0


def cmd_morse(args: argparse.Namespace) -> int:
    """Splitting lemma for a series, or the corank-1 normal form of a map at a point."""
    from morse import corank1_normal_form, morse_with_params
    from poly import parse_map, parse_point, parse_poly

    K = _field(args)
    if args.map:
        if not args.point:
            raise UsageError("--map needs --point")
        F = parse_map(args.map, K)
        report = corank1_normal_form(F, parse_point(args.point, K), args.trunc)
        result = report.to_dict()
    elif args.series:
        f = parse_poly(args.series, K)
        split = morse_with_params(f, args.params, args.trunc)
        result = {**split.to_dict(), "verified": split.verify(f)}
    else:
        raise UsageError("morse needs --series (with --params) or --map with --point")
    emit(dumps(envelope("morse", args, result)), args.out)
    return 0


def cmd_milnor(args: argparse.Namespace) -> int:
    """Milnor number and determinacy bound of a series."""
    from morse import milnor
    from poly import parse_poly

    report = milnor(parse_poly(args.series, _field(args)), args.max_trunc)
    result = report.to_dict()
    if report.certified:
        result["determinacy_bound"] = 2 * report.r
    emit(dumps(envelope("milnor", args, result)), args.out)
    return 0 if report.certified or not args.require_certified else 1


def cmd_verify(args: argparse.Namespace) -> int:
    """Run the self-checks, write the report, and gate the exit status on it."""
    from atomic import write_report
    from verify import gating_decision, print_report, run_verification

    results = run_verification(args.mode, args.seed, args.workers, only=args.only)
    failed, reasons = gating_decision(results)
    text = dumps(envelope("verify", args, {**results, "failed": failed}))
    out = Path(args.out) if args.out else REPORTS_DIR / f"verify_{args.mode}.json"
    write_report(out, text)
    if args.format == "json":
        sys.stdout.write(text)
    else:
        print_report(results)
        if failed:
            print("VERIFICATION FAILED")
            for r in reasons:
                print(f"  - {r}")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    """Subcommand parser over one set of shared flags."""
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--field", default="Q", help="Q, F<p>, F<p>^<k> or F<q> (default Q)")
    shared.add_argument("--seed", type=int, default=DEFAULT_SEED)
    shared.add_argument("--trunc", type=int, default=DEFAULT_TRUNCATION, help="truncation order N")
    shared.add_argument("--samples", type=int, default=DEFAULT_MC_SAMPLES, help="Monte-Carlo samples per field")
    shared.add_argument("--tower", default=DEFAULT_TOWER)
    shared.add_argument("--budget", type=int, default=CENSUS_BUDGET, help="max maps in one census")
    shared.add_argument("--workers", type=int, default=1)
    shared.add_argument("--out", type=Path, help="write the report here instead of stdout")
    shared.add_argument("--format", choices=("json", "csv", "text"), default="json")
    shared.add_argument("-v", "--verbose", action="count", default=0)
    shared.add_argument("--log-file", type=Path)

    parser = argparse.ArgumentParser(prog="charstrat", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codim", parents=[shared], help="closed-form codimensions")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--crit", nargs=3, type=int, metavar=("N", "R", "I"))
    g.add_argument("--second", nargs=4, type=int, metavar=("N", "R", "I", "J"))
    g.add_argument("--bad", nargs=3, type=int, metavar=("N", "R", "I"))
    g.add_argument("--delta", nargs=5, type=int, metavar=("E", "A", "F", "I", "P"))
    g.add_argument("--box", nargs=3, type=int, metavar=("E", "F", "I"))
    g.add_argument("--first", nargs=3, type=int, metavar=("E", "A", "F"))
    g.add_argument("--grid", action="store_true")
    p.add_argument("--sym", default="sym")
    p.add_argument("--char", type=int, help="characteristic (default: that of --field)")
    p.add_argument("--max-dim", type=int, default=4)
    p.set_defaults(func=cmd_codim)

    p = sub.add_parser("minimize", parents=[shared], help="closed-form vs brute-force minimum of C")
    for name in ("--e", "--a", "--f"):
        p.add_argument(name, type=int, required=True)
    p.add_argument("--sign", default="plus")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("census", parents=[shared], help="exhaustive stratum census")
    for name in ("--e", "--a", "--f"):
        p.add_argument(name, type=int, required=True)
    p.add_argument("--sym", default="sym")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("mc", parents=[shared], help="Monte-Carlo codimension estimate")
    for name in ("--e", "--a", "--f", "--i", "--p"):
        p.add_argument(name, type=int)
    p.add_argument("--sym", default="sym")
    p.add_argument("--crit", nargs=3, type=int, metavar=("N", "R", "I"))
    p.add_argument("--singular", type=int, metavar="K")
    p.add_argument("--tolerance", type=float, default=MC_TOLERANCE)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("classify", parents=[shared], help="pointwise singularity classification")
    p.add_argument("--map", required=True, help='components separated by ";"')
    p.add_argument("--point", required=True, help="comma-separated coordinates")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("morse", parents=[shared], help="Morse splitting / corank-1 normal form")
    p.add_argument("--series")
    p.add_argument("--params", type=int, default=0)
    p.add_argument("--map")
    p.add_argument("--point")
    p.set_defaults(func=cmd_morse)

    p = sub.add_parser("milnor", parents=[shared], help="Milnor number and determinacy bound")
    p.add_argument("--series", required=True)
    p.add_argument("--max-trunc", type=int, default=MILNOR_MAX_TRUNC)
    p.add_argument("--require-certified", action="store_true",
                   help="exit 1 when finiteness is not certified")
    p.set_defaults(func=cmd_milnor)

    p = sub.add_parser("verify", parents=[shared], help="run the acceptance battery")
    p.add_argument("--mode", choices=("quick", "full"), default="quick")
    p.add_argument("--only", nargs="*", help="run only these checks")
    p.set_defaults(func=cmd_verify, format="text")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns 2 on usage errors, 1 on other failures."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    setup_logging(args.verbose, args.log_file)
    try:
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except CharstratError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


run_cli = main

__all__ = ["main", "run_cli", "build_parser", "setup_logging", "envelope", "RunConfig"]


if __name__ == "__main__":
    raise SystemExit(main())
