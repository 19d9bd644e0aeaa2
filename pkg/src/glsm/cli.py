"""Command line: ``glsm analyze``, ``glsm catalog list|show``, ``glsm search``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import catalog
from .config import parse_config, to_toml
from .errors import GLSMError, NotFound, ParseError, ValidationError
from .report import emit_report, run_analysis
from .search import search_example


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="glsm", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the pipeline on a config file or catalog entry")
    src = a.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="TOML run configuration")
    src.add_argument("--catalog", metavar="NAME", help="catalog entry to analyze")
    a.add_argument("--out", type=Path, help="write the report here instead of stdout")
    a.add_argument("--format", choices=("json", "md"), default="json")
    a.add_argument("--seed", type=int)
    a.add_argument("--points", type=int, dest="n_points")
    a.add_argument("--fd-step", type=float, dest="h_fd")
    a.add_argument("--tol", type=float, dest="tau_eq")
    a.add_argument("--theorems", help="comma-separated theorem ids, or 'all'")

    c = sub.add_parser("catalog", help="built-in examples")
    csub = c.add_subparsers(dest="action", required=True)
    csub.add_parser("list")
    show = csub.add_parser("show")
    show.add_argument("name")

    s = sub.add_parser("search", help="look for a golden example of a class")
    s.add_argument("--class", dest="cls", required=True, choices=("RadicalTransversal", "Transversal"))
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--signature", required=True, help="P,Q")
    s.add_argument("--rank", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--budget", type=int, default=100_000)
    s.add_argument("--out", type=Path, help="write the found (or closest) config here")
    return p


def _analyze(args) -> int:
    try:
        if args.config is not None:
            cfg = parse_config(args.config.read_text(encoding="utf-8"))
        else:
            cfg = catalog.entry(args.catalog).config
        cfg = cfg.with_overrides(
            seed=args.seed, n_points=args.n_points, h_fd=args.h_fd, tau_eq=args.tau_eq, theorems=args.theorems
        )
        if cfg.theorems == ():
            raise ValidationError([f"--theorems: unknown theorem id in {args.theorems!r}"])
    except (ParseError, ValidationError, OSError, KeyError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    report = run_analysis(cfg)
    text = emit_report(report, args.format)
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return report.exit_code


def _search(args) -> int:
    try:
        p, q = (int(x) for x in args.signature.split(","))
    except ValueError:
        print(f"configuration error: --signature must be P,Q, got {args.signature!r}", file=sys.stderr)
        return 2
    try:
        cfg = search_example(args.cls, args.dim, (p, q), args.rank, args.seed, args.budget)
    except ValueError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2
    except NotFound as e:
        print(f"not found: {e.note}", file=sys.stderr)
        if e.best_residual != float("inf"):
            print(f"best residual: {e.best_residual:.6e}", file=sys.stderr)
        if e.best_config and args.out:
            args.out.write_text(e.best_config, encoding="utf-8")
            print(f"closest candidate written to {args.out}", file=sys.stderr)
        return 1
    text = to_toml(cfg)
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "analyze":
            return _analyze(args)
        if args.command == "search":
            return _search(args)
        if args.action == "list":
            for name, desc in catalog.describe():
                print(f"{name:24s} {desc}")
            return 0
        try:
            sys.stdout.write(catalog.show(args.name))
        except KeyError as e:
            print(f"configuration error: {e.args[0]}", file=sys.stderr)
            return 2
        return 0
    except GLSMError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
