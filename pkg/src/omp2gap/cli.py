"""Command-line entry point: translate, verify, corpus."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .codegen import TranslateOptions, translate_source
from .diagnostics import DiagnosticError
from .harness import (
    DEFAULT_TOLERANCE,
    cmd_corpus,
    cmd_verify,
    default_corpus_dir,
    default_shim_dir,
    render_corpus_table,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="omp2gap",
        description="Translate OpenMP-annotated C to GAP8-SDK-style cluster code",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("translate", help="translate one C file")
    t.add_argument("input")
    t.add_argument("-o", "--output-dir", default="output", metavar="DIR")
    t.add_argument("--cores", type=int, default=8,
                   help="team size when no num_threads clause is given (1..8)")
    t.add_argument("--serial-fallback", action="store_true",
                   help="keep unsupported constructs sequential instead of failing")
    t.add_argument("--emit-l1", action="store_true",
                   help="allocate shared records with L1_Malloc/L1_Free")
    t.add_argument("--strict-paper-paths", action="store_true",
                   help="require the output directory to exist instead of creating it")

    v = sub.add_parser("verify", help="differentially verify one program")
    v.add_argument("input")
    v.add_argument("--mode", choices=["ordered", "unordered", "threads"], default="ordered")
    v.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    v.add_argument("--shim-dir", type=Path, default=None)

    c = sub.add_parser("corpus", help="translate and verify the benchmark corpus")
    c.add_argument("--dir", type=Path, default=None)
    c.add_argument("--shim-dir", type=Path, default=None)
    return parser


def _run_translate(args: argparse.Namespace) -> int:
    path = Path(args.input)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"{args.input}:1: error: cannot read input: {exc}", file=sys.stderr)
        return 1
    if args.cores < 1 or args.cores > 8:
        print(f"{args.input}:1: error: --cores must be in 1..8", file=sys.stderr)
        return 2
    options = TranslateOptions(
        outdir=args.output_dir,
        cores=args.cores,
        serial_fallback=args.serial_fallback,
        emit_l1=args.emit_l1,
        strict_paper_paths=args.strict_paper_paths,
    )
    try:
        emitted, diags = translate_source(text, str(path), options)
    except DiagnosticError as exc:
        print(exc.diagnostic.render(str(path)), file=sys.stderr)
        return exc.exit_code
    for d in diags:
        print(d.render(str(path)), file=sys.stderr)
    if emitted is None:
        return 2
    print(f"wrote {emitted.path}")
    return 0


def _run_verify(args: argparse.Namespace) -> int:
    report = cmd_verify(
        args.input, mode=args.mode, tolerance=args.tol,
        shim_dir=args.shim_dir or default_shim_dir(),
    )
    print(report.render())
    return 0 if report.verdict == "PASS" else 1


def _run_corpus(args: argparse.Namespace) -> int:
    rows, code = cmd_corpus(
        corpus_dir=args.dir or default_corpus_dir(),
        shim_dir=args.shim_dir or default_shim_dir(),
    )
    print(render_corpus_table(rows))
    return code


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "translate":
            return _run_translate(args)
        if args.command == "verify":
            return _run_verify(args)
        return _run_corpus(args)
    except DiagnosticError as exc:
        print(exc.diagnostic.render("omp2gap"), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"omp2gap: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
