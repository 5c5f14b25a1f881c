"""Command-line interface: ``kbosat prove|corpus|export|decode``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from .proof import SoundnessError, proof_json, render
from .prover import ERROR, EXIT_CODES, ConfigError, RunConfig, corpus, export, import_model, prove
from .terms import ArityError, ParseError, load


def _add_config(p: argparse.ArgumentParser):
    p.add_argument("--engine", choices=("sat", "pbc"), default="pbc")
    p.add_argument("--bits", type=int, default=None, metavar="K",
                   help="weight bits (default 4 for TRSs, 7 for SRSs)")
    p.add_argument("--precedence", choices=("strict", "quasi"), default="quasi")
    p.add_argument("--minimize", choices=("none", "weights", "precedence"), default="none")
    p.add_argument("--timeout", type=float, default=10.0, metavar="SECS",
                   help="wall-clock limit per problem; 0 disables it")
    p.add_argument("--format", choices=("text", "json"), default="text")


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kbosat", description="Knuth-Bendix order termination prover")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prove", help="prove one .trs/.srs file")
    p.add_argument("file")
    _add_config(p)
    p.add_argument("--emit-dimacs", metavar="PATH")
    p.add_argument("--emit-opb", metavar="PATH")
    p.add_argument("-v", "--verbose", action="store_true", help="report the minimizer trace")

    p = sub.add_parser("corpus", help="prove every problem in a directory")
    p.add_argument("directory")
    _add_config(p)

    p = sub.add_parser("export", help="write the encoding without solving")
    p.add_argument("file")
    _add_config(p)
    p.add_argument("--emit-dimacs", metavar="PATH")
    p.add_argument("--emit-opb", metavar="PATH")

    p = sub.add_parser("decode", help="verify a model an external solver found for an export")
    p.add_argument("file")
    p.add_argument("model", help="model file: DIMACS 'v' lines or OPB literals")
    _add_config(p)
    return ap


def _config(args) -> RunConfig:
    return RunConfig(
        engine=args.engine, bits=args.bits, mode=args.precedence, minimize=args.minimize,
        timeout=args.timeout or None, format=args.format,
        emit_dimacs=getattr(args, "emit_dimacs", None), emit_opb=getattr(args, "emit_opb", None),
    )


def _error(msg: str) -> int:
    print(f"ERROR  ({msg})", file=sys.stdout)
    return EXIT_CODES[ERROR]


def main(argv: Optional[List[str]] = None) -> int:
    args = parser().parse_args(argv)
    try:
        cfg = _config(args)
    except ConfigError as exc:
        return _error(str(exc))

    if args.command == "prove":
        res = prove(args.file, cfg)
        if cfg.format == "json":
            out = res.as_json()
            if args.verbose:
                out["trace"] = res.trace
            print(json.dumps(out, indent=2, sort_keys=True))
        else:
            sys.stdout.write(res.text())
            if args.verbose and res.trace:
                print("objective trace: " + " ".join(map(str, res.trace)), file=sys.stderr)
        return res.exit_code

    if args.command == "corpus":
        if not Path(args.directory).is_dir():
            return _error(f"not a directory: {args.directory}")
        report = corpus(args.directory, cfg)
        if cfg.format == "json":
            print(json.dumps(report.as_json(), indent=2, sort_keys=True))
        else:
            sys.stdout.write(report.text())
        return 0

    try:
        trs = load(args.file)
    except (OSError, ParseError, ArityError) as exc:
        return _error(str(exc))

    if args.command == "export":
        if not (cfg.emit_dimacs or cfg.emit_opb):
            return _error("export needs --emit-dimacs or --emit-opb")
        try:
            export(trs, cfg)
        except OSError as exc:
            return _error(str(exc))
        return 0

    # decode
    try:
        proof = import_model(trs, cfg, Path(args.model).read_text())
    except (OSError, ValueError, SoundnessError) as exc:
        return _error(str(exc))
    if cfg.format == "json":
        print(json.dumps(proof_json(proof), indent=2, sort_keys=True))
    else:
        sys.stdout.write("YES\n" + render(proof, trs, minimal=True))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
