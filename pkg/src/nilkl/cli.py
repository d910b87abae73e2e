"""Command line interface: ``nilkl <command> ...``.

Exit codes: 0 success, 1 semantic failure (invalid structure, failed
self-test, theorem or consistency violation), 2 unreadable input,
3 ``classify-skl`` on a non-nilpotent algebra.
"""

from __future__ import annotations

import argparse
import json
import sys

from .algebra import DEFAULT_TOL, validate
from .catalog import build_family, random_two_step
from .classify import classify_skl
from .errors import NilklError, NotNilpotent, ParseError
from .report import build_report, parse_structure_file, render_json, render_text, structure_to_json

EXIT_OK, EXIT_SEMANTIC, EXIT_PARSE, EXIT_NOT_NILPOTENT = 0, 1, 2, 3


def _parse_params(text: str | None) -> dict:
    """``k=v,k=v`` with numeric values where they parse; ``variant`` stays a string."""
    params: dict = {}
    if not text:
        return params
    for item in text.split(","):
        if "=" not in item:
            raise ParseError(f"parameter {item!r} is not of the form key=value")
        key, value = (s.strip() for s in item.split("=", 1))
        if key in params:
            raise ParseError(f"parameter {key} given twice")
        if key == "variant":
            params[key] = value
            continue
        try:
            params[key] = int(value) if key == "n" else float(value)
        except ValueError:
            raise ParseError(f"parameter {key}={value!r} is not a number") from None
    return params


def _emit_structure(data, out) -> None:
    text = json.dumps(structure_to_json(data), indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_analyze(args) -> int:
    data = parse_structure_file(args.file)
    report = build_report(data, args.tol, args.seed)
    sys.stdout.write(render_json(report) if args.json else render_text(report))
    return EXIT_OK


def _cmd_validate(args) -> int:
    data = parse_structure_file(args.file, check=False)
    rep = validate(data, args.tol)
    print(f"valid={'yes' if rep.valid else 'no'} antisymmetric={'yes' if rep.antisymmetry_ok else 'no'} "
          f"jacobi={rep.jacobi_residual:.3e} real_jacobi={rep.real_jacobi_residual:.3e}")
    return EXIT_OK if rep.valid else EXIT_SEMANTIC


def _cmd_classify_skl(args) -> int:
    data = parse_structure_file(args.file)
    try:
        dec = classify_skl(data, args.tol, args.seed)
    except NotNilpotent as exc:
        print(f"not-nilpotent: {exc}", file=sys.stderr)
        return EXIT_NOT_NILPOTENT
    print(f"verdict={'yes' if dec.verdict else 'no'} stage={dec.stage}")
    for key, value in dec.residuals.items():
        print(f"  {key:<20s}{value:.3e}")
    nf = dec.normal_form
    if nf is not None:
        print(f"  r={nf.r} s={nf.s} lambdas={[float(x) for x in nf.lambdas]}")
    return EXIT_OK


def _cmd_generate(args) -> int:
    _emit_structure(build_family(args.family, _parse_params(args.params)), args.out)
    return EXIT_OK


def _cmd_random(args) -> int:
    _emit_structure(random_two_step(args.n, args.r, args.seed), args.out)
    return EXIT_OK


def _cmd_selftest(args) -> int:
    from .acceptance import run_all

    results = run_all(paper=args.paper)
    for res in results:
        print(res.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_SEMANTIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nilkl", description="Kähler-like conditions on Lie-Hermitian structures")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_tol(p):
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="decision tolerance (default 1e-8)")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized diagonalization")
        return p

    p = with_tol(sub.add_parser("analyze", help="full report for a structure file"))
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="emit the JSON report")
    p.set_defaults(func=_cmd_analyze)

    p = with_tol(sub.add_parser("validate", help="antisymmetry and Jacobi check"))
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    p = with_tol(sub.add_parser("classify-skl", help="Strominger Kähler-like test and normal form"))
    p.add_argument("file")
    p.set_defaults(func=_cmd_classify_skl)

    p = sub.add_parser("generate", help="write a named example as a structure file")
    p.add_argument("--family", required=True, help="abelian, kodaira, iwasawa or cor12")
    p.add_argument("--params", default="", help="comma separated key=value pairs")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("random", help="write a seeded two-step structure")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_random)

    p = sub.add_parser("selftest", help="run the acceptance checks")
    p.add_argument("--paper", help="path to paper.md for the formula quote check")
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NilklError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
