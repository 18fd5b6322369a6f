"""Command-line front end.

Subcommands::

    lealba classify SIG INPUT
    lealba run SIG INPUT [--trace] [--simplify] [--strategy guided|search]
    lealba translate SIG INPUT [--frames rs|tirs] [--simplify]
    lealba check SIG INPUT [--model FILE ...]

``SIG`` is a signature file or a bundled name (``lml``, ``dml``, ``lambek``,
``lg``, with or without ``.sig``).  ``INPUT`` is an inequality, a file with
one inequality per line, or ``-`` for standard input.

Exit codes: 0 when a verdict was produced, 1 when ALBA fails, 2 for parse,
arity or signature errors, 3 for invalid models.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import alba, fol, gentree, oracle
from .gentree import TooManyVariables
from .oracle import ModelError
from .signature import SignatureError, load_signature
from .syntax import (
    Inequality,
    ParseError,
    QuasiInequality,
    is_pure,
    parse_inequality,
    parse_lines,
    parse_quasi,
    print_inequality,
    print_quasi,
)

EXIT_OK, EXIT_FAILURE, EXIT_INPUT, EXIT_MODEL = 0, 1, 2, 3


class InputError(ValueError):
    """Invalid command-line input; maps to exit code 2."""


def _read_inputs(arg: str) -> list[str]:
    if arg == "-":
        return parse_lines(sys.stdin.read())
    path = Path(arg)
    if path.is_file():
        return parse_lines(path.read_text())
    return [arg]


def _signature(args):
    base = load_signature(args.signature)
    if args.distributive:
        base = base.with_mode("distributive")
    return base


def _options(args) -> alba.AlbaOptions:
    eps = omega = None
    if getattr(args, "eps", None):
        try:
            eps = gentree.parse_eps(args.eps)
        except SignatureError as exc:
            raise InputError(f"--eps: {exc}") from None
    if getattr(args, "omega", None):
        if eps is None:
            raise InputError("--omega needs --eps")
        try:
            omega = gentree.parse_omega(args.omega)
        except ValueError as exc:
            raise InputError(f"--omega: {exc}") from None
    return alba.AlbaOptions(args.strategy, args.max_steps, eps, omega)


def _run_alba(ineq: Inequality, sig, args) -> alba.AlbaResult:
    try:
        return alba.run(ineq, sig, _options(args))
    except (TooManyVariables, alba.RuleError) as exc:
        raise InputError(str(exc)) from None
    except ValueError as exc:
        if isinstance(exc, (SignatureError, ParseError, InputError)):
            raise
        raise InputError(str(exc)) from None


def _outputs(result: alba.AlbaResult, sig, simplify: bool) -> list[QuasiInequality]:
    qs = result.quasis
    if simplify:
        qs = [alba.canonical_names(alba.simplify_output(q, sig)) for q in qs]
    return qs


def _format_output(q: QuasiInequality) -> str:
    if not q.premises:
        return f"m_ineq: {print_inequality(q.conclusion)}"
    return f"quasi: {print_quasi(q)}"


def _print_failure(result: alba.AlbaResult, out) -> None:
    print("FAILURE", file=out)
    for k, r in enumerate(result.runs, 1):
        if not r.success:
            print(f"stuck: SYSTEM {k} | {alba.format_system(r.initial)}", file=out)
            print(f"reason: {r.reason}", file=out)


# ---------------------------------------------------------------- subcommands


def cmd_classify(args, out) -> int:
    sig = _signature(args).expand()
    for text in _read_inputs(args.input):
        ineq = parse_inequality(text, sig, allow_extended=False)
        try:
            verdict = gentree.classify_inequality(ineq, sig)
        except TooManyVariables as exc:
            raise InputError(str(exc)) from None
        print(verdict, file=out)
    return EXIT_OK


def cmd_run(args, out) -> int:
    sig = _signature(args).expand()
    code = EXIT_OK
    for text in _read_inputs(args.input):
        ineq = parse_inequality(text, sig, allow_extended=False)
        if args.replay:
            ok, message = alba.replay_trace(Path(args.replay).read_text().splitlines(), ineq, sig)
            print(f"REPLAY: {'ok' if ok else 'failed'} ({message})", file=out)
            code = max(code, EXIT_OK if ok else EXIT_FAILURE)
            continue
        result = _run_alba(ineq, sig, args)
        if args.trace:
            for line in result.trace_lines():
                print(line, file=out)
        if not result.success:
            _print_failure(result, out)
            print("CANONICAL: no", file=out)
            code = EXIT_FAILURE
            continue
        print("SUCCESS", file=out)
        for q in _outputs(result, sig, args.simplify):
            print(_format_output(q), file=out)
        print(f"CANONICAL: {'yes' if result.canonical else 'no'}", file=out)
    return code


def cmd_translate(args, out) -> int:
    sig = _signature(args).expand()
    code = EXIT_OK
    for text in _read_inputs(args.input):
        q = parse_quasi(text, sig)
        if is_pure(q):
            qs = [q]
        else:
            if q.premises:
                raise InputError("only pure quasi-inequalities can be translated directly")
            result = _run_alba(parse_inequality(text, sig, allow_extended=False), sig, args)
            if not result.success:
                _print_failure(result, out)
                code = EXIT_FAILURE
                continue
            qs = _outputs(result, sig, args.simplify)
        for item in qs:
            sentence = fol.translate(item, sig, args.frames, args.conominal_clause)
            print(fol.format_fo(fol.canonical(sentence)) + ";", file=out)
    return code


def _bool(b: bool) -> str:
    return "true" if b else "false"


def cmd_check(args, out) -> int:
    base = _signature(args)
    sig = base.expand()
    if args.model:
        models = [oracle.load_model(p, base) for p in args.model]
    else:
        models = oracle.builtin_suite(base, args.enumerated, args.random, args.seed)
    code = EXIT_OK
    for text in _read_inputs(args.input):
        ineq = parse_inequality(text, sig, allow_extended=False)
        result = _run_alba(ineq, sig, args)
        if not result.success:
            _print_failure(result, out)
            code = EXIT_FAILURE
            continue
        agree = 0
        for k, m in enumerate(models):
            v_in = oracle.valid(ineq, m)
            v_out = all(oracle.valid_quasi(q, m) for q in result.quasis)
            agree += v_in == v_out
            name = m.name or f"model{k}"
            print(f"{name}: VALID(in)={_bool(v_in)} VALID(out)={_bool(v_out)} "
                  f"EQUIVALENT={_bool(v_in == v_out)}", file=out)
        print(f"EQUIVALENT on {agree}/{len(models)} models", file=out)
    return code


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lealba",
        description="Correspondence and canonicity for lattice expansion logics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("signature", help="signature file or bundled name")
    common.add_argument("input", help="inequality, file of inequalities, or - for stdin")
    common.add_argument("--distributive", action="store_true",
                        help="treat the lattice operations as distributive")

    engine = argparse.ArgumentParser(add_help=False)
    engine.add_argument("--max-steps", type=int, default=alba.DEFAULT_MAX_STEPS,
                        help="rule applications allowed per system")
    engine.add_argument("--strategy", choices=("guided", "search"), default="guided")
    engine.add_argument("--eps", help="order type, e.g. p:1,q:d")
    engine.add_argument("--omega", help="dependency order, e.g. q<r,p<q")

    simplify = argparse.ArgumentParser(add_help=False)
    simplify.add_argument("--simplify", action="store_true",
                          help="discharge premises and rename nominals j, i, ... and co-nominals m, n, ...")

    p = sub.add_parser("classify", parents=[common], help="Sahlqvist / inductive verdict")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("run", parents=[common, engine, simplify], help="run ALBA")
    p.add_argument("--trace", action="store_true", help="print every rule application")
    p.add_argument("--replay", metavar="TRACE", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("translate", parents=[common, engine, simplify],
                       help="first-order frame correspondents")
    p.add_argument("--frames", choices=("rs", "tirs"), default="rs")
    p.add_argument("--tirs-conominals", dest="conominal_clause", choices=fol.CONOMINAL_CLAUSES,
                   default="table", help="co-satisfaction clause for co-nominals on TiRS graphs")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("check", parents=[common, engine],
                       help="compare input and output validity on finite models")
    p.add_argument("--model", action="append", help="model file (repeatable)")
    p.add_argument("--enumerated", type=int, default=100, help="enumerated models in the built-in suite")
    p.add_argument("--random", type=int, default=100, help="random models in the built-in suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out)
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (ParseError, SignatureError, InputError, fol.FOLError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
