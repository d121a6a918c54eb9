"""Command-line entry point.

JSON goes to stdout (or ``--out``), a short human summary to stderr.
Exit status: 0 pass, 1 verification or oracle failure, 2 input error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Any, Callable

from . import __version__, report
from .aggregator import DEFAULT_BOUND
from .encoder import encode
from .errors import LoopverError
from .frontend import load
from .frontend.ir import ValidatedProgram
from .oracle import cross_validate
from .pipeline import Analysis, analyze

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

_COLORS = {"ok": "32", "fail": "31", "note": "33"}


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("sizes must be non-negative integers")
    return values


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="path to a .loop file")
    common.add_argument("--out", metavar="PATH", help="write the JSON report here instead of stdout")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", help="compact JSON (default)")
    fmt.add_argument("--pretty", dest="pretty", action="store_true", help="indented JSON")
    common.set_defaults(pretty=False)
    common.add_argument("--assume-bound", type=_nonneg, default=DEFAULT_BOUND, metavar="INT",
                        help="largest size checked concretely when the footprint is not symbolic")

    parser = argparse.ArgumentParser(prog="loopver", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"loopver {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="check the iteration contract and classify the loop")
    sub.add_parser("classify", parents=[common], help="like verify, without the footprint")
    sub.add_parser("encode", parents=[common], help="write proof obligations to <input>.obl")
    orc = sub.add_parser("oracle", parents=[common], help="cross-validate the verdict by execution")
    orc.add_argument("--n", type=_int_list, default=[1, 2, 4, 8], metavar="LIST", help="sizes, e.g. 1,2,4,8")
    orc.add_argument("--trials", type=_positive, default=50, help="schedules sampled per (size, seed)")
    orc.add_argument("--seed", type=int, default=0, help="first input seed")
    orc.add_argument("--num-seeds", type=_positive, default=3, help="consecutive seeds starting at --seed")
    return parser


class _Console:
    def __init__(self) -> None:
        env = os.environ.get("LOOPVER_COLOR")
        self.color = env == "1" if env in ("0", "1") else sys.stderr.isatty()

    def say(self, text: str, tone: str | None = None) -> None:
        if self.color and tone:
            text = f"\033[{_COLORS[tone]}m{text}\033[0m"
        print(text, file=sys.stderr)


def _load(path: str) -> ValidatedProgram:
    return load(Path(path).read_text(encoding="utf-8"))


def _emit(doc: dict[str, Any], args: argparse.Namespace) -> None:
    text = report.dumps(doc, args.pretty)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _analysis_doc(doc: dict[str, Any], a: Analysis, full: bool) -> None:
    p = a.program
    doc["status"] = "pass" if a.passed else "fail"
    doc["check"] = report.check(a.check, p.size_param, p.iter_var)
    doc["balance"] = report.balance(a.balance, with_footprint=full)
    doc["verdict"] = report.verdict(a.verdict)


def _summary(con: _Console, path: str, a: Analysis) -> None:
    if a.passed:
        con.say(f"{path}: verified, {a.verdict.kind} (pragma {a.verdict.suggested_pragma})", "ok")
        if not a.balance.preserving:
            con.say(f"  note: footprint not preserved on {', '.join(a.balance.differing)}", "note")
    else:
        diag = a.verdict.diagnostic
        con.say(f"{path}: verification failed", "fail")
        if diag is not None:
            con.say(f"  {diag}")


def _verify(args: argparse.Namespace, program: ValidatedProgram, doc: dict[str, Any], con: _Console) -> int:
    a = analyze(program, args.assume_bound)
    _analysis_doc(doc, a, full=args.command == "verify")
    _summary(con, args.input, a)
    return EXIT_OK if a.passed else EXIT_FAIL


def _encode(args: argparse.Namespace, program: ValidatedProgram, doc: dict[str, Any], con: _Console) -> int:
    target = Path(args.input).with_suffix(".obl")
    target.write_text(encode(program).render(), encoding="utf-8")
    doc["status"] = "pass"
    doc["encoded"] = str(target)
    con.say(f"{args.input}: obligations written to {target}", "ok")
    return EXIT_OK


def _oracle(args: argparse.Namespace, program: ValidatedProgram, doc: dict[str, Any], con: _Console) -> int:
    a = analyze(program, args.assume_bound)
    seeds = list(range(args.seed, args.seed + args.num_seeds))
    r = cross_validate(program, args.n, seeds, args.trials, verdict=a.verdict)
    doc["status"] = "pass" if r.ok else "fail"
    doc["verdict"] = report.verdict(a.verdict)
    doc["oracle"] = report.oracle(r)
    races = sum(len(x.equivalence.races) for x in r.runs if x.equivalence is not None)
    line = (f"{args.input}: verdict {r.verdict}, {len(r.observed)} dependence class(es) observed, "
            f"{'agree' if r.agree else 'DISAGREE'}, {races} race(s)")
    con.say(line, "ok" if r.ok else "fail")
    return EXIT_OK if r.ok else EXIT_FAIL


_COMMANDS: dict[str, Callable[..., int]] = {
    "verify": _verify, "classify": _verify, "encode": _encode, "oracle": _oracle,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    con = _Console()
    doc = report.base(args.command, args.input)
    try:
        program = _load(args.input)
    except (LoopverError, OSError) as exc:
        doc["status"] = "error"
        doc["error"] = report.input_error(exc)
        _emit(doc, args)
        con.say(f"{args.input}: {doc['error']['code']}: {doc['error']['message']}", "fail")
        return EXIT_INPUT
    code = _COMMANDS[args.command](args, program, doc, con)
    _emit(doc, args)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
