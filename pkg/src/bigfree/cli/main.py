"""The ``bigfree`` command line.

Exit status: 0 success or Verified, 1 Refuted or false, 2 Unknown or budget
exhausted, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Callable, Sequence

from ..aut.admissible import PsiEvaluator, closure_check, kernel_check, s_check
from ..aut.automorphism import FinSuppAutomorphism
from ..aut.decompose import decompose_automorphism
from ..aut.relators import gersten_relators, kills
from ..aut.rewriting import factor_ra
from ..freegroup import FreeWord, nielsen_reduce
from ..presentations import Presentation, emit
from ..sym import eval_p, membership_s, membership_s_prime, sigma_relators
from ..verdict import BudgetExceeded, Status, Verdict
from ..words import NielsenLetter, Transposition, TransfiniteWord, project_to_subalphabet, reduce_finite
from .dsl import DSLError, format_word, parse_word

SCHEMA = 1
DEFAULT_BUDGET = 10_000
EXIT = {Status.VERIFIED: 0, Status.REFUTED: 1, Status.UNKNOWN: 2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(3, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# Input helpers


def parse_range(text: str) -> list[int]:
    """``a..b`` (inclusive) or a comma-separated list."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            a, b = int(lo), int(hi)
            if a > b:
                raise UsageError(f"empty range {text!r}")
            return list(range(a, b + 1))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse range {text!r}; use a..b or a,b,c") from None


def parse_tuple(text: str) -> list[FreeWord]:
    """``[x1 x2, x2^-1]``: entries separated by commas or semicolons."""
    body = text.strip()
    if body.startswith("[") and body.endswith("]"):
        body = body[1:-1]
    parts = [p for p in body.replace(";", ",").split(",")]
    try:
        return [FreeWord.parse(p) for p in parts]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def read_word(args: argparse.Namespace) -> TransfiniteWord:
    if args.word_file:
        with open(args.word_file, encoding="utf-8") as fh:
            text = fh.read()
    elif args.word is not None:
        text = args.word
    else:
        raise UsageError("give a word or --word-file")
    return parse_word(text)


def nielsen_input(args: argparse.Namespace) -> TransfiniteWord:
    w = read_word(args)
    if w.alphabet not in (None, "E"):
        raise UsageError("expected a word over Nielsen letters E(a,b)")
    return w


def budget_of(args: argparse.Namespace) -> int:
    if args.budget is not None:
        return args.budget
    env = os.environ.get("BIGFREE_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"BIGFREE_BUDGET={env!r} is not an integer") from None
    return DEFAULT_BUDGET


def verdict_json(v: Verdict) -> dict[str, Any]:
    return {"status": v.status.value, "detail": v.detail,
            "witness": None if v.witness is None else str(v.witness), "budget_used": v.budget_used}


def verdict_text(label: str, v: Verdict) -> str:
    line = f"{label}: {v.status.value}"
    if v.detail:
        line += f" ({v.detail})"
    if v.witness is not None:
        line += f"\n  witness: {v.witness}"
    return line


class Output:
    def __init__(self, as_json: bool, verb: str):
        self.as_json = as_json
        self.data: dict[str, Any] = {"schema": SCHEMA, "verb": verb}
        self.lines: list[str] = []

    def add(self, text: str | None = None, **fields: Any) -> None:
        if text is not None:
            self.lines.append(text)
        self.data.update(fields)

    def flush(self) -> None:
        text = json.dumps(self.data, indent=2) if self.as_json else "\n".join(self.lines)
        try:
            print(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader closed early (e.g. piped into head)
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())


# ---------------------------------------------------------------------------
# Verbs


def cmd_check_sigma(args, out: Output) -> int:
    w = read_word(args)
    if w.alphabet not in (None, "T"):
        raise UsageError("expected a word over transpositions T(a,b)")
    points = parse_range(args.points) if args.points else []
    budget = budget_of(args)
    checks = {"S": membership_s, "S'": membership_s_prime}
    wanted = ["S", "S'"] if args.set == "both" else [args.set]
    worst = 0
    for name in wanted:
        v = checks[name](w, points, budget)
        out.add(verdict_text(name, v), **{name: verdict_json(v)})
        worst = max(worst, EXIT[v.status])
    return worst


def cmd_check_aut(args, out: Output) -> int:
    w = nielsen_input(args)
    budget = budget_of(args)
    v = s_check(w, budget)
    out.add(verdict_text("S", v), S=verdict_json(v))
    code = EXIT[v.status]
    if args.dual:
        d = closure_check(w, parse_range(args.gens), budget)
        out.add(verdict_text("closures", d), closures=verdict_json(d))
    return code


def cmd_eval_perm(args, out: Output) -> int:
    w = read_word(args)
    if w.alphabet not in (None, "T"):
        raise UsageError("expected a word over transpositions T(a,b)")
    p = eval_p(w, budget_of(args))
    table = p.table(parse_range(args.points))
    width = max(len(str(k)) for k in table)
    out.add("\n".join(f"{k:>{width}} -> {v}" for k, v in table.items()),
            table={str(k): v for k, v in table.items()})
    return 0


def cmd_eval_aut(args, out: Output) -> int:
    w = nielsen_input(args)
    psi = PsiEvaluator(w, budget_of(args))
    images = {k: psi.image(k) for k in parse_range(args.gens)}
    out.add("\n".join(f"x{k} -> {v}" for k, v in images.items()),
            images={f"x{k}": str(v) for k, v in images.items()})
    return 0


def cmd_reduce_tuple(args, out: Output) -> int:
    entries = parse_tuple(args.tuple)
    reduced, moves = nielsen_reduce(entries, budget_of(args))
    out.add("reduced: [" + ", ".join(map(str, reduced)) + "]",
            reduced=[str(v) for v in reduced])
    out.add("moves: " + (" ".join(map(str, moves)) or "none"), moves=[str(m) for m in moves])
    return 0


def cmd_decompose(args, out: Output) -> int:
    alpha = FinSuppAutomorphism.from_tuple(parse_tuple(args.images))
    d = decompose_automorphism(alpha, args.target)
    sigma = ", ".join(f"x{k} -> x{abs(s)}{'^-1' if s < 0 else ''}" for k, s in d.sigma.mapping.items()) or "id"
    out.add(f"sigma: {sigma}", sigma={str(k): s for k, s in d.sigma.mapping.items()})
    out.add("letters: " + (" ".join(map(repr, d.letters)) or "none"), letters=[repr(l) for l in d.letters])
    out.add(f"roundtrip verified on x1..x{max(alpha.rank, args.target or 0)}")
    return 0


def cmd_factor_ra(args, out: Output) -> int:
    w = nielsen_input(args)
    budget = budget_of(args)
    v = s_check(w, budget)
    if not v.verified:
        out.add(verdict_text("S", v), S=verdict_json(v))
        return EXIT[v.status]
    fac = factor_ra(w, args.depth, budget=budget)
    rows = []
    for s in fac.stages:
        flags = {name: getattr(s, name) for name in
                 ("splitf", "level_drop", "relator_level", "relator_kernel", "alpha_level", "chain_monotone")}
        rows.append({"stage": s.stage, "level": s.level, "n_plus": s.n_plus, **flags})
        marks = " ".join(f"{k}={'ok' if val else 'FAIL'}" for k, val in flags.items())
        out.add(f"stage {s.stage}: level {s.level}, n+ {s.n_plus}, alpha {fac.alphas[s.stage - 1]!r}: {marks}")
    out.add(f"residual: {format_word(fac.residual) or '(empty)'}", stages=rows,
            alphas=[repr(a) for a in fac.alphas], residual=format_word(fac.residual), ok=fac.ok)
    return 0 if fac.ok else 1


def cmd_kernel_check(args, out: Output) -> int:
    w = nielsen_input(args)
    gens = parse_range(args.gens)
    n = max(gens)
    ok = kernel_check(w, n, budget_of(args))
    out.add(f"kernel on x1..x{n}: {'true' if ok else 'false'}", kernel=ok, n=n)
    return 0 if ok else 1


def cmd_emit(args, out: Output) -> int:
    p = emit(args.group, args.n, args.k)
    data = p.to_json()
    text = json.dumps(data, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        out.add(f"wrote {len(p.relators)} relators on {len(p.generators)} generators to {args.out}",
                path=args.out, counts=p.counts)
    elif out.as_json:
        out.data.update(presentation=data)
    else:
        out.add(text)
    return 0


def cmd_verify(args, out: Output) -> int:
    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            p = Presentation.from_json(json.load(fh))
    elif args.group:
        p = emit(args.group, args.n, args.k)
    else:
        raise UsageError("give a presentation file or --group/--n")
    report = p.verify()
    if report.ok:
        out.add(f"all {report.total} relators verified", verified=report.total, counts=p.counts)
        return 0
    out.add(f"{len(report.failed)} of {report.total} relators do not act trivially",
            failed=[{"family": r.family, "word": r.tokens()} for r in report.failed],
            foreign=[{"family": r.family, "word": r.tokens()} for r in report.foreign],
            moving_generators=list(report.moving_generators))
    for r in report.failed[:10]:
        out.add(f"  {r.family}: {' '.join(r.tokens())}")
    if report.foreign:
        out.add(f"{len(report.foreign)} relators use unlisted generators")
    if report.moving_generators:
        out.add("generators moving x1..xk: " + ", ".join(report.moving_generators))
    return 1


def cmd_project(args, out: Output) -> int:
    w = read_word(args)
    idx = parse_range(args.indices)
    if w.alphabet == "T":
        alphabet = [Transposition(a, b) for a in idx for b in idx if a != b]
    else:
        signed = [s for k in idx for s in (k, -k)]
        alphabet = [NielsenLetter(a, b) for a in signed for b in signed if abs(a) != abs(b)]
    raw = project_to_subalphabet(w, alphabet)
    red = reduce_finite(raw)
    out.add("projection: " + (" ".join(map(repr, raw)) or "(empty)"), projection=[repr(l) for l in raw])
    out.add("reduced: " + (" ".join(map(repr, red)) or "(empty)"), reduced=[repr(l) for l in red])
    return 0


def cmd_relators(args, out: Output) -> int:
    if args.family == "sigma":
        points = parse_range(args.points or "-3..3")
        probe = parse_range(args.check or "-10..10")
        rels = sigma_relators(points)
        bad = [r for r in rels if any(eval_p(r.word)(p) != p for p in probe)]
        label = f"points {points[0]}..{points[-1]}"
        listing = [(r.family, format_word(r.word)) for r in rels]
    else:
        if args.n is None:
            raise UsageError("--n is required for Gersten relators")
        rels = gersten_relators(args.n)
        bad = [r for r in rels if not kills(r, args.n)]
        label = f"rank {args.n}"
        listing = [(r.family, " ".join(repr(g) + ("^-1" if e < 0 else "") for g, e in r.word)) for r in rels]
    if args.list:
        out.add("\n".join(f"{f}: {w}" for f, w in listing))
    out.add(f"{len(rels) - len(bad)} of {len(rels)} relators act trivially ({label})",
            total=len(rels), failed=len(bad),
            relators=[{"family": f, "word": w} for f, w in listing] if args.list else None)
    return 0 if not bad else 1


# ---------------------------------------------------------------------------
# Parser


def _word_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("word", nargs="?", help="word in the DSL, e.g. 'prod n = 1 to inf { E(n, n+1) }'")
    p.add_argument("--word-file", help="read the word from a UTF-8 file")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--budget", type=int, help="step budget (default: $BIGFREE_BUDGET or 10000)")
    parser = _Parser(prog="bigfree", description="Transfinite words, infinite Nielsen products and presentations.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name: str, fn: Callable, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(fn=fn)
        return p

    p = verb("check-sigma-admissible", cmd_check_sigma, "admissibility of a transposition word")
    _word_args(p)
    p.add_argument("--set", choices=["S", "S'", "both"], default="S")
    p.add_argument("--points", help="extra points to trace, a..b")

    p = verb("check-aut-admissible", cmd_check_aut, "admissibility of a Nielsen word")
    _word_args(p)
    p.add_argument("--dual", action="store_true", help="also run the support-closure route")
    p.add_argument("--gens", default="1..10", help="generators probed by --dual")

    p = verb("eval-perm", cmd_eval_perm, "the permutation of a transposition word")
    _word_args(p)
    p.add_argument("--points", required=True, help="points a..b")

    p = verb("eval-aut", cmd_eval_aut, "the automorphism of a Nielsen word")
    _word_args(p)
    p.add_argument("--gens", required=True, help="generators 1..N")

    p = verb("reduce-tuple", cmd_reduce_tuple, "Nielsen-reduce a tuple of free words")
    p.add_argument("tuple", help="e.g. '[x1 x2, x2]'")

    p = verb("decompose-aut", cmd_decompose, "write an automorphism as a monomial map and letters")
    p.add_argument("images", help="images of x1..xn, e.g. '[x1 x2, x2]'")
    p.add_argument("--target", type=int, help="check the roundtrip on x1..x_target")

    p = verb("factor-ra", cmd_factor_ra, "iterate derived forms, checking every stage")
    _word_args(p)
    p.add_argument("--depth", type=int, default=5)

    p = verb("kernel-check", cmd_kernel_check, "whether a Nielsen word fixes x1..xN")
    _word_args(p)
    p.add_argument("--gens", required=True, help="generators 1..N")

    for name, fn, help_text in (("emit-presentation", cmd_emit, "emit a presentation as JSON"),
                                ("verify-presentation", cmd_verify, "verify every relator of a presentation")):
        p = verb(name, fn, help_text)
        if name == "verify-presentation":
            p.add_argument("file", nargs="?", help="presentation JSON from emit-presentation")
            p.add_argument("--group", choices=["SAut", "Aut", "McCool", "StabSAut", "StabAut"])
        else:
            p.add_argument("--group", choices=["SAut", "Aut", "McCool", "StabSAut", "StabAut"], required=True)
            p.add_argument("--out", help="write the JSON to a file")
        p.add_argument("--n", type=int, default=3)
        p.add_argument("--k", type=int)

    p = verb("project", cmd_project, "project a word to the letters over some indices")
    _word_args(p)
    p.add_argument("--indices", required=True, help="indices or points a..b")

    for name in ("relators", "verify-sigma-relators"):
        p = verb(name, cmd_relators, "list and verify relator families")
        p.add_argument("--family", choices=["sigma", "gersten"], default="sigma" if name != "relators" else "gersten")
        p.add_argument("--points", help="points for transposition relators, a..b (default -3..3)")
        p.add_argument("--check", help="points checked to be fixed (default -10..10)")
        p.add_argument("--n", type=int, help="rank for Gersten relators")
        p.add_argument("--list", action="store_true", help="print every relator")
    return parser


_RANGE_OPTIONS = {"--points", "--gens", "--indices", "--check"}


def _join_negative_ranges(argv: Sequence[str]) -> list[str]:
    """Rewrite ``--points -5..5`` as ``--points=-5..5`` so argparse accepts it."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _RANGE_OPTIONS and i + 1 < len(argv) and argv[i + 1][:2].lstrip("-").isdigit() \
                and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_join_negative_ranges(sys.argv[1:] if argv is None else list(argv)))
    except SystemExit as exc:
        # argparse exits on --help (0) and on usage errors (3)
        return int(exc.code or 0)
    out = Output(args.json, args.verb)
    try:
        code = args.fn(args, out)
    except (UsageError, DSLError) as exc:
        print(f"bigfree {args.verb}: {exc}", file=sys.stderr)
        return 3
    except BudgetExceeded as exc:
        out.add(f"Unknown: {exc}", status="Unknown", error=str(exc))
        out.flush()
        return 2
    except (ValueError, OSError) as exc:
        print(f"bigfree {args.verb}: {exc}", file=sys.stderr)
        return 3
    out.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
