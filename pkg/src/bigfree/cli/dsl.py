"""Text syntax for transfinite words.

Grammar (whitespace and ``# comments`` are ignored)::

    word     := item*
    item     := letter | product | "inv" "(" word ")" | "(" word ")"
    letter   := ("T" | "E") "(" expr "," expr ")"
    product  := "prod" NAME "=" bound "to" bound "{" letter* "}"
    bound    := ["-"] ( INT | "inf" )
    expr     := term (("+" | "-") term)*
    term     := ["-"] factor ("*" factor)*
    factor   := INT | NAME | "(" expr ")"

Products with one infinite bound are rays (``0 to inf`` is omega, ``inf to 0``
is omega*), ``-inf to inf`` is zeta, and finite bounds are expanded in the
stated direction.  Expressions must be affine in the product variable.  For
``E`` letters a negative value denotes the inverse generator, so inside a
product each argument must keep one sign over the whole range.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..words import (
    Affine,
    Explicit,
    LetterTemplate,
    Order,
    Pattern,
    Segment,
    TransfiniteWord,
    concat,
    invert,
    E,
    T,
)


class DSLError(ValueError):
    """Syntax or semantic error with a source location."""

    def __init__(self, message: str, line: int, col: int, token: str = ""):
        where = f"line {line}, column {col}"
        if token:
            where += f" near {token!r}"
        super().__init__(f"{message} ({where})")
        self.line = line
        self.col = col
        self.token = token


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"\s+|#[^\n]*|(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<sym>[(){},=+\-*])")


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DSLError("unexpected character", line, pos - line_start + 1, text[pos])
        chunk = m.group(0)
        kind = m.lastgroup
        if kind is not None:
            toks.append(_Tok(kind, chunk, line, pos - line_start + 1))
        for i, ch in enumerate(chunk):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


_KEYWORDS = {"T", "E", "prod", "inv", "to", "inf"}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.var: str | None = None

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: _Tok | None = None) -> DSLError:
        tok = tok or self.tok
        return DSLError(message, tok.line, tok.col, tok.text)

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> _Tok:
        tok = self.tok
        if not self.accept(text):
            raise self.error(f"expected {text!r}")
        return tok

    # -- words -------------------------------------------------------------

    def parse_word(self, stop: set[str]) -> TransfiniteWord:
        parts: list[TransfiniteWord] = []
        while self.tok.kind != "eof" and self.tok.text not in stop:
            parts.append(self.parse_item())
        return concat(*parts) if parts else TransfiniteWord(())

    def parse_item(self) -> TransfiniteWord:
        tok = self.tok
        if tok.text in ("T", "E"):
            letter = self.parse_letter_constant()
            return TransfiniteWord((Explicit((letter,)),))
        if tok.text == "prod":
            return self.parse_product()
        if tok.text == "inv":
            self.i += 1
            self.expect("(")
            inner = self.parse_word({")"})
            self.expect(")")
            return invert(inner)
        if tok.text == "(":
            self.i += 1
            inner = self.parse_word({")"})
            self.expect(")")
            return inner
        raise self.error("expected a letter, 'prod', 'inv' or '('")

    def parse_letter_args(self) -> tuple[str, Affine, Affine, _Tok]:
        head = self.tok
        kind = head.text
        self.i += 1
        self.expect("(")
        first = self.parse_expr()
        self.expect(",")
        second = self.parse_expr()
        self.expect(")")
        return kind, first, second, head

    def parse_letter_constant(self):
        kind, first, second, head = self.parse_letter_args()
        if not (first.is_constant and second.is_constant):
            raise self.error("letter outside a product must have integer arguments", head)
        try:
            return T(first.offset, second.offset) if kind == "T" else E(first.offset, second.offset)
        except ValueError as exc:
            raise self.error(str(exc), head) from None

    def parse_bound(self) -> int | float:
        negative = self.accept("-")
        tok = self.tok
        if self.accept("inf"):
            return float("-inf") if negative else float("inf")
        if tok.kind == "int":
            self.i += 1
            return -int(tok.text) if negative else int(tok.text)
        raise self.error("expected an integer or 'inf'")

    def parse_product(self) -> TransfiniteWord:
        start_tok = self.expect("prod")
        var_tok = self.tok
        if var_tok.kind != "name" or var_tok.text in _KEYWORDS:
            raise self.error("expected a product variable name")
        if self.var is not None:
            raise self.error("nested products are not supported")
        self.i += 1
        self.expect("=")
        lo = self.parse_bound()
        self.expect("to")
        hi = self.parse_bound()
        self.expect("{")
        self.var = var_tok.text
        raw: list[tuple[str, Affine, Affine, _Tok]] = []
        try:
            while not self.accept("}"):
                if self.tok.text not in ("T", "E"):
                    raise self.error("a product body holds letters only")
                raw.append(self.parse_letter_args())
        finally:
            self.var = None
        if not raw:
            raise self.error("empty product body", start_tok)
        return _build_product(self, raw, lo, hi, start_tok)

    # -- affine expressions ------------------------------------------------

    def parse_expr(self) -> Affine:
        value = self.parse_term()
        while self.tok.text in ("+", "-"):
            op = self.tok.text
            self.i += 1
            rhs = self.parse_term()
            value = Affine(value.coeff + rhs.coeff, value.offset + rhs.offset) if op == "+" else Affine(
                value.coeff - rhs.coeff, value.offset - rhs.offset)
        return value

    def parse_term(self) -> Affine:
        negative = self.accept("-")
        value = self.parse_factor()
        while self.tok.text == "*":
            star = self.tok
            self.i += 1
            rhs = self.parse_factor()
            if value.is_constant:
                value = Affine(value.offset * rhs.coeff, value.offset * rhs.offset)
            elif rhs.is_constant:
                value = Affine(value.coeff * rhs.offset, value.offset * rhs.offset)
            else:
                raise self.error("expression is not affine in the product variable", star)
        return value.negated() if negative else value

    def parse_factor(self) -> Affine:
        tok = self.tok
        if tok.kind == "int":
            self.i += 1
            return Affine(0, int(tok.text))
        if tok.kind == "name" and tok.text not in _KEYWORDS:
            if tok.text != self.var:
                raise self.error(f"unknown variable {tok.text!r}")
            self.i += 1
            return Affine(1, 0)
        if self.accept("("):
            value = self.parse_expr()
            self.expect(")")
            return value
        raise self.error("expected a number, the product variable or '('")


def _build_product(parser: _Parser, raw, lo, hi, start_tok: _Tok) -> TransfiniteWord:
    inf = float("inf")
    finite = lo not in (inf, -inf) and hi not in (inf, -inf)
    if finite:
        step = 1 if hi >= lo else -1
        letters = []
        for n in range(int(lo), int(hi) + step, step):
            for kind, first, second, tok in raw:
                try:
                    letters.append(T(first(n), second(n)) if kind == "T" else E(first(n), second(n)))
                except ValueError as exc:
                    raise parser.error(f"{exc} at n={n}", tok) from None
        return TransfiniteWord((Explicit(tuple(letters)),))
    # reindex so that the product runs over n >= start (rays) or all of Z
    if (lo, hi) == (-inf, inf):
        order, subst, start = Order.ZETA, (1, 0), 0
    elif (lo, hi) == (inf, -inf):
        order, subst, start = Order.ZETA, (-1, 0), 0
    elif hi == inf and lo != -inf:
        order, subst, start = Order.OMEGA, (1, 0), int(lo)
    elif lo == inf and hi != -inf:
        order, subst, start = Order.OMEGA_STAR, (1, 0), int(hi)
    elif lo == -inf and hi != inf:
        order, subst, start = Order.OMEGA_STAR, (-1, 0), -int(hi)
    elif hi == -inf and lo != inf:
        order, subst, start = Order.OMEGA, (-1, 0), -int(lo)
    else:
        raise parser.error("product bounds must describe a ray or all integers", start_tok)
    block = []
    for kind, first, second, tok in raw:
        first = first.compose(*subst)
        second = second.compose(*subst)
        if kind == "T":
            block.append(LetterTemplate("T", first, second))
            continue
        f_map, f_sign = _signed(first, order, start, parser, tok)
        s_map, s_sign = _signed(second, order, start, parser, tok)
        try:
            block.append(LetterTemplate("E", f_map, s_map, f_sign, s_sign))
        except ValueError as exc:
            raise parser.error(str(exc), tok) from None
    try:
        segment: Segment = Pattern(order, tuple(block), start)
    except ValueError as exc:
        raise parser.error(str(exc), start_tok) from None
    return TransfiniteWord((segment,))


def _signed(amap: Affine, order: Order, start: int, parser: _Parser, tok: _Tok) -> tuple[Affine, int]:
    """Split a signed generator expression into its index map and fixed sign."""
    if order is Order.ZETA:
        if amap.coeff != 0:
            raise parser.error("generator subscripts over all integers change sign", tok)
        value = amap.offset
    else:
        value = amap(start)
        if amap.coeff * value < 0 or value == 0:
            raise parser.error(f"generator subscript {format_affine(amap)} changes sign or vanishes on the range", tok)
    sign = 1 if value > 0 else -1
    return (amap if sign > 0 else amap.negated()), sign


def parse_word(text: str) -> TransfiniteWord:
    """Parse the word syntax; raises :class:`DSLError` with a location on failure."""
    parser = _Parser(text)
    result = parser.parse_word(set())
    if parser.tok.kind != "eof":
        raise parser.error("unexpected token")
    return result


# ---------------------------------------------------------------------------
# Printing


def format_affine(amap: Affine, var: str = "n") -> str:
    c, d = amap
    if c == 0:
        return str(d)
    head = var if c == 1 else f"-{var}" if c == -1 else f"{c}*{var}"
    if d == 0:
        return head
    return f"{head}+{d}" if d > 0 else f"{head}-{-d}"


def _format_signed(amap: Affine, sign: int) -> str:
    text = format_affine(amap)
    if sign > 0:
        return text
    return f"-({text})" if amap.coeff else str(-amap.offset)


def _format_template(t: LetterTemplate) -> str:
    if t.kind == "T":
        return f"T({format_affine(t.first)}, {format_affine(t.second)})"
    return f"E({_format_signed(t.first, t.first_sign)}, {_format_signed(t.second, t.second_sign)})"


def format_segment(seg: Segment) -> str:
    if isinstance(seg, Explicit):
        return " ".join(repr(l) for l in seg.letters)
    body = " ".join(_format_template(t) for t in seg.block)
    if seg.order is Order.OMEGA:
        bounds = f"{seg.start} to inf"
    elif seg.order is Order.OMEGA_STAR:
        bounds = f"inf to {seg.start}"
    else:
        bounds = "-inf to inf"
    return f"prod n = {bounds} {{ {body} }}"


def format_word(w: TransfiniteWord) -> str:
    """Text form accepted by :func:`parse_word`; the empty word prints as ``""``."""
    return " ".join(format_segment(s) for s in w.segments)
