"""Transfinite words: finite lists of explicit runs and affine pattern runs.

A word is a map from a countable linear order into an alphabet of letters in
which every letter occurs finitely often.  The orders we can describe are
finite concatenations of finite runs and of runs indexed by ``n`` ranging
over a ray (order type omega or omega*) or over all integers (order type
zeta).  Inside a pattern run each letter is a template whose subscripts are
affine functions of ``n``.

Positions are triples ``(segment, m, k)`` compared lexicographically.  For an
explicit run ``m`` is the letter index and ``k`` is 0.  For a pattern run
``k`` is the index inside the repeated block and ``m`` is the *order
coordinate*: ``m = n`` for omega and zeta runs and ``m = -n`` for omega*
runs, so that positions always increase with ``m``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

Position = tuple[int, int, int]


class Affine(NamedTuple):
    """The map ``n -> coeff * n + offset``."""

    coeff: int
    offset: int

    def __call__(self, n: int) -> int:
        return self.coeff * n + self.offset

    @property
    def is_constant(self) -> bool:
        return self.coeff == 0

    def compose(self, coeff: int, offset: int) -> "Affine":
        """The map ``n -> self(coeff * n + offset)``."""
        return Affine(self.coeff * coeff, self.coeff * offset + self.offset)

    def negated(self) -> "Affine":
        return Affine(-self.coeff, -self.offset)

    def solve(self, value: int) -> int | None:
        """The unique integer ``n`` with ``self(n) == value``, if any.

        Constant maps have no unique solution; callers handle them first.
        """
        if self.coeff == 0:
            raise ValueError("constant map has no unique solution")
        q, r = divmod(value - self.offset, self.coeff)
        return q if r == 0 else None


@dataclass(frozen=True, order=True, slots=True)
class Transposition:
    """The letter ``T(a, b)``; its inverse is ``T(b, a)``."""

    a: int
    b: int

    kind = "T"

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValueError(f"transposition letter needs distinct points, got T({self.a},{self.b})")

    def inverse(self) -> "Transposition":
        return Transposition(self.b, self.a)

    @property
    def points(self) -> tuple[int, int]:
        return (self.a, self.b)

    def __repr__(self) -> str:
        return f"T({self.a},{self.b})"


@dataclass(frozen=True, order=True, slots=True)
class NielsenLetter:
    """The letter ``E(head, tail)``: the automorphism ``head -> head*tail``.

    Generators are signed integers: ``k`` is ``x_k`` and ``-k`` is its inverse.
    The inverse letter is ``E(head, -tail)``.
    """

    head: int
    tail: int

    kind = "E"

    def __post_init__(self) -> None:
        if self.head == 0 or self.tail == 0:
            raise ValueError("generator indices must be nonzero")
        if abs(self.head) == abs(self.tail):
            raise ValueError(f"tail must differ from head and its inverse, got E({self.head},{self.tail})")

    def inverse(self) -> "NielsenLetter":
        return NielsenLetter(self.head, -self.tail)

    def __repr__(self) -> str:
        return f"E({self.head},{self.tail})"


Letter = Union[Transposition, NielsenLetter]


def T(a: int, b: int) -> Transposition:
    return Transposition(a, b)


def E(head: int, tail: int) -> NielsenLetter:
    return NielsenLetter(head, tail)


@dataclass(frozen=True)
class LetterTemplate:
    """A letter whose two subscripts are affine in the pattern variable.

    For ``kind == "T"`` the maps give the two points.  For ``kind == "E"``
    they give the head and tail *indices*, and the signs are fixed.
    """

    kind: str
    first: Affine
    second: Affine
    first_sign: int = 1
    second_sign: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("T", "E"):
            raise ValueError(f"unknown letter kind {self.kind!r}")
        object.__setattr__(self, "first", Affine(*self.first))
        object.__setattr__(self, "second", Affine(*self.second))
        if self.kind == "T" and (self.first_sign, self.second_sign) != (1, 1):
            raise ValueError("transposition templates carry no signs")
        if self.first_sign not in (1, -1) or self.second_sign not in (1, -1):
            raise ValueError("signs must be +1 or -1")

    def at(self, n: int) -> Letter:
        if self.kind == "T":
            return Transposition(self.first(n), self.second(n))
        return NielsenLetter(self.first_sign * self.first(n), self.second_sign * self.second(n))

    @property
    def is_constant(self) -> bool:
        return self.first.is_constant and self.second.is_constant

    @property
    def maps(self) -> tuple[Affine, Affine]:
        return (self.first, self.second)

    def inverse(self) -> "LetterTemplate":
        if self.kind == "T":
            return LetterTemplate("T", self.second, self.first)
        return LetterTemplate("E", self.first, self.second, self.first_sign, -self.second_sign)

    def substitute(self, coeff: int, offset: int) -> "LetterTemplate":
        """Replace ``n`` by ``coeff * n + offset``."""
        return LetterTemplate(
            self.kind,
            self.first.compose(coeff, offset),
            self.second.compose(coeff, offset),
            self.first_sign,
            self.second_sign,
        )

    def matches(self, letter: Letter) -> set[int] | None:
        """Values of ``n`` at which this template produces ``letter``.

        Returns ``None`` when every ``n`` does (constant template), otherwise a
        set with at most one element.
        """
        if letter.kind != self.kind:
            return set()
        if self.kind == "T":
            targets = (letter.a, letter.b)
        else:
            if (self.first_sign, self.second_sign) != (_sign(letter.head), _sign(letter.tail)):
                return set()
            targets = (abs(letter.head), abs(letter.tail))
        solution: int | None = None
        for amap, target in zip(self.maps, targets):
            if amap.is_constant:
                if amap.offset != target:
                    return set()
                continue
            n = amap.solve(target)
            if n is None or (solution is not None and n != solution):
                return set()
            solution = n
        if solution is None:
            return None
        return {solution}


def _sign(v: int) -> int:
    return 1 if v > 0 else -1


class Order(enum.Enum):
    OMEGA = "omega"
    OMEGA_STAR = "omega*"
    ZETA = "zeta"


@dataclass(frozen=True)
class Explicit:
    letters: tuple[Letter, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "letters", tuple(self.letters))


@dataclass(frozen=True)
class MView:
    """A pattern seen in order coordinates: templates in ``m``, domain ``[lo, hi]``.

    ``None`` stands for an infinite end.
    """

    block: tuple[LetterTemplate, ...]
    lo: int | None
    hi: int | None

    def contains(self, m: int) -> bool:
        return (self.lo is None or m >= self.lo) and (self.hi is None or m <= self.hi)


@dataclass(frozen=True)
class Pattern:
    """Block of letter templates repeated over ``n`` in the given order type.

    omega: ``n = start, start+1, ...`` left to right.  omega*: the same set of
    ``n`` with the largest leftmost.  zeta: all integers ascending (``start``
    is ignored and normalised to 0).
    """

    order: Order
    block: tuple[LetterTemplate, ...]
    start: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "block", tuple(self.block))
        if not self.block:
            raise ValueError("pattern block must be nonempty")
        if self.order is Order.ZETA and self.start != 0:
            object.__setattr__(self, "start", 0)
        kinds = {t.kind for t in self.block}
        if len(kinds) != 1:
            raise ValueError("pattern block mixes alphabets")
        for t in self.block:
            _validate_template(t, self.order, self.start)

    @property
    def kind(self) -> str:
        return self.block[0].kind

    def in_domain(self, n: int) -> bool:
        return self.order is Order.ZETA or n >= self.start

    def m_of(self, n: int) -> int:
        return -n if self.order is Order.OMEGA_STAR else n

    def n_of(self, m: int) -> int:
        return -m if self.order is Order.OMEGA_STAR else m

    @cached_property
    def mview(self) -> MView:
        if self.order is Order.OMEGA:
            return MView(self.block, self.start, None)
        if self.order is Order.OMEGA_STAR:
            return MView(tuple(t.substitute(-1, 0) for t in self.block), None, -self.start)
        return MView(self.block, None, None)

    def letter_at(self, n: int, k: int) -> Letter:
        return self.block[k].at(n)

    def window(self, depth: int) -> list[tuple[int, int, Letter]]:
        """The ``depth`` rows nearest to the finite end, as ``(n, k, letter)``.

        For omega and omega* this is ``n = start .. start+depth-1``; for zeta it
        is ``n`` in ``[-depth//2, depth - depth//2)``.  Rows are listed in
        position order.
        """
        if self.order is Order.ZETA:
            ns = list(range(-(depth // 2), depth - depth // 2))
        else:
            ns = list(range(self.start, self.start + depth))
            if self.order is Order.OMEGA_STAR:
                ns.reverse()
        return [(n, k, t.at(n)) for n in ns for k, t in enumerate(self.block)]


def _validate_template(t: LetterTemplate, order: Order, start: int) -> None:
    if t.is_constant:
        raise ValueError(f"constant pattern template {t} repeats one letter infinitely often")
    # Differences of the two subscripts must never vanish on the domain.
    diff = Affine(t.first.coeff - t.second.coeff, t.first.offset - t.second.offset)
    if t.kind == "E":
        for amap in t.maps:
            if order is Order.ZETA:
                if not amap.is_constant or amap.offset < 1:
                    raise ValueError("generator indices in a zeta pattern must be constant and positive")
            elif amap.coeff < 0 or amap(start) < 1:
                raise ValueError(f"generator index map {amap} leaves the positive integers")
    _check_nonvanishing(diff, order, start, t)


def _check_nonvanishing(diff: Affine, order: Order, start: int, t: LetterTemplate) -> None:
    if diff.is_constant:
        if diff.offset == 0:
            raise ValueError(f"template {t} has equal subscripts")
        return
    root = diff.solve(0)
    if root is not None and (order is Order.ZETA or root >= start):
        raise ValueError(f"template {t} has equal subscripts at n={root}")


Segment = Union[Explicit, Pattern]


def _segment_kind(seg: Segment) -> str | None:
    if isinstance(seg, Pattern):
        return seg.kind
    return seg.letters[0].kind if seg.letters else None


@dataclass(frozen=True, eq=False)
class TransfiniteWord:
    """A finite list of segments over a single alphabet."""

    segments: tuple[Segment, ...] = ()

    def __post_init__(self) -> None:
        segs = tuple(s for s in self.segments if not (isinstance(s, Explicit) and not s.letters))
        object.__setattr__(self, "segments", segs)
        kinds = {_segment_kind(s) for s in segs} - {None}
        if len(kinds) > 1:
            raise ValueError("word mixes transposition and Nielsen letters")
        for s in segs:
            if isinstance(s, Explicit) and len({l.kind for l in s.letters}) > 1:
                raise ValueError("word mixes transposition and Nielsen letters")

    @property
    def alphabet(self) -> str | None:
        for s in self.segments:
            return _segment_kind(s)
        return None

    @property
    def is_finite(self) -> bool:
        return all(isinstance(s, Explicit) for s in self.segments)

    @property
    def is_empty(self) -> bool:
        return not self.segments

    def letters(self) -> tuple[Letter, ...]:
        if not self.is_finite:
            raise ValueError("word is infinite")
        return tuple(l for s in self.segments for l in s.letters)

    def letter_at(self, pos: Position) -> Letter:
        s, m, k = pos
        seg = self.segments[s]
        if isinstance(seg, Explicit):
            return seg.letters[m]
        if not seg.mview.contains(m):
            raise IndexError(f"position {pos} outside pattern domain")
        return seg.mview.block[k].at(m)

    def has_position(self, pos: Position) -> bool:
        s, m, k = pos
        if not 0 <= s < len(self.segments):
            return False
        seg = self.segments[s]
        if isinstance(seg, Explicit):
            return 0 <= m < len(seg.letters) and k == 0
        return seg.mview.contains(m) and 0 <= k < len(seg.block)

    def __mul__(self, other: "TransfiniteWord") -> "TransfiniteWord":
        return concat(self, other)

    def inverse(self) -> "TransfiniteWord":
        return invert(self)

    def _key(self) -> tuple:
        return normalize(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransfiniteWord):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        from .cli.dsl import format_word

        return f"TransfiniteWord({format_word(self)!r})"


EMPTY = TransfiniteWord(())


def word(*letters: Letter) -> TransfiniteWord:
    """A finite word from letters."""
    return TransfiniteWord((Explicit(tuple(letters)),))


def pattern_word(order: Order, block: Sequence[LetterTemplate], start: int = 0) -> TransfiniteWord:
    return TransfiniteWord((Pattern(order, tuple(block), start),))


def concat(*words: TransfiniteWord) -> TransfiniteWord:
    """Concatenation; occurrence counts add, so finiteness is preserved."""
    kinds = {w.alphabet for w in words} - {None}
    if len(kinds) > 1:
        raise ValueError("cannot concatenate words over different alphabets")
    return TransfiniteWord(tuple(s for w in words for s in w.segments))


def _invert_segment(seg: Segment) -> Segment:
    if isinstance(seg, Explicit):
        return Explicit(tuple(l.inverse() for l in reversed(seg.letters)))
    block = tuple(t.inverse() for t in reversed(seg.block))
    if seg.order is Order.OMEGA:
        return Pattern(Order.OMEGA_STAR, block, seg.start)
    if seg.order is Order.OMEGA_STAR:
        return Pattern(Order.OMEGA, block, seg.start)
    return Pattern(Order.ZETA, tuple(t.substitute(-1, 0) for t in block))


def invert(w: TransfiniteWord) -> TransfiniteWord:
    """The formal inverse: reverse the order and invert every letter."""
    return TransfiniteWord(tuple(_invert_segment(s) for s in reversed(w.segments)))


def mirror_position(w: TransfiniteWord, pos: Position) -> Position:
    """The position of ``invert(w)`` holding the inverse of the letter at ``pos``."""
    s, m, k = pos
    seg = w.segments[s]
    s2 = len(w.segments) - 1 - s
    if isinstance(seg, Explicit):
        return (s2, len(seg.letters) - 1 - m, 0)
    return (s2, -m, len(seg.block) - 1 - k)


def normalize(w: TransfiniteWord) -> tuple:
    """Structural key: merged explicit runs, rays started at 0, zeta phase fixed."""
    out: list = []
    for seg in w.segments:
        if isinstance(seg, Explicit):
            if out and out[-1][0] == "X":
                out[-1] = ("X", out[-1][1] + seg.letters)
            else:
                out.append(("X", seg.letters))
            continue
        if seg.order is Order.ZETA:
            shift = _zeta_phase(seg.block)
            block = tuple(t.substitute(1, shift) for t in seg.block)
        else:
            block = tuple(t.substitute(1, seg.start) for t in seg.block)
        out.append((seg.order.value, block))
    return tuple(out)


def _zeta_phase(block: Sequence[LetterTemplate]) -> int:
    for t in block:
        for amap in t.maps:
            c = amap.coeff
            if c > 0:
                return -(amap.offset // c)
            if c < 0:
                return amap.offset // (-c)
    return 0


# ---------------------------------------------------------------------------
# Interval restriction


def _rows_to_segments(seg: Pattern, m_lo: int | None, m_hi: int | None) -> list[Segment]:
    """Full rows ``m_lo <= m <= m_hi`` of a pattern (clipped to its domain)."""
    view = seg.mview
    lo = view.lo if m_lo is None else (m_lo if view.lo is None else max(m_lo, view.lo))
    hi = view.hi if m_hi is None else (m_hi if view.hi is None else min(m_hi, view.hi))
    if lo is not None and hi is not None:
        if lo > hi:
            return []
        return [Explicit(tuple(t.at(m) for m in range(lo, hi + 1) for t in view.block))]
    if lo is not None:
        # ascending ray m >= lo; in this case the pattern is omega or zeta, m = n
        return [Pattern(Order.OMEGA, seg.block, lo)]
    if hi is not None:
        if seg.order is Order.OMEGA_STAR:
            return [Pattern(Order.OMEGA_STAR, seg.block, -hi)]
        # zeta restricted to n <= hi, re-indexed by n' = -n
        return [Pattern(Order.OMEGA_STAR, tuple(t.substitute(-1, 0) for t in seg.block), -hi)]
    return [seg]


def _row_part(seg: Pattern, m: int, k_lo: int, k_hi: int) -> list[Segment]:
    view = seg.mview
    if not view.contains(m) or k_lo > k_hi:
        return []
    return [Explicit(tuple(view.block[k].at(m) for k in range(k_lo, k_hi + 1)))]


def _pattern_slice(seg: Pattern, lo: tuple[int, int] | None, hi: tuple[int, int] | None) -> list[Segment]:
    """Positions ``(m, k)`` of a pattern with ``lo <= (m, k) <= hi``."""
    width = len(seg.block)
    if lo is not None and hi is not None and lo > hi:
        return []
    if lo is not None and hi is not None and lo[0] == hi[0]:
        return _row_part(seg, lo[0], lo[1], hi[1])
    out: list[Segment] = []
    m_lo = None
    if lo is not None:
        if lo[1] == 0:
            m_lo = lo[0]
        else:
            out += _row_part(seg, lo[0], lo[1], width - 1)
            m_lo = lo[0] + 1
    tail: list[Segment] = []
    m_hi = None
    if hi is not None:
        if hi[1] == width - 1:
            m_hi = hi[0]
        else:
            tail = _row_part(seg, hi[0], 0, hi[1])
            m_hi = hi[0] - 1
    if m_lo is None or m_hi is None or m_lo <= m_hi:
        out += _rows_to_segments(seg, m_lo, m_hi)
    return out + tail


def restrict(w: TransfiniteWord, lo: Position | None = None, hi: Position | None = None) -> TransfiniteWord:
    """The subword on the closed interval ``[lo, hi]`` of positions."""
    out: list[Segment] = []
    for s, seg in enumerate(w.segments):
        if lo is not None and s < lo[0] or hi is not None and s > hi[0]:
            continue
        seg_lo = (lo[1], lo[2]) if lo is not None and s == lo[0] else None
        seg_hi = (hi[1], hi[2]) if hi is not None and s == hi[0] else None
        if isinstance(seg, Explicit):
            a = seg_lo[0] if seg_lo else 0
            b = seg_hi[0] if seg_hi else len(seg.letters) - 1
            out.append(Explicit(seg.letters[max(a, 0): b + 1]))
        else:
            out += _pattern_slice(seg, seg_lo, seg_hi)
    return TransfiniteWord(tuple(out))


def restrict_open(w: TransfiniteWord, after: Position | None = None, before: Position | None = None) -> TransfiniteWord:
    """The subword strictly between ``after`` and ``before``."""
    if after is not None and before is not None and after >= before:
        return EMPTY
    out: list[Segment] = []
    for s, seg in enumerate(w.segments):
        if after is not None and s < after[0] or before is not None and s > before[0]:
            continue
        lo = _inner_successor(seg, after) if after is not None and s == after[0] else None
        hi = _inner_predecessor(seg, before) if before is not None and s == before[0] else None
        if lo == "none" or hi == "none":
            continue
        if isinstance(seg, Explicit):
            a = lo[0] if lo else 0
            b = hi[0] if hi else len(seg.letters) - 1
            out.append(Explicit(seg.letters[a: b + 1]))
        else:
            out += _pattern_slice(seg, lo, hi)
    return TransfiniteWord(tuple(out))


def _inner_successor(seg: Segment, pos: Position):
    """Successor of ``pos`` inside its own segment as ``(m, k)``, or ``"none"``."""
    _, m, k = pos
    if isinstance(seg, Explicit):
        return (m + 1, 0) if m + 1 < len(seg.letters) else "none"
    if k + 1 < len(seg.block):
        return (m, k + 1)
    return (m + 1, 0) if seg.mview.contains(m + 1) else "none"


def _inner_predecessor(seg: Segment, pos: Position):
    _, m, k = pos
    if isinstance(seg, Explicit):
        return (m - 1, 0) if m > 0 else "none"
    if k > 0:
        return (m, k - 1)
    return (m - 1, len(seg.block) - 1) if seg.mview.contains(m - 1) else "none"


def first_position(w: TransfiniteWord, seg_index: int) -> Position | None:
    seg = w.segments[seg_index]
    if isinstance(seg, Explicit):
        return (seg_index, 0, 0) if seg.letters else None
    lo = seg.mview.lo
    return None if lo is None else (seg_index, lo, 0)


def last_position(w: TransfiniteWord, seg_index: int) -> Position | None:
    seg = w.segments[seg_index]
    if isinstance(seg, Explicit):
        return (seg_index, len(seg.letters) - 1, 0) if seg.letters else None
    hi = seg.mview.hi
    return None if hi is None else (seg_index, hi, len(seg.block) - 1)


def successor_position(w: TransfiniteWord, pos: Position) -> Position | None:
    """Immediate successor, or ``None`` when there is none (end or limit)."""
    s, m, k = pos
    seg = w.segments[s]
    if isinstance(seg, Explicit):
        if m + 1 < len(seg.letters):
            return (s, m + 1, 0)
    else:
        if k + 1 < len(seg.block):
            return (s, m, k + 1)
        if seg.mview.contains(m + 1):
            return (s, m + 1, 0)
    if s + 1 < len(w.segments):
        return first_position(w, s + 1)
    return None


def predecessor_position(w: TransfiniteWord, pos: Position) -> Position | None:
    s, m, k = pos
    seg = w.segments[s]
    if isinstance(seg, Explicit):
        if m > 0:
            return (s, m - 1, 0)
    else:
        if k > 0:
            return (s, m, k - 1)
        if seg.mview.contains(m - 1):
            return (s, m - 1, len(seg.block) - 1)
    if s > 0:
        return last_position(w, s - 1)
    return None


def split_at(w: TransfiniteWord, pos: Position) -> tuple[TransfiniteWord, Letter, TransfiniteWord]:
    """``(prefix, letter, suffix)`` around a position."""
    return restrict_open(w, None, pos), w.letter_at(pos), restrict_open(w, pos, None)


# ---------------------------------------------------------------------------
# Projection and free reduction


def occurrences(w: TransfiniteWord, letter: Letter) -> list[Position]:
    """All positions holding ``letter`` (a finite list)."""
    out: list[Position] = []
    for s, seg in enumerate(w.segments):
        if isinstance(seg, Explicit):
            out += [(s, i, 0) for i, l in enumerate(seg.letters) if l == letter]
            continue
        view = seg.mview
        for k, t in enumerate(view.block):
            sol = t.matches(letter)
            if sol is None:
                raise AssertionError("constant templates are rejected at construction")
            out += [(s, m, k) for m in sol if view.contains(m)]
    return sorted(out)


def project_to_subalphabet(w: TransfiniteWord, alphabet: Iterable[Letter]) -> tuple[Letter, ...]:
    """The finite subword of letters lying in ``alphabet`` (which must be closed under inversion)."""
    letters = set(alphabet)
    if any(l.inverse() not in letters for l in letters):
        raise ValueError("sub-alphabet must be closed under inversion")
    positions = sorted(p for l in letters for p in occurrences(w, l))
    return tuple(w.letter_at(p) for p in positions)


def reduce_finite(letters: Iterable[Letter]) -> tuple[Letter, ...]:
    """Free reduction of a finite letter sequence."""
    stack: list[Letter] = []
    for l in letters:
        if stack and stack[-1] == l.inverse():
            stack.pop()
        else:
            stack.append(l)
    return tuple(stack)


# ---------------------------------------------------------------------------
# Cancellation


@dataclass(frozen=True)
class MirrorBlock:
    """Pairs the segments ``[left, middle)`` with ``[middle, right)`` by reflection.

    Requires ``segments[middle:right]`` to be exactly the inverse of
    ``segments[left:middle]``; the position ``p`` in the left half is paired
    with its reflection in the right half.
    """

    left: int
    middle: int
    right: int


@dataclass(frozen=True)
class CancellationPairing:
    """An involution on a set of positions: finitely many explicit pairs plus mirror blocks."""

    pairs: Mapping[Position, Position] = field(default_factory=dict)
    mirrors: tuple[MirrorBlock, ...] = ()

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[Position, Position]], mirrors: Iterable[MirrorBlock] = ()) -> "CancellationPairing":
        table: dict[Position, Position] = {}
        for a, b in pairs:
            table[a] = b
            table[b] = a
        return CancellationPairing(table, tuple(mirrors))


def cancel_check(f: TransfiniteWord, g: TransfiniteWord, pairing: CancellationPairing) -> bool:
    """Whether ``g`` is obtained from ``f`` by cancelling the paired positions."""
    pairs = dict(pairing.pairs)
    for a, b in pairs.items():
        if not f.has_position(a) or not f.has_position(b):
            raise ValueError(f"pairing references a position outside the word: {a} or {b}")
    mirror_segments: dict[int, MirrorBlock] = {}
    for block in pairing.mirrors:
        if not 0 <= block.left < block.middle < block.right <= len(f.segments):
            raise ValueError(f"mirror block {block} outside the word")
        left = TransfiniteWord(f.segments[block.left:block.middle])
        right_segs = f.segments[block.middle:block.right]
        if invert(left).segments != right_segs:
            return False
        for s in range(block.left, block.right):
            if s in mirror_segments:
                return False
            mirror_segments[s] = block
    if any(p[0] in mirror_segments for p in pairs):
        return False
    # condition (1): partners carry inverse letters; the map is an involution without fixed points
    for a, b in pairs.items():
        if a == b or pairs.get(b) != a:
            return False
        if f.letter_at(b) != f.letter_at(a).inverse():
            return False
    # conditions (2) and (3) for the explicit pairs
    for a, b in pairs.items():
        if a < b and not _interval_closed(f, a, b, pairs, mirror_segments):
            return False
    # g must be f with the paired positions removed
    return _remove(f, set(pairs), set(mirror_segments)) == g


def _interval_closed(f: TransfiniteWord, a: Position, b: Position,
                     pairs: Mapping[Position, Position], mirrors: Mapping[int, MirrorBlock]) -> bool:
    for s in range(a[0], b[0] + 1):
        if s in mirrors:
            block = mirrors[s]
            if not (a[0] < block.left and block.right - 1 < b[0]):
                return False
            continue
        seg = f.segments[s]
        lo = (a[1], a[2]) if s == a[0] else None
        hi = (b[1], b[2]) if s == b[0] else None
        for m, k in _finite_span(seg, lo, hi):
            p = (s, m, k)
            partner = pairs.get(p)
            if partner is None or not a <= partner <= b:
                return False
    return True


def _finite_span(seg: Segment, lo: tuple[int, int] | None, hi: tuple[int, int] | None) -> Iterator[tuple[int, int]]:
    if isinstance(seg, Explicit):
        start = lo[0] if lo else 0
        stop = hi[0] if hi else len(seg.letters) - 1
        for i in range(start, stop + 1):
            yield (i, 0)
        return
    view = seg.mview
    m_lo = lo[0] if lo else view.lo
    m_hi = hi[0] if hi else view.hi
    if m_lo is None or m_hi is None:
        # an infinite stretch of a pattern that no mirror block covers
        yield (10**18, 10**18)  # sentinel: never a paired position
        return
    for m in range(m_lo, m_hi + 1):
        for k in range(len(seg.block)):
            if lo and (m, k) < lo or hi and (m, k) > hi:
                continue
            yield (m, k)


def _remove(f: TransfiniteWord, positions: set[Position], segments: set[int]) -> TransfiniteWord:
    out: list[Segment] = []
    by_segment: dict[int, list[Position]] = {}
    for p in positions:
        by_segment.setdefault(p[0], []).append(p)
    for s, seg in enumerate(f.segments):
        if s in segments:
            continue
        gone = by_segment.get(s)
        if not gone:
            out.append(seg)
            continue
        if isinstance(seg, Explicit):
            drop = {p[1] for p in gone}
            out.append(Explicit(tuple(l for i, l in enumerate(seg.letters) if i not in drop)))
            continue
        ms = [p[1] for p in gone]
        lo, hi = min(ms), max(ms)
        drop_mk = {(p[1], p[2]) for p in gone}
        out += _rows_to_segments(seg, None, lo - 1) if seg.mview.lo is None or lo - 1 >= seg.mview.lo else []
        middle = tuple(seg.mview.block[k].at(m) for m in range(lo, hi + 1)
                       for k in range(len(seg.block)) if (m, k) not in drop_mk)
        out.append(Explicit(middle))
        out += _rows_to_segments(seg, hi + 1, None) if seg.mview.hi is None or hi + 1 <= seg.mview.hi else []
    return TransfiniteWord(tuple(out))


# ---------------------------------------------------------------------------
# Infinite products


@dataclass(frozen=True)
class PatternFamily:
    """The family of finite words ``factor(n)`` for ``n >= start``, each given by a block of templates."""

    block: tuple[LetterTemplate, ...]
    start: int = 0

    def factor(self, n: int) -> TransfiniteWord:
        return word(*(t.at(n) for t in self.block))


def template_level(t: LetterTemplate) -> Affine:
    """Head index map of a Nielsen template: the filtration level contributed by it."""
    if t.kind != "E":
        raise ValueError("filtration levels are defined for Nielsen letters")
    return t.first


def infinite_product(factors: Sequence[TransfiniteWord] | PatternFamily) -> TransfiniteWord:
    """Ordered product of finitely many words or of an omega-indexed family.

    For a family the levels must escape to infinity: every letter's head index
    (for Nielsen letters) or its point set (for transpositions) must vary with
    ``n``; otherwise some level holds infinitely many factors.
    """
    if isinstance(factors, PatternFamily):
        for t in factors.block:
            if t.kind == "E" and t.first.coeff <= 0:
                raise ValueError(f"family is not admissible: head of {t} does not grow, level stuck at {t.first(factors.start)}")
            if t.kind == "T" and t.is_constant:
                raise ValueError("family repeats a letter infinitely often")
        return TransfiniteWord((Pattern(Order.OMEGA, factors.block, factors.start),))
    return concat(*factors)
