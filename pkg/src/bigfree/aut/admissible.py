"""Admissibility of Nielsen words and the automorphism they induce.

A word over letters ``E(h, t)`` defines an automorphism when

* every generator index occurs as a head at finitely many positions, and
* neither the word nor its inverse contains an infinite ascending chain of
  positions ``s1 < s2 < ...`` in which the head index at ``s_{i+1}`` equals the
  tail index at ``s_i``.

Deciding the chain condition.  Positions increase, so an infinite chain ends
inside one segment, and only omega runs have room for it.  Inside an omega run
with templates ``k`` (tail ``a m + b``, head ``a' m + b'``) a step from row
``m`` reaches row ``m' = (a m + b - b') / a'``.  For large ``m`` a step is only
possible when ``a >= a'``, which gives a finite graph on template indices.  No
cycle means no infinite chain.  A cycle whose steps are all integer valued can
be followed forever from any large row, which refutes the condition.  Other
cycles depend on divisibility along the orbit and are reported as unknown.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..freegroup import FreeWord, x
from ..verdict import BudgetExceeded, Verdict, refuted, unknown, verified
from ..words import (
    Affine,
    Explicit,
    NielsenLetter,
    Pattern,
    Position,
    TransfiniteWord,
    invert,
    project_to_subalphabet,
    reduce_finite,
)
from .automorphism import FinSuppAutomorphism, apply_letters

DEFAULT_BUDGET = 10_000


def _require_nielsen(w: TransfiniteWord) -> None:
    if w.alphabet not in (None, "E"):
        raise ValueError("expected a word over Nielsen letters")


class InfiniteHead(ValueError):
    """A generator index is the head of infinitely many letters."""

    def __init__(self, index: int, segment: int, template: int):
        super().__init__(f"x{index} is the head of infinitely many letters (segment {segment}, template {template})")
        self.index = index
        self.segment = segment
        self.template = template


class NielsenWord:
    """Position lookups on a Nielsen word, by head index."""

    def __init__(self, w: TransfiniteWord):
        _require_nielsen(w)
        self.word = w
        self._explicit: dict[int, list[Position]] = {}
        self._patterns: list[tuple[int, Pattern]] = []
        for s, seg in enumerate(w.segments):
            if isinstance(seg, Explicit):
                for i, letter in enumerate(seg.letters):
                    self._explicit.setdefault(abs(letter.head), []).append((s, i, 0))
            else:
                self._patterns.append((s, seg))

    def constant_heads(self) -> list[tuple[int, int, int]]:
        """``(index, segment, template)`` for every template with a constant head."""
        out = []
        for s, seg in self._patterns:
            for k, t in enumerate(seg.block):
                if t.first.is_constant:
                    out.append((t.first.offset, s, k))
        return out

    def head_positions(self, index: int) -> list[Position]:
        """All positions whose head is ``x_index`` or its inverse, sorted."""
        out = list(self._explicit.get(index, ()))
        for s, seg in self._patterns:
            view = seg.mview
            for k, t in enumerate(view.block):
                if t.first.is_constant:
                    if t.first.offset == index:
                        raise InfiniteHead(index, s, k)
                    continue
                m = t.first.solve(index)
                if m is not None and view.contains(m):
                    out.append((s, m, k))
        return sorted(out)

    def letter(self, pos: Position) -> NielsenLetter:
        return self.word.letter_at(pos)


# ---------------------------------------------------------------------------
# Membership


@dataclass(frozen=True)
class ChainWitness:
    """A prefix of an infinite ascending chain, repeatable forever along ``cycle``."""

    side: str  # "f" or "fbar"
    segment: int
    cycle: tuple[int, ...]
    positions: tuple[Position, ...]
    letters: tuple[NielsenLetter, ...]

    def __str__(self) -> str:
        chain = " -> ".join(repr(l) for l in self.letters)
        return f"infinite chain in {self.side}, segment {self.segment}: {chain} -> ..."


@dataclass(frozen=True)
class HeadWitness:
    index: int
    segment: int
    template: int

    def __str__(self) -> str:
        return f"x{self.index} is the head of every letter of template {self.template} in segment {self.segment}"


@dataclass(frozen=True)
class _Edge:
    src: int
    dst: int
    tail: Affine
    head: Affine
    integral: bool

    def step(self, m: int) -> int:
        num = self.tail(m) - self.head.offset
        return num // self.head.coeff


def _chain_edges(seg: Pattern) -> list[_Edge]:
    block = seg.mview.block
    edges = []
    for k, src in enumerate(block):
        a, b = src.second
        if a <= 0:
            continue
        for k2, dst in enumerate(block):
            a2, b2 = dst.first
            if a2 <= 0 or a < a2:
                continue
            if a == a2:
                if (b - b2) % a:
                    continue
                if ((b - b2) // a, k2) <= (0, k):
                    continue
                edges.append(_Edge(k, k2, src.second, dst.first, True))
            else:
                edges.append(_Edge(k, k2, src.second, dst.first, a % a2 == 0 and (b - b2) % a2 == 0))
    return edges


def _find_cycle(nodes: Iterable[int], edges: Sequence[_Edge]) -> list[_Edge] | None:
    out: dict[int, list[_Edge]] = {}
    for e in edges:
        out.setdefault(e.src, []).append(e)
    color: dict[int, int] = {}
    path: list[int] = []
    path_edges: list[_Edge] = []

    def visit(v: int) -> list[_Edge] | None:
        color[v] = 1
        path.append(v)
        for e in out.get(v, ()):
            if color.get(e.dst) == 1:
                return path_edges[path.index(e.dst):] + [e]
            if e.dst not in color:
                path_edges.append(e)
                found = visit(e.dst)
                if found:
                    return found
                path_edges.pop()
        color[v] = 2
        path.pop()
        return None

    for v in nodes:
        if v not in color:
            found = visit(v)
            if found:
                return found
    return None


def _s1_segment(w: TransfiniteWord, s: int, seg: Pattern, side: str) -> Verdict | None:
    edges = _chain_edges(seg)
    nodes = range(len(seg.block))
    cycle = _find_cycle(nodes, [e for e in edges if e.integral])
    if cycle is not None:
        offsets = [abs(v) for t in seg.mview.block for amap in t.maps for v in amap]
        m = max(seg.mview.lo, 0) + 2 * max(offsets) + 1
        positions: list[Position] = []
        k = cycle[0].src
        for e in cycle * 2 + cycle[:1]:
            positions.append((s, m, k))
            m, k = e.step(m), e.dst
        positions.append((s, m, k))
        letters = tuple(w.letter_at(p) for p in positions)
        return refuted(ChainWitness(side, s, tuple(e.src for e in cycle), tuple(positions), letters),
                       detail=f"S1({side})")
    if _find_cycle(nodes, edges) is not None:
        return unknown(detail=f"S1({side}): segment {s} has a chain cycle with non-integral steps")
    return None


def _s1(w: TransfiniteWord, side: str) -> Verdict | None:
    pending: Verdict | None = None
    for s, seg in enumerate(w.segments):
        if isinstance(seg, Pattern) and seg.mview.hi is None:
            v = _s1_segment(w, s, seg, side)
            if v is not None and v.refuted:
                return v
            pending = pending or v
    return pending


def s0_check(w: TransfiniteWord) -> Verdict:
    constant = NielsenWord(w).constant_heads()
    if constant:
        return refuted(HeadWitness(*constant[0]), detail="S0")
    return verified(detail="S0")


def s_check(w: TransfiniteWord, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Membership in the admissible set: S0 for ``f`` and S1 for ``f`` and its inverse.

    ``detail`` names the failing condition: ``S0``, ``S1(f)`` or ``S1(fbar)``.
    """
    v0 = s0_check(w)
    if not v0.verified:
        return v0
    forward = _s1(w, "f")
    if forward is not None and forward.refuted:
        return forward
    backward = _s1(invert(w), "fbar")
    if backward is not None and backward.refuted:
        return backward
    if forward is not None or backward is not None:
        return unknown(detail="; ".join(v.detail for v in (forward, backward) if v is not None))
    return verified(detail="S")


# ---------------------------------------------------------------------------
# Support closure and the induced automorphism


@dataclass(frozen=True)
class SupportClosure:
    """The positions ``s1 < s2 < ...`` reached from ``x_index``.

    ``added[i]`` is the tail index joined to the active set at ``positions[i]``
    (``None`` when it was already there).
    """

    index: int
    positions: tuple[Position, ...]
    letters: tuple[NielsenLetter, ...]
    added: tuple[int | None, ...]

    @property
    def n_plus(self) -> int:
        return len(self.positions)

    @property
    def indices(self) -> frozenset[int]:
        return frozenset({self.index} | {a for a in self.added if a is not None})


def support_closure(w: TransfiniteWord | NielsenWord, index: int, budget: int = DEFAULT_BUDGET) -> SupportClosure:
    """Run the closure from ``x_index``; raises :class:`BudgetExceeded` after ``budget`` steps."""
    nw = w if isinstance(w, NielsenWord) else NielsenWord(w)
    index = abs(index)
    active = {index}
    heap = list(nw.head_positions(index))
    heapq.heapify(heap)
    positions: list[Position] = []
    letters: list[NielsenLetter] = []
    added: list[int | None] = []
    while heap:
        if len(positions) >= budget:
            raise BudgetExceeded(f"support closure of x{index} exceeds {budget} steps",
                                 witness=tuple(letters[:20]), used=len(positions))
        pos = heapq.heappop(heap)
        letter = nw.letter(pos)
        positions.append(pos)
        letters.append(letter)
        t = abs(letter.tail)
        if t in active:
            added.append(None)
            continue
        active.add(t)
        added.append(t)
        for p in nw.head_positions(t):
            if p > pos:
                heapq.heappush(heap, p)
    return SupportClosure(index, tuple(positions), tuple(letters), tuple(added))


def closure_check(w: TransfiniteWord, indices: Iterable[int], budget: int = DEFAULT_BUDGET) -> Verdict:
    """Second route to admissibility: closures of ``w`` and its inverse terminate for every probed index."""
    v0 = s0_check(w)
    if not v0.verified:
        return v0
    sides = (("f", NielsenWord(w)), ("fbar", NielsenWord(invert(w))))
    used = 0
    for k in indices:
        for side, nw in sides:
            try:
                used += support_closure(nw, k, budget).n_plus
            except BudgetExceeded as exc:
                return unknown(used + exc.used, detail=f"closure of x{k} in {side} does not terminate within budget",
                               witness=exc.witness)
    return verified(used, detail="closures terminate on probed generators")


class PsiEvaluator:
    """The automorphism induced by an admissible Nielsen word, evaluated on demand."""

    def __init__(self, w: TransfiniteWord, budget: int = DEFAULT_BUDGET):
        self.word = NielsenWord(w)
        self.budget = budget
        self._cache: dict[int, FreeWord] = {}

    def closure(self, k: int) -> SupportClosure:
        return support_closure(self.word, k, self.budget)

    def image(self, k: int) -> FreeWord:
        if k not in self._cache:
            self._cache[k] = apply_letters(x(k), self.closure(k).letters)
        return self._cache[k]

    def __call__(self, v: FreeWord) -> FreeWord:
        return v.substitute(self.image)

    def restricted(self, n: int) -> FinSuppAutomorphism:
        """The images of ``x_1..x_n`` as a finite-support map (others fixed)."""
        return FinSuppAutomorphism({k: self.image(k) for k in range(1, n + 1)})


def apply_psi(w: TransfiniteWord, v: FreeWord, budget: int = DEFAULT_BUDGET) -> FreeWord:
    return PsiEvaluator(w, budget)(v)


def kernel_check(g: TransfiniteWord, n: int, budget: int = DEFAULT_BUDGET) -> bool:
    """Whether the induced automorphism fixes ``x_1..x_n``."""
    psi = PsiEvaluator(g, budget)
    return all(psi.image(k) == x(k) for k in range(1, n + 1))


# ---------------------------------------------------------------------------
# Backward chains


def longest_backward_chain(w: TransfiniteWord | NielsenWord, index: int,
                           budget: int = DEFAULT_BUDGET) -> tuple[Position, ...]:
    """A longest chain ``s1 > s2 > ...`` with head of ``s1`` at ``x_index`` and each
    head matching the previous tail index."""
    nw = w if isinstance(w, NielsenWord) else NielsenWord(w)
    best: dict[Position, tuple[int, Position | None]] = {}
    expanded = 0

    def successors(pos: Position) -> list[Position]:
        t = abs(nw.letter(pos).tail)
        return [p for p in nw.head_positions(t) if p < pos]

    starts = nw.head_positions(abs(index))
    for root in starts:
        if root in best:
            continue
        stack: list[tuple[Position, list[Position]]] = [(root, successors(root))]
        on_stack = {root}
        while stack:
            pos, todo = stack[-1]
            while todo and todo[-1] in best:
                todo.pop()
            if todo:
                nxt = todo.pop()
                if nxt in on_stack:
                    raise AssertionError("positions strictly decrease along a chain")
                expanded += 1
                if expanded > budget:
                    raise BudgetExceeded(f"backward chains of x{index} exceed {budget} expansions",
                                         witness=tuple(p for p, _ in stack), used=expanded)
                stack.append((nxt, successors(nxt)))
                on_stack.add(nxt)
                continue
            stack.pop()
            on_stack.discard(pos)
            length, follow = 1, None
            for p in successors(pos):
                if best[p][0] + 1 > length:
                    length, follow = best[p][0] + 1, p
            best[pos] = (length, follow)
    if not starts:
        return ()
    root = max(starts, key=lambda p: best[p][0])
    chain = [root]
    while best[chain[-1]][1] is not None:
        chain.append(best[chain[-1]][1])
    return tuple(chain)


def backward_chain_bound(w: TransfiniteWord, index: int, budget: int = DEFAULT_BUDGET) -> int:
    """The supremum of backward chain lengths from ``x_index``."""
    return len(longest_backward_chain(w, index, budget))


# ---------------------------------------------------------------------------
# Filtration and neighborhoods


def filtration_level(w: TransfiniteWord) -> int | float:
    """The smallest head index of the word (``inf`` for the empty word)."""
    _require_nielsen(w)
    level: int | float = math.inf
    for seg in w.segments:
        if isinstance(seg, Explicit):
            level = min([level] + [abs(l.head) for l in seg.letters])
        else:
            level = min([level] + [t.first(seg.start) for t in seg.block])
    return level


def neighborhood_uya(g: TransfiniteWord, fixed: Iterable[int], letters: Iterable[NielsenLetter],
                     budget: int = DEFAULT_BUDGET) -> bool:
    """Whether ``g`` fixes every ``x_y`` for ``y`` in ``fixed`` and projects trivially onto ``letters``."""
    alphabet = set(letters)
    alphabet |= {l.inverse() for l in alphabet}
    if reduce_finite(project_to_subalphabet(g, alphabet)):
        return False
    psi = PsiEvaluator(g, budget)
    return all(psi.image(abs(y)) == x(abs(y)) for y in fixed)


def neighborhood_level(fixed: Iterable[int], letters: Iterable[NielsenLetter]) -> int:
    """A level ``n`` whose filtration subgroup lies inside the neighborhood."""
    ys = [abs(y) for y in fixed]
    heads = [abs(l.head) for l in letters]
    return max(ys, default=0) + max(heads, default=0) + 1
