"""Transposition words acting on the integers.

A word over letters ``T(a, b)`` acts on a point by following it through the
word: find the first position whose letter moves the point, replace the point
by its partner, then look for the next position after that one moving the new
point, and so on.  The word is *admissible* when every such chain is finite
in both directions; the final point is then the image of the start.

Deciding admissibility.  Call a pair ``(position, incoming point)`` a state.
Each state has at most one successor (the next position moving the outgoing
point) and at most one predecessor, so states fall into disjoint paths.  A
point's forward chain is exactly the path starting at the first position
moving it, so all forward and backward chains are finite iff no path is
infinite in exactly one direction.  Infinite paths can only run off to the
unbounded end of a pattern run.  For large order coordinate ``m`` the
successor rule inside a pattern becomes translation invariant, which gives a
finite *asymptotic graph* on pairs ``(block index, outgoing coordinate)``;
its cycles are precisely the asymptotic infinite paths.  Each cycle is
represented by finitely many states, and following those backwards either
reaches a path start (a refutation) or provably runs off to infinity.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .verdict import Verdict, refuted, unknown, verified
from .words import (
    Explicit,
    Pattern,
    Position,
    TransfiniteWord,
    Transposition,
    invert,
    mirror_position,
    project_to_subalphabet,
    reduce_finite,
    word,
)

State = tuple[Position, int]  # (position, incoming point)

DEFAULT_BUDGET = 10_000


def _require_transpositions(w: TransfiniteWord) -> None:
    if w.alphabet not in (None, "T"):
        raise ValueError("expected a word over transposition letters")


def _partner(letter: Transposition, point: int) -> int:
    return letter.b if letter.a == point else letter.a


class InfiniteOccurrence(ValueError):
    """A point is moved at infinitely many positions."""

    def __init__(self, point: int):
        super().__init__(f"point {point} is moved at infinitely many positions")
        self.point = point


@dataclass(frozen=True)
class ChainTrace:
    """Points ``x_0, x_1, ...`` and the positions where each step happens.

    ``terminal`` is ``None`` when the trace stopped before the chain ended
    (budget exhausted or divergence proven); ``diverges`` is set when the
    chain is proven infinite.
    """

    direction: str
    points: tuple[int, ...]
    positions: tuple[Position, ...]
    terminal: int | None
    diverges: bool = False

    @property
    def steps(self) -> int:
        return len(self.positions)

    @property
    def complete(self) -> bool:
        return self.terminal is not None


@dataclass(frozen=True)
class AsymptoticGraph:
    """Successor rule of a pattern run for order coordinates ``m >= threshold``.

    ``edges[(k, c)] = (delta, k2, c2)``: the state at block index ``k`` whose
    outgoing point is coordinate ``c`` moves to block index ``k2`` at
    ``m + delta`` with outgoing coordinate ``c2``.  Only built for runs whose
    coordinate maps all have the same absolute slope; ``superset_cyclic``
    records, for other runs, whether a coarser graph containing every
    possible step has a cycle.
    """

    segment: int
    threshold: int
    uniform: bool
    edges: dict[tuple[int, int], tuple[int, int, int]] = field(default_factory=dict)
    superset_cyclic: bool = False

    @cached_property
    def doomed(self) -> frozenset[tuple[int, int]]:
        """States from which the asymptotic walk never stops."""
        out = set()
        for start in self.edges:
            seen = []
            node = start
            while node in self.edges and node not in seen:
                seen.append(node)
                _, k2, c2 = self.edges[node]
                node = (k2, c2)
            if node in seen:
                out.add(start)
        return frozenset(out)

    def cycles(self) -> list[tuple[list[tuple[int, int]], int]]:
        """Each cycle as (states, total shift of m around it)."""
        found: list[tuple[list[tuple[int, int]], int]] = []
        on_cycle: set[tuple[int, int]] = set()
        for start in sorted(self.doomed):
            node = start
            seen: list[tuple[int, int]] = []
            while node not in seen:
                seen.append(node)
                _, k2, c2 = self.edges[node]
                node = (k2, c2)
            cycle = seen[seen.index(node):]
            if cycle[0] in on_cycle:
                continue
            on_cycle.update(cycle)
            found.append((cycle, sum(self.edges[s][0] for s in cycle)))
        return found


class SymWord:
    """A transposition word with occurrence lookups and chain tracing."""

    def __init__(self, w: TransfiniteWord):
        _require_transpositions(w)
        self.word = w
        self._index: dict[int, dict[int, list[int]]] = {}
        for s, seg in enumerate(w.segments):
            if isinstance(seg, Explicit):
                table: dict[int, list[int]] = {}
                for i, letter in enumerate(seg.letters):
                    table.setdefault(letter.a, []).append(i)
                    table.setdefault(letter.b, []).append(i)
                self._index[s] = table

    # -- occurrences -------------------------------------------------------

    def constant_points(self) -> list[int]:
        """Points sitting in a constant coordinate of a pattern (moved infinitely often)."""
        out = []
        for seg in self.word.segments:
            if isinstance(seg, Pattern):
                out += [amap.offset for t in seg.block for amap in t.maps if amap.is_constant]
        return sorted(set(out))

    def _pattern_hits(self, s: int, seg: Pattern, point: int) -> list[tuple[int, int]]:
        view = seg.mview
        hits = []
        for k, t in enumerate(view.block):
            for amap in t.maps:
                if amap.is_constant:
                    if amap.offset == point:
                        raise InfiniteOccurrence(point)
                    continue
                m = amap.solve(point)
                if m is not None and view.contains(m):
                    hits.append((m, k))
        return hits

    def next_occurrence(self, point: int, after: Position | None) -> Position | None:
        first = 0 if after is None else after[0]
        for s in range(first, len(self.word.segments)):
            seg = self.word.segments[s]
            bound = (after[1], after[2]) if after is not None and s == after[0] else None
            if isinstance(seg, Explicit):
                idx = self._index[s].get(point, [])
                j = 0 if bound is None else bisect.bisect_right(idx, bound[0])
                if j < len(idx):
                    return (s, idx[j], 0)
                continue
            hits = [h for h in self._pattern_hits(s, seg, point) if bound is None or h > bound]
            if hits:
                m, k = min(hits)
                return (s, m, k)
        return None

    def previous_occurrence(self, point: int, before: Position | None) -> Position | None:
        last = len(self.word.segments) - 1 if before is None else before[0]
        for s in range(last, -1, -1):
            seg = self.word.segments[s]
            bound = (before[1], before[2]) if before is not None and s == before[0] else None
            if isinstance(seg, Explicit):
                idx = self._index[s].get(point, [])
                j = len(idx) if bound is None else bisect.bisect_left(idx, bound[0])
                if j > 0:
                    return (s, idx[j - 1], 0)
                continue
            hits = [h for h in self._pattern_hits(s, seg, point) if bound is None or h < bound]
            if hits:
                m, k = max(hits)
                return (s, m, k)
        return None

    def successor(self, state: State) -> State | None:
        pos, incoming = state
        out = _partner(self.word.letter_at(pos), incoming)
        nxt = self.next_occurrence(out, pos)
        return None if nxt is None else (nxt, out)

    def predecessor(self, state: State) -> State | None:
        pos, incoming = state
        prev = self.previous_occurrence(incoming, pos)
        if prev is None:
            return None
        return (prev, _partner(self.word.letter_at(prev), incoming))

    def out_point(self, state: State) -> int:
        return _partner(self.word.letter_at(state[0]), state[1])

    # -- asymptotics -------------------------------------------------------

    @cached_property
    def asymptotics(self) -> dict[int, AsymptoticGraph]:
        """Asymptotic graphs of the pattern runs that are unbounded to the right."""
        graphs = {}
        for s, seg in enumerate(self.word.segments):
            if isinstance(seg, Pattern) and seg.mview.hi is None:
                graphs[s] = _asymptotic_graph(s, seg)
        return graphs

    def proven_infinite(self, state: State) -> bool:
        (s, m, k), incoming = state
        graph = self.asymptotics.get(s)
        if graph is None or not graph.uniform or m < graph.threshold:
            return False
        block = self.word.segments[s].mview.block
        c_out = 1 if block[k].first(m) == incoming else 0
        return (k, c_out) in graph.doomed

    def trace(self, point: int, direction: str = "forward", budget: int = DEFAULT_BUDGET) -> ChainTrace:
        """Follow the chain of ``point``; stops early if the chain is proven infinite."""
        if direction == "forward":
            start = self.next_occurrence(point, None)
            state = None if start is None else (start, point)
            step, proof = self.successor, self.proven_infinite
        elif direction == "backward":
            start = self.previous_occurrence(point, None)
            state = None if start is None else (start, _partner(self.word.letter_at(start), point))
            step, proof = self.predecessor, self._proven_backward
        else:
            raise ValueError("direction is 'forward' or 'backward'")
        points = [point]
        positions: list[Position] = []
        while state is not None:
            if len(positions) >= budget:
                return ChainTrace(direction, tuple(points), tuple(positions), None)
            positions.append(state[0])
            nxt_point = self.out_point(state) if direction == "forward" else state[1]
            points.append(nxt_point)
            if proof(state):
                return ChainTrace(direction, tuple(points), tuple(positions), None, diverges=True)
            state = step(state)
        return ChainTrace(direction, tuple(points), tuple(positions), points[-1])

    @cached_property
    def mirror(self) -> "SymWord":
        return SymWord(invert(self.word))

    def to_mirror(self, state: State) -> State:
        """The state of the inverted word that follows this one's path backwards."""
        return (mirror_position(self.word, state[0]), self.out_point(state))

    def _proven_backward(self, state: State) -> bool:
        return self.mirror.proven_infinite(self.to_mirror(state))

    def apply(self, point: int, budget: int = DEFAULT_BUDGET) -> int:
        t = self.trace(point, "forward", budget)
        if t.terminal is None:
            raise DivergenceError(point, t)
        return t.terminal

    def apply_inverse(self, point: int, budget: int = DEFAULT_BUDGET) -> int:
        t = self.trace(point, "backward", budget)
        if t.terminal is None:
            raise DivergenceError(point, t)
        return t.terminal


def _asymptotic_graph(s: int, seg: Pattern) -> AsymptoticGraph:
    view = seg.mview
    maps = [(k, c, amap) for k, t in enumerate(view.block) for c, amap in enumerate(t.maps)]
    bound = max(abs(amap.offset) for _, _, amap in maps)
    threshold = max(view.lo or 0, 0) + 2 * bound + 1
    slopes = {abs(amap.coeff) for _, _, amap in maps}
    if 0 in slopes:
        return AsymptoticGraph(s, threshold, False, superset_cyclic=True)
    if len(slopes) == 1:
        edges = {}
        for k, c, amap in maps:
            best = None
            for k2, c2, other in maps:
                if other.coeff != amap.coeff:
                    continue
                delta, r = divmod(amap.offset - other.offset, amap.coeff)
                if r or (delta, k2) <= (0, k):
                    continue
                if best is None or (delta, k2) < best[:2]:
                    best = (delta, k2, 1 - c2)
            if best is not None:
                edges[(k, c)] = best
        return AsymptoticGraph(s, threshold, True, edges)
    # mixed slopes: keep every edge that can move forward for large m
    succ: dict[tuple[int, int], set[tuple[int, int]]] = {}
    for k, c, amap in maps:
        for k2, c2, other in maps:
            if amap.coeff * other.coeff <= 0 or abs(amap.coeff) < abs(other.coeff):
                continue
            if abs(amap.coeff) == abs(other.coeff):
                delta, r = divmod(amap.offset - other.offset, amap.coeff)
                if r or (delta, k2) <= (0, k):
                    continue
            succ.setdefault((k, c), set()).add((k2, 1 - c2))
    return AsymptoticGraph(s, threshold, False, superset_cyclic=_has_cycle(succ))


def _has_cycle(succ: dict) -> bool:
    color: dict = {}

    def visit(node) -> bool:
        color[node] = 1
        for nxt in succ.get(node, ()):
            if color.get(nxt) == 1 or (nxt not in color and visit(nxt)):
                return True
        color[node] = 2
        return False

    return any(node not in color and visit(node) for node in list(succ))


class DivergenceError(RuntimeError):
    def __init__(self, point: int, trace: ChainTrace):
        what = "diverges" if trace.diverges else "did not finish within the budget"
        super().__init__(f"chain of point {point} {what}: {list(trace.points[:12])}")
        self.point = point
        self.trace = trace


@dataclass(frozen=True)
class DivergenceWitness:
    """A point whose chain is infinite in the given direction, with a prefix."""

    point: int
    direction: str
    chain: tuple[int, ...]
    start: Position | None = None

    def __str__(self) -> str:
        arrow = " -> ".join(map(str, self.chain[:8]))
        where = f" from position {self.start}" if self.start is not None else ""
        return f"{self.direction} chain of point {self.point}{where} diverges: {arrow} -> ..."


# ---------------------------------------------------------------------------
# Admissibility


def _s0(sw: SymWord) -> Verdict | None:
    pts = sw.constant_points()
    if pts:
        return refuted(DivergenceWitness(pts[0], "forward", (pts[0],)),
                       detail=f"point {pts[0]} is moved at infinitely many positions")
    return None


class _Budget:
    def __init__(self, total: int):
        self.total = total
        self.used = 0

    def take(self, n: int = 1) -> bool:
        self.used += n
        return self.used <= self.total


def _window_states(sw: SymWord, graph: AsymptoticGraph, cycle, shift: int) -> Iterator[State]:
    seg = sw.word.segments[graph.segment]
    k, c_out = cycle[0]
    amap = seg.mview.block[k].maps[1 - c_out]
    for m in range(graph.threshold, graph.threshold + shift):
        yield ((graph.segment, m, k), amap(m))


def _follow(sw: SymWord, state: State, budget: _Budget) -> tuple[str, State]:
    """Walk successors until the path ends, is proven infinite, or the budget runs out."""
    while True:
        if sw.proven_infinite(state):
            return "infinite", state
        if not budget.take():
            return "budget", state
        nxt = sw.successor(state)
        if nxt is None:
            return "end", state
        state = nxt


def _one_sided_paths(sw: SymWord, direction: str, budget: _Budget) -> Verdict | None:
    """Look for paths of ``sw`` that are infinite forward but have a start.

    Returns a refutation, an unknown verdict, or ``None`` when there are none.
    """
    inconclusive = []
    for graph in sw.asymptotics.values():
        if not graph.uniform:
            if graph.superset_cyclic:
                inconclusive.append(f"segment {graph.segment}: mixed slopes with a possible cycle")
            continue
        for cycle, shift in graph.cycles():
            for state in _window_states(sw, graph, cycle, shift):
                # follow the path backwards: forward in the inverted word
                outcome, last = _follow(sw.mirror, sw.to_mirror(state), budget)
                if outcome == "budget":
                    inconclusive.append(f"budget exhausted tracing segment {graph.segment} backwards")
                    continue
                if outcome == "end":
                    # last state of the inverted word is the start of a path of sw
                    root_point = sw.mirror.out_point(last)
                    tr = sw.trace(root_point, "forward", 64)
                    chain_dir = direction
                    return refuted(DivergenceWitness(root_point, chain_dir, tr.points),
                                   budget_used=budget.used,
                                   detail=f"the {chain_dir} chain of point {root_point} never ends")
    if inconclusive:
        return unknown(budget.used, "; ".join(inconclusive))
    return None


def membership_s(w: TransfiniteWord, test_points: Iterable[int] = (), budget: int = DEFAULT_BUDGET) -> Verdict:
    """Whether every point's forward and backward chains are finite."""
    sw = SymWord(w)
    bad = _s0(sw)
    if bad is not None:
        return bad
    meter = _Budget(budget)
    results = []
    for side, direction in ((sw, "forward"), (sw.mirror, "backward")):
        results.append(_one_sided_paths(side, direction, meter))
    for r in results:
        if r is not None and r.refuted:
            return r
    for x in test_points:
        for direction in ("forward", "backward"):
            t = sw.trace(x, direction, max(budget - meter.used, 1))
            meter.take(t.steps)
            if t.diverges:
                return refuted(DivergenceWitness(x, direction, t.points), meter.used,
                               f"the {direction} chain of point {x} never ends")
            if t.terminal is None:
                results.append(unknown(meter.used, f"budget exhausted tracing point {x}"))
    open_ = [r for r in results if r is not None]
    if open_:
        return unknown(meter.used, "; ".join(r.detail for r in open_))
    return verified(meter.used, "no chain is infinite in exactly one direction")


def membership_s_prime(w: TransfiniteWord, test_points: Iterable[int] = (), budget: int = DEFAULT_BUDGET) -> Verdict:
    """Whether every interval restriction is admissible: no chain is infinite at all."""
    sw = SymWord(w)
    bad = _s0(sw)
    if bad is not None:
        return bad
    meter = _Budget(budget)
    inconclusive = []
    for side, direction in ((sw, "forward"), (sw.mirror, "backward")):
        for graph in side.asymptotics.values():
            if not graph.uniform:
                if graph.superset_cyclic:
                    inconclusive.append(f"segment {graph.segment}: mixed slopes with a possible cycle")
                continue
            if not graph.doomed:
                continue
            witness = _interval_witness(side, graph, direction, meter)
            if witness is not None:
                edge = "starting" if direction == "forward" else "ending"
                return refuted(witness, meter.used,
                               f"the interval {edge} at {witness.start} has an infinite {direction} chain")
            inconclusive.append(f"segment {graph.segment}: infinite path not located within budget")
    if inconclusive:
        return unknown(meter.used, "; ".join(inconclusive))
    del test_points  # interval chains are decided exactly; extra probes add nothing
    return verified(meter.used, "every chain of every interval is finite")


def _interval_witness(side: SymWord, graph: AsymptoticGraph, direction: str, meter: _Budget) -> DivergenceWitness | None:
    """A start state near ``m = 0`` whose forward path provably never ends."""
    seg = side.word.segments[graph.segment]
    view = seg.mview
    ms = [0] + [v for d in range(1, graph.threshold + 1) for v in (d, -d)]
    candidates = [m for m in ms if view.contains(m)] + [graph.threshold]
    for m in candidates:
        for k, c_out in sorted(graph.doomed):
            state = ((graph.segment, m, k), view.block[k].maps[1 - c_out](m))
            outcome, _ = _follow(side, state, meter)
            if outcome == "infinite":
                incoming = state[1]
                start = state[0]
                chain = [incoming]
                cur: State | None = state
                for _ in range(8):
                    if cur is None:
                        break
                    chain.append(side.out_point(cur))
                    cur = side.successor(cur)
                if direction == "backward":
                    start = mirror_position(side.word, start)
                return DivergenceWitness(incoming, direction, tuple(chain), start)
            if outcome == "budget":
                return None
    return None


# ---------------------------------------------------------------------------
# Evaluation, relators, neighbourhoods


class LazyPermutation:
    """The permutation of the integers represented by an admissible word."""

    def __init__(self, w: TransfiniteWord, budget: int = DEFAULT_BUDGET):
        self._sym = SymWord(w)
        self.word = w
        self.budget = budget

    def __call__(self, point: int) -> int:
        return self._sym.apply(point, self.budget)

    def inverse(self, point: int) -> int:
        return self._sym.apply_inverse(point, self.budget)

    def table(self, points: Iterable[int]) -> dict[int, int]:
        return {p: self(p) for p in points}


def eval_p(w: TransfiniteWord, budget: int = DEFAULT_BUDGET) -> LazyPermutation:
    return LazyPermutation(w, budget)


def chain_trace(w: TransfiniteWord, point: int, direction: str = "forward", budget: int = DEFAULT_BUDGET) -> ChainTrace:
    return SymWord(w).trace(point, direction, budget)


@dataclass(frozen=True)
class SigmaRelator:
    family: str
    word: TransfiniteWord


def sigma_relators(points: Sequence[int]) -> list[SigmaRelator]:
    """Squares, commutators of disjoint transpositions, and the triangle relation."""
    pts = sorted(set(points))
    out = []
    for a, b in itertools.permutations(pts, 2):
        out.append(SigmaRelator("square", word(Transposition(a, b), Transposition(a, b))))
    for a, b, c, d in itertools.permutations(pts, 4):
        out.append(SigmaRelator("disjoint", word(Transposition(a, b), Transposition(c, d),
                                                 Transposition(b, a), Transposition(d, c))))
    for a, b, c in itertools.permutations(pts, 3):
        out.append(SigmaRelator("triangle", word(Transposition(a, b), Transposition(a, c),
                                                 Transposition(b, a), Transposition(c, b))))
    return out


def transpositions_on(points: Iterable[int]) -> list[Transposition]:
    pts = sorted(set(points))
    return [Transposition(a, b) for a, b in itertools.permutations(pts, 2)]


def neighborhood_wc(g: TransfiniteWord, points: Iterable[int], budget: int = DEFAULT_BUDGET) -> bool:
    """Projection to the letters on ``points`` is trivial and every point is fixed."""
    pts = sorted(set(points))
    if reduce_finite(project_to_subalphabet(g, transpositions_on(pts))):
        return False
    sw = SymWord(g)
    return all(sw.apply(p, budget) == p for p in pts)
