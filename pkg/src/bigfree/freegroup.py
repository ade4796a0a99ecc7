"""Free groups on ``x_1, x_2, ...``: reduced words, the graded lexicographic
order, rank/weight/complexity, and a Nielsen reduction in which every step
strictly lowers the complexity of the entry it changes.

Letters are nonzero integers: ``k`` is ``x_k`` and ``-k`` is ``x_k^-1``.
Generators are ordered ``x_1^-1 < x_1 < x_2^-1 < x_2 < ...``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence


class FreeWord:
    """A freely reduced word; construction reduces its input."""

    __slots__ = ("letters",)

    def __init__(self, letters: Iterable[int] = ()):
        stack: list[int] = []
        for g in letters:
            if g == 0:
                raise ValueError("generator index 0 does not exist")
            if stack and stack[-1] == -g:
                stack.pop()
            else:
                stack.append(g)
        object.__setattr__(self, "letters", tuple(stack))

    def __setattr__(self, name, value):
        raise AttributeError("FreeWord is immutable")

    @classmethod
    def generator(cls, k: int) -> "FreeWord":
        return cls((k,))

    @classmethod
    def parse(cls, text: str) -> "FreeWord":
        """Parse ``x1 x2^-1 x3``; ``1`` or an empty string is the identity."""
        text = text.strip()
        if text in ("", "1"):
            return cls()
        letters = []
        for tok in text.split():
            m = re.fullmatch(r"x(\d+)(?:\^(-?\d+))?", tok)
            if m is None or int(m.group(1)) == 0:
                raise ValueError(f"cannot parse free group letter {tok!r}")
            k, power = int(m.group(1)), int(m.group(2) or 1)
            letters += [k if power > 0 else -k] * abs(power)
        return cls(letters)

    def inverse(self) -> "FreeWord":
        return FreeWord(-g for g in reversed(self.letters))

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return FreeWord(self.letters + other.letters)

    def __pow__(self, e: int) -> "FreeWord":
        base = self if e >= 0 else self.inverse()
        return FreeWord(base.letters * abs(e))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FreeWord) and self.letters == other.letters

    def __hash__(self) -> int:
        return hash(self.letters)

    @property
    def max_index(self) -> int:
        return max((abs(g) for g in self.letters), default=0)

    def prefix(self, length: int) -> "FreeWord":
        return FreeWord(self.letters[:length])

    def substitute(self, images: "dict[int, FreeWord] | callable") -> "FreeWord":
        """Image under the endomorphism sending ``x_k`` to ``images(k)``."""
        lookup = images.get if isinstance(images, dict) else images
        out: list[int] = []
        for g in self.letters:
            img = lookup(abs(g))
            if img is None:
                img = FreeWord((abs(g),))
            out += img.letters if g > 0 else img.inverse().letters
        return FreeWord(out)

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(f"x{g}" if g > 0 else f"x{-g}^-1" for g in self.letters)

    def __repr__(self) -> str:
        return f"FreeWord({str(self)!r})"


IDENTITY = FreeWord()


def x(k: int) -> FreeWord:
    """The generator ``x_k`` (``k < 0`` gives its inverse)."""
    return FreeWord((k,))


def letter_key(g: int) -> int:
    """Position of a signed generator in ``x_1^-1 < x_1 < x_2^-1 < ...``."""
    return 2 * (abs(g) - 1) + (1 if g > 0 else 0)


def _check_rank(n: int, *words: FreeWord) -> None:
    if n < 1:
        raise ValueError("rank must be positive")
    for w in words:
        if w.max_index > n:
            raise ValueError(f"{w} uses a generator beyond rank {n}")


def graded_lex_compare(u: FreeWord, v: FreeWord, n: int) -> int:
    """-1, 0 or 1 as ``u`` precedes, equals or follows ``v``."""
    _check_rank(n, u, v)
    if len(u) != len(v):
        return -1 if len(u) < len(v) else 1
    ku = [letter_key(g) for g in u]
    kv = [letter_key(g) for g in v]
    return (ku > kv) - (ku < kv)


def count_reduced(n: int, length: int) -> int:
    """Number of reduced words of the given length in ``F_n``."""
    if length == 0:
        return 1
    return 2 * n * (2 * n - 1) ** (length - 1)


def rank_phi(w: FreeWord, n: int) -> int:
    """Number of reduced words ``z`` with ``z <= w`` in the graded lexicographic order."""
    _check_rank(n, w)
    total = sum(count_reduced(n, l) for l in range(len(w)))
    letters = w.letters
    for j, g in enumerate(letters):
        smaller = letter_key(g)
        if j > 0 and letter_key(-letters[j - 1]) < letter_key(g):
            smaller -= 1  # the inverse of the previous letter is not allowed
        total += smaller * (2 * n - 1) ** (len(letters) - j - 1)
    return total + 1


def half_prefix(v: FreeWord) -> FreeWord:
    """The initial segment of length ``floor((|v|+1)/2)``."""
    return v.prefix((len(v) + 1) // 2)


def weight(v: FreeWord, n: int) -> int:
    return rank_phi(half_prefix(v), n) + rank_phi(half_prefix(v.inverse()), n)


class Complexity(NamedTuple):
    """``(length, weight)``, compared lexicographically."""

    length: int
    weight: int


def complexity(v: FreeWord, n: int) -> Complexity:
    return Complexity(len(v), weight(v, n))


# ---------------------------------------------------------------------------
# Nielsen moves


class MoveKind(enum.Enum):
    R = "R"
    RINV = "Rinv"
    L = "L"
    LINV = "Linv"
    I = "I"
    D = "D"


_SIGNS = {MoveKind.R: (1, 1), MoveKind.RINV: (1, -1), MoveKind.L: (-1, -1), MoveKind.LINV: (-1, 1)}
_KINDS = {v: k for k, v in _SIGNS.items()}


@dataclass(frozen=True)
class NielsenMove:
    """An elementary Nielsen transformation of a tuple (indices are 1-based).

    ``T(i, eps, j, tau)`` replaces ``u_i`` by ``(u_i^eps u_j^tau)^eps``:
    R is ``u_i u_j``, L is ``u_j u_i``.  ``I`` inverts ``u_i``; ``D`` deletes
    an empty ``u_i``.
    """

    kind: MoveKind
    i: int
    j: int | None = None

    def __post_init__(self) -> None:
        if self.i < 1 or (self.j is not None and self.j < 1):
            raise ValueError("tuple indices are 1-based")
        if self.kind in _SIGNS:
            if self.j is None or self.j == self.i:
                raise ValueError("multiplication moves need two distinct indices")
        elif self.j is not None:
            raise ValueError(f"{self.kind.value} takes one index")

    @classmethod
    def T(cls, i: int, eps: int, j: int, tau: int) -> "NielsenMove":
        return cls(_KINDS[(eps, tau)], i, j)

    @property
    def signs(self) -> tuple[int, int]:
        return _SIGNS[self.kind]

    def inverse(self) -> "NielsenMove":
        if self.kind is MoveKind.I:
            return self
        if self.kind is MoveKind.D:
            raise ValueError("deletion has no inverse move")
        eps, tau = self.signs
        return NielsenMove.T(self.i, eps, self.j, -tau)

    def __str__(self) -> str:
        if self.kind in _SIGNS:
            eps, tau = self.signs
            return f"T_{{{self.i}^{eps} {self.j}^{tau}}}"
        return f"{self.kind.value}_{self.i}"


def apply_move(t: Sequence[FreeWord], move: NielsenMove) -> tuple[FreeWord, ...]:
    out = list(t)
    if move.i > len(out) or (move.j is not None and move.j > len(out)):
        raise IndexError(f"move {move} outside a tuple of length {len(out)}")
    i = move.i - 1
    if move.kind is MoveKind.I:
        out[i] = out[i].inverse()
    elif move.kind is MoveKind.D:
        if out[i]:
            raise ValueError("only an empty entry can be deleted")
        del out[i]
    else:
        eps, tau = move.signs
        out[i] = (out[i] ** eps * out[move.j - 1] ** tau) ** eps
    return tuple(out)


def _signed_entries(t: Sequence[FreeWord]) -> list[tuple[int, int, FreeWord]]:
    return [(i, e, w ** e) for i, w in enumerate(t, 1) for e in (1, -1)]


def _n2_violation(t: Sequence[FreeWord]):
    for i, e1, v1 in _signed_entries(t):
        for j, e2, v2 in _signed_entries(t):
            if i == j:
                continue
            prod = v1 * v2
            if prod and (len(prod) < len(v1) or len(prod) < len(v2)):
                return (i, e1, v1), (j, e2, v2)
    return None


def _n3_violation(t: Sequence[FreeWord]):
    entries = _signed_entries(t)
    for a in entries:
        for b in entries:
            if not a[2] * b[2]:
                continue
            for c in entries:
                if not b[2] * c[2]:
                    continue
                if len(a[2] * b[2] * c[2]) <= len(a[2]) - len(b[2]) + len(c[2]):
                    return a, b, c
    return None


def is_nielsen_reduced(t: Sequence[FreeWord]) -> bool:
    """Conditions N1-N3 over all entries and their inverses."""
    if any(not w for w in t):
        return False
    entries = [w for _, _, w in _signed_entries(t)]
    for v1 in entries:
        for v2 in entries:
            p = v1 * v2
            if p and (len(p) < len(v1) or len(p) < len(v2)):
                return False
    return _n3_violation(t) is None


def tuple_rank(t: Sequence[FreeWord]) -> int:
    """Smallest rank containing every generator of the tuple."""
    return max((w.max_index for w in t), default=0) or 1


class ReductionDefect(RuntimeError):
    """The case analysis produced a move violating its guarantees."""


@dataclass(frozen=True)
class Step:
    move: NielsenMove
    result: tuple[FreeWord, ...]
    rank: int


def refined_step(t: Sequence[FreeWord]) -> Step:
    """One complexity-decreasing Nielsen move for a tuple that is not Nielsen reduced.

    The returned move changes one entry ``u_i`` and uses ``u_j``; with ``n``
    the tuple's rank, ``C_n(u_i') < C_n(u_i)`` and ``C_n(u_j) < C_n(u_i)``.
    """
    t = tuple(t)
    if any(not w for w in t):
        raise ValueError("entries must be nontrivial")
    n = tuple_rank(t)
    move = _case_a(t, n)
    if move is None:
        move = _case_b(t, n)
    if move is None:
        raise ValueError("tuple is already Nielsen reduced")
    result = apply_move(t, move)
    if not step_conditions_hold(t, move, n):
        raise ReductionDefect(f"move {move} on {[str(w) for w in t]} breaks the decrease conditions")
    return Step(move, result, n)


def step_conditions_hold(t: Sequence[FreeWord], move: NielsenMove, n: int) -> bool:
    """Conditions (1) and (2): the changed entry and the multiplier are below the old entry."""
    after = apply_move(t, move)
    i, j = move.i - 1, move.j - 1
    old = complexity(t[i], n)
    unchanged = all(after[k] == t[k] for k in range(len(t)) if k != i)
    return unchanged and complexity(after[i], n) < old and complexity(t[j], n) < old


def _case_a(t: tuple[FreeWord, ...], n: int) -> NielsenMove | None:
    found = _n2_violation(t)
    if found is None:
        return None
    (i, e1, v1), (j, e2, v2) = found
    if not len(v1 * v2) < len(v1):
        # |v1 v2| < |v2|: use the pair (v2^-1, v1^-1)
        (i, e1, v1), (j, e2, v2) = (j, -e2, v2.inverse()), (i, -e1, v1.inverse())
    right = NielsenMove.T(i, e1, j, e2)      # v1 <- v1 v2
    left = NielsenMove.T(j, -e2, i, -e1)     # v2 <- v1 v2
    if len(v2) < len(v1):
        return right
    if len(v1) < len(v2):
        return left
    w1, w2 = weight(v1, n), weight(v2, n)
    if w1 == w2:
        raise ReductionDefect(f"equal weights for {v1} and {v2} with |v1 v2| < |v1| = |v2|")
    return right if w2 < w1 else left


def _case_b(t: tuple[FreeWord, ...], n: int) -> NielsenMove | None:
    found = _n3_violation(t)
    if found is None:
        return None
    (a_i, a_e, v1), (b_i, b_e, v2), (c_i, c_e, v3) = found
    half = len(v2) // 2
    p = v2.prefix(half)
    q = v2.inverse().prefix(half)
    if rank_phi(p, n) > rank_phi(q, n):
        (b_i, b_e, v2), (c_i, c_e, v3) = (b_i, -b_e, v2.inverse()), (a_i, -a_e, v1.inverse())
    i, e, j, e2 = b_i, b_e, c_i, c_e
    right = NielsenMove.T(i, e, j, e2)       # v2 <- v2 v3
    left = NielsenMove.T(j, -e2, i, -e)      # v3 <- v2 v3
    if len(v2) < len(v3):
        return left
    if weight(v3, n) < weight(v2, n):
        return right
    return left


def nielsen_reduce(t: Sequence[FreeWord], budget: int = 10_000,
                   probes: Iterable[int] = ()) -> tuple[tuple[FreeWord, ...], list[NielsenMove]]:
    """Apply :func:`refined_step` until the tuple is Nielsen reduced.

    Entries that are single letters never change.  ``probes`` lists signed
    generators that the caller knows to lie in the generated subgroup; each
    must appear among the final entries up to inversion.
    """
    current = tuple(t)
    moves: list[NielsenMove] = []
    fixed = {k: w for k, w in enumerate(current) if len(w) == 1}
    while not is_nielsen_reduced(current):
        if len(moves) >= budget:
            raise ReductionDefect(f"no Nielsen reduced tuple after {budget} steps")
        step = refined_step(current)
        moves.append(step.move)
        current = step.result
    if any(current[k] != w for k, w in fixed.items()):
        raise ReductionDefect("a single-letter entry changed")
    final = {w for v in current for w in (v, v.inverse())}
    for g in probes:
        if x(g) not in final:
            raise ReductionDefect(f"generator x{abs(g)} lies in the subgroup but not among the reduced entries")
    return current, moves


# ---------------------------------------------------------------------------
# Lemma checks used as property-test oracles


class HypothesisNotMet(ValueError):
    """The instance does not satisfy the lemma's hypotheses."""


def _lemma_setup(u: FreeWord, v: FreeWord, eps: int, tau: int, n: int):
    u_new = (u ** eps * v ** tau) ** eps
    cu = complexity(u, n)
    if not (complexity(u_new, n) < cu and complexity(v, n) < cu):
        raise HypothesisNotMet("complexity hypotheses fail")
    return u_new


def _precedes_or_equal(a: FreeWord, b: FreeWord, n: int) -> bool:
    return graded_lex_compare(a, b, n) <= 0


def lemma_hard2_check(u: FreeWord, v: FreeWord, eps: int, tau: int, n: int) -> bool:
    """Hypotheses: ``|u'| = |u|`` and both complexity decreases.  Conclusion:
    ``L(u') <= L(u)`` and ``L(u'^-1) <= L(u^-1)``."""
    u_new = _lemma_setup(u, v, eps, tau, n)
    if len(u_new) != len(u):
        raise HypothesisNotMet("|u'| differs from |u|")
    return (_precedes_or_equal(half_prefix(u_new), half_prefix(u), n)
            and _precedes_or_equal(half_prefix(u_new.inverse()), half_prefix(u.inverse()), n))


def lemma_hard_check(u: FreeWord, v: FreeWord, eps: int, tau: int, n: int) -> bool:
    """Hypotheses: ``|u| = |v|`` and both complexity decreases.  Conclusion:
    ``L(v^tau) = L(u^-eps)`` and ``L(v^-tau) < L(u^eps)``."""
    if len(u) != len(v):
        raise HypothesisNotMet("|u| differs from |v|")
    _lemma_setup(u, v, eps, tau, n)
    return (half_prefix(v ** tau) == half_prefix(u ** -eps)
            and graded_lex_compare(half_prefix(v ** -tau), half_prefix(u ** eps), n) < 0)
