"""Finite presentations of ``Aut(F_n)``, ``SAut(F_n)`` and of the pointwise
stabilizers of ``x_1..x_k``, emitted as data and verified by evaluating every
relator as an automorphism of ``F_n``.

Generators are elementary Nielsen letters ``E(a,b)``, monomial automorphisms
``M(s_1,...,s_n)`` (the signed images of ``x_1..x_n``) and Whitehead
automorphisms ``W({A};a)``.  A relation ``U = V`` is stored as ``U V^-1``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Union

from .aut.automorphism import FinSuppAutomorphism, MonomialAutomorphism
from .aut.relators import (
    commutator,
    gersten_relators,
    nielsen_generators,
    signed_generators,
    w_word,
    word_inverse,
)
from .freegroup import letter_key, x
from .words import NielsenLetter

SCHEMA = 1


# ---------------------------------------------------------------------------
# Generators


@dataclass(frozen=True)
class Monomial:
    """The signed permutation ``x_k -> x_|s_k|^sign(s_k)`` of ``F_n``."""

    images: tuple[int, ...]

    def __post_init__(self) -> None:
        if sorted(abs(s) for s in self.images) != list(range(1, len(self.images) + 1)):
            raise ValueError(f"{self.images} is not a signed permutation")

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, g: int) -> int:
        s = self.images[abs(g) - 1]
        return s if g > 0 else -s

    def then(self, other: "Monomial") -> "Monomial":
        return Monomial(tuple(other(s) for s in self.images))

    def inverse(self) -> "Monomial":
        inv = [0] * self.n
        for k, s in enumerate(self.images, 1):
            inv[abs(s) - 1] = k if s > 0 else -k
        return Monomial(tuple(inv))

    def fixes(self, k: int) -> bool:
        return all(self.images[j - 1] == j for j in range(1, k + 1))

    def automorphism(self) -> FinSuppAutomorphism:
        return FinSuppAutomorphism({k: x(s) for k, s in enumerate(self.images, 1)})

    @staticmethod
    def identity(n: int) -> "Monomial":
        return Monomial(tuple(range(1, n + 1)))

    @staticmethod
    def from_map(n: int, m: MonomialAutomorphism) -> "Monomial":
        return Monomial(tuple(m(k) for k in range(1, n + 1)))

    def __str__(self) -> str:
        return "M(" + ",".join(str(s) for s in self.images) + ")"


@dataclass(frozen=True)
class WhiteheadAut:
    """``(A, a)``: the product of ``E_ba`` over ``b`` in ``A`` other than ``a``."""

    A: frozenset[int]
    a: int

    def __post_init__(self) -> None:
        if self.a not in self.A or -self.a in self.A:
            raise ValueError(f"({sorted(self.A)}, {self.a}) needs a in A and a^-1 not in A")

    def expand(self) -> tuple[NielsenLetter, ...]:
        """The letters ``E_ba``; distinct heads, so their order is immaterial."""
        return tuple(NielsenLetter(b, self.a) for b in sorted(self.A, key=letter_key) if b != self.a)

    def automorphism(self) -> FinSuppAutomorphism:
        return FinSuppAutomorphism.from_letters(self.expand())

    def acted(self, sigma: Monomial) -> "WhiteheadAut":
        """``(A sigma, a sigma)``."""
        return WhiteheadAut(frozenset(sigma(b) for b in self.A), sigma(self.a))

    def __str__(self) -> str:
        inner = ",".join(str(b) for b in sorted(self.A, key=letter_key))
        return f"W({{{inner}}};{self.a})"


Generator = Union[NielsenLetter, Monomial, WhiteheadAut]
Word = tuple[tuple[Generator, int], ...]


def whitehead_expand(A: Iterable[int], a: int) -> tuple[NielsenLetter, ...]:
    return WhiteheadAut(frozenset(A), a).expand()


def whitehead_action(A: Iterable[int], a: int, g: int) -> list[int]:
    """The defining action of ``(A, a)`` on a signed generator ``g``."""
    A = set(A)
    if abs(g) == abs(a):
        return [g]
    out = [g]
    if g in A:
        out = out + [a]
    if -g in A:
        out = [-a] + out
    return out


def generator_automorphism(g: Generator) -> FinSuppAutomorphism:
    if isinstance(g, NielsenLetter):
        return FinSuppAutomorphism.from_letters([g])
    return g.automorphism()


def token(g: Generator, e: int = 1) -> str:
    return str(g) + ("^-1" if e == -1 else "")


_TOKEN = re.compile(r"(?:E\((-?\d+),(-?\d+)\)|M\(([-\d,]*)\)|W\(\{([-\d,]*)\};(-?\d+)\))(\^-1)?")


def parse_token(text: str) -> tuple[Generator, int]:
    m = _TOKEN.fullmatch(text.replace(" ", ""))
    if m is None:
        raise ValueError(f"cannot parse generator token {text!r}")
    e = -1 if m.group(6) else 1
    if m.group(1) is not None:
        return NielsenLetter(int(m.group(1)), int(m.group(2))), e
    if m.group(3) is not None:
        return Monomial(tuple(int(s) for s in m.group(3).split(",") if s)), e
    members = frozenset(int(s) for s in m.group(4).split(",") if s)
    return WhiteheadAut(members, int(m.group(5))), e


# ---------------------------------------------------------------------------
# Enumeration


def monomials(n: int, k: int = 0) -> list[Monomial]:
    """Signed permutations of ``x_1..x_n`` fixing ``x_1..x_k``."""
    free = list(range(k + 1, n + 1))
    out = []
    for perm in itertools.permutations(free):
        for signs in itertools.product((1, -1), repeat=len(free)):
            out.append(Monomial(tuple(range(1, k + 1)) + tuple(s * p for s, p in zip(signs, perm))))
    return out


def monomial_generating_set(n: int) -> list[Monomial]:
    """Adjacent transpositions ``x_i <-> x_(i+1)`` and the inversion of ``x_n``."""
    out = []
    for i in range(1, n):
        images = list(range(1, n + 1))
        images[i - 1], images[i] = i + 1, i
        out.append(Monomial(tuple(images)))
    out.append(Monomial(tuple(range(1, n)) + (-n,)))
    return out


def whitehead_automorphisms(n: int, k: int = 0) -> list[WhiteheadAut]:
    """All ``(A, a)`` with ``A - {a}`` inside ``{x_(k+1),...,x_n}^±``."""
    out = []
    for a in signed_generators(n):
        others = [s for s in signed_generators(n) if abs(s) != abs(a) and abs(s) > k]
        for r in range(len(others) + 1):
            for rest in itertools.combinations(others, r):
                out.append(WhiteheadAut(frozenset(rest) | {a}, a))
    return out


def w_monomial(n: int, a: int, b: int) -> Monomial:
    return Monomial.from_map(n, MonomialAutomorphism.swap_pair(a, b))


def m0_relators(n: int, group: list[Monomial]) -> Iterator[tuple[str, Word]]:
    """The multiplication table of ``group`` against the fixed generating set."""
    members = set(group)
    yield "M0", ((Monomial.identity(n), 1),)
    for s in monomial_generating_set(n):
        if s not in members:
            continue
        for m in group:
            yield "M0", ((s, 1), (m, 1), (s.then(m), -1))


def mccool_relators(n: int, whiteheads: list[WhiteheadAut], group: list[Monomial]) -> Iterator[tuple[str, Word]]:
    """(M0)-(M6) over the given Whitehead automorphisms and monomials."""
    yield from m0_relators(n, group)
    for w in whiteheads:
        inv = WhiteheadAut((w.A - {w.a}) | {-w.a}, -w.a)
        yield "M1", ((w, -1), (inv, -1))
    by_a: dict[int, list[WhiteheadAut]] = {}
    for w in whiteheads:
        by_a.setdefault(w.a, []).append(w)
    for group_a in by_a.values():
        for p, q in itertools.product(group_a, group_a):
            if p.A & q.A == {p.a}:
                yield "M2", ((p, 1), (q, 1), (WhiteheadAut(p.A | q.A, p.a), -1))
    seen: set[frozenset] = set()
    for p, q in itertools.product(whiteheads, whiteheads):
        if p.A & q.A or -p.a in q.A:
            continue
        if -q.a not in p.A:
            key = frozenset((p, q))
            if key not in seen:
                seen.add(key)
                yield "M3", commutator(((p, 1),), ((q, 1),))
        else:
            merged = WhiteheadAut((p.A | q.A) - {q.a}, p.a)
            yield "M4", ((p, 1), (q, 1), (merged, -1), (q, -1))
    for p in whiteheads:
        for b in sorted(p.A, key=letter_key):
            if b == p.a or -b in p.A:
                continue
            first = WhiteheadAut((p.A - {p.a}) | {-p.a}, b)
            last = WhiteheadAut((p.A - {b}) | {-b}, p.a)
            yield "M5", ((p, 1), (first, 1), (last, -1), (w_monomial(n, p.a, b), -1))
    for sigma in group:
        for w in whiteheads:
            yield "M6", ((sigma.inverse(), 1), (w, 1), (sigma, 1), (w.acted(sigma), -1))


def gersten_aut_relators(n: int, letters: list[NielsenLetter], group: list[Monomial]) -> Iterator[tuple[str, Word]]:
    """(S0)-(S5) over the given letters and monomials."""
    yield from (("S0", w) for _, w in m0_relators(n, group))
    allowed = set(letters)
    for r in gersten_relators(n):
        if r.family in ("R1", "R2", "R3") and all(g in allowed for g, _ in r.word):
            yield "S" + r.family[1], r.word
    for g in letters:
        a, b = g.tail, g.head
        # g = E_ba; S4 defines w_ab
        yield "S4", ((w_monomial(n, a, b), 1),) + word_inverse(
            ((NielsenLetter(b, a), 1), (NielsenLetter(-a, b), 1), (NielsenLetter(-b, -a), 1)))
    for sigma in group:
        for g in letters:
            image = NielsenLetter(sigma(g.head), sigma(g.tail))
            yield "S5", ((sigma.inverse(), 1), (g, 1), (sigma, 1), (image, -1))


# ---------------------------------------------------------------------------
# Presentations


@dataclass(frozen=True)
class PresRelator:
    family: str
    word: Word

    def tokens(self) -> list[str]:
        return [token(g, e) for g, e in self.word]


@dataclass(frozen=True)
class VerificationReport:
    total: int
    failed: tuple[PresRelator, ...]
    foreign: tuple[PresRelator, ...]
    moving_generators: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not (self.failed or self.foreign or self.moving_generators)


@dataclass(frozen=True)
class Presentation:
    group: str
    n: int
    generators: tuple[Generator, ...]
    relators: tuple[PresRelator, ...]
    k: int = 0
    flags: dict = field(default_factory=dict, compare=False)

    @cached_property
    def counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for r in self.relators:
            counts[r.family] = counts.get(r.family, 0) + 1
        return dict(sorted(counts.items()))

    def verify(self) -> VerificationReport:
        """Each relator is the identity on ``F_n``, uses only listed generators,
        and each generator fixes ``x_1..x_k``."""
        cache: dict[Generator, tuple[FinSuppAutomorphism, FinSuppAutomorphism]] = {}

        def auto(g: Generator, e: int) -> FinSuppAutomorphism:
            if g not in cache:
                f = generator_automorphism(g)
                cache[g] = (f, f.inverse())
            return cache[g][0 if e == 1 else 1]

        listed = set(self.generators)
        failed, foreign = [], []
        for r in self.relators:
            if any(g not in listed for g, _ in r.word):
                foreign.append(r)
                continue
            images = [x(j) for j in range(1, self.n + 1)]
            for g, e in r.word:
                f = auto(g, e)
                images = [f(w) for w in images]
            if any(w != x(j) for j, w in enumerate(images, 1)):
                failed.append(r)
        moving = tuple(str(g) for g in self.generators
                       if not all(generator_automorphism(g).image(j) == x(j) for j in range(1, self.k + 1)))
        return VerificationReport(len(self.relators), tuple(failed), tuple(foreign), moving)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "group": self.group,
            "n": self.n,
            "k": self.k,
            "generators": [str(g) for g in self.generators],
            "relators": [{"family": r.family, "word": r.tokens()} for r in self.relators],
            "counts": self.counts,
            "flags": self.flags,
        }

    @staticmethod
    def from_json(data: dict) -> "Presentation":
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported presentation schema {data.get('schema')!r}")
        gens = tuple(parse_token(t)[0] for t in data["generators"])
        rels = tuple(PresRelator(r["family"], tuple(parse_token(t) for t in r["word"])) for r in data["relators"])
        return Presentation(data["group"], int(data["n"]), gens, rels, int(data.get("k", 0)),
                            dict(data.get("flags", {})))


def _keep(pairs: Iterable[tuple[str, Word]], allowed: set) -> tuple[PresRelator, ...]:
    return tuple(PresRelator(f, w) for f, w in pairs if all(g in allowed for g, _ in w))


def _require_rank(n: int) -> None:
    if n < 2:
        raise ValueError("rank must be at least 2")


def gersten_saut_presentation(n: int) -> Presentation:
    _require_rank(n)
    gens = tuple(nielsen_generators(n))
    rels = tuple(PresRelator(r.family, r.word) for r in gersten_relators(n))
    return Presentation(f"SAut(F_{n})", n, gens, rels)


def gersten_aut_presentation(n: int) -> Presentation:
    _require_rank(n)
    letters = nielsen_generators(n)
    group = monomials(n)
    gens = tuple(letters) + tuple(group)
    return Presentation(f"Aut(F_{n})", n, gens, _keep(gersten_aut_relators(n, letters, group), set(gens)),
                        flags={"presentation": "Gersten"})


def mccool_presentation(n: int) -> Presentation:
    _require_rank(n)
    whiteheads, group = whitehead_automorphisms(n), monomials(n)
    gens = tuple(group) + tuple(whiteheads)
    return Presentation(f"Aut(F_{n})", n, gens, _keep(mccool_relators(n, whiteheads, group), set(gens)),
                        flags={"presentation": "McCool"})


def _require_stabilizer(n: int, k: int) -> None:
    _require_rank(n)
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")


def stabilizer_saut_presentation(n: int, k: int) -> Presentation:
    """Letters ``E_ab`` with ``|a| > k`` and the (R1)-(R5) instances using only them."""
    _require_stabilizer(n, k)
    gens = tuple(g for g in nielsen_generators(n) if abs(g.head) > k)
    rels = _keep(((r.family, r.word) for r in gersten_relators(n)), set(gens))
    return Presentation(f"St_SAut(F_{n})(x1..x{k})", n, gens, rels, k)


def stabilizer_aut_presentation(n: int, k: int) -> Presentation:
    """Monomials and Whitehead automorphisms fixing ``x_1..x_k``, with the
    (M0)-(M6) instances using only them.

    ``flags["M5_excluded_by_w"]`` counts (M5) instances whose Whitehead
    factors are all listed but whose ``w_ab`` is not.
    """
    _require_stabilizer(n, k)
    whiteheads, group = whitehead_automorphisms(n, k), monomials(n, k)
    gens = tuple(group) + tuple(whiteheads)
    allowed = set(gens)
    kept, excluded_by_w = [], 0
    for family, w in mccool_relators(n, whiteheads, group):
        missing = [g for g, _ in w if g not in allowed]
        if not missing:
            kept.append(PresRelator(family, w))
        elif family == "M5" and all(isinstance(g, Monomial) for g in missing):
            excluded_by_w += 1
    return Presentation(f"St_Aut(F_{n})(x1..x{k})", n, gens, tuple(kept), k,
                        flags={"presentation": "McCool", "M5_excluded_by_w": excluded_by_w})


def emit(group: str, n: int, k: int | None = None) -> Presentation:
    """Dispatch on ``SAut``, ``Aut`` (Gersten), ``McCool``, ``StabSAut``, ``StabAut``."""
    builders = {
        "SAut": lambda: gersten_saut_presentation(n),
        "Aut": lambda: gersten_aut_presentation(n),
        "McCool": lambda: mccool_presentation(n),
        "StabSAut": lambda: stabilizer_saut_presentation(n, _need_k(k)),
        "StabAut": lambda: stabilizer_aut_presentation(n, _need_k(k)),
    }
    if group not in builders:
        raise ValueError(f"unknown group {group!r}; choose from {', '.join(builders)}")
    return builders[group]()


def _need_k(k: int | None) -> int:
    if k is None:
        raise ValueError("stabilizer presentations need k")
    return k
