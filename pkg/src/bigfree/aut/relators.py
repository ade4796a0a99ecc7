"""Gersten's relator families for ``SAut(F_n)`` over elementary Nielsen
generators, and the ``w_ab`` diagnostic.

A relator is a word over generators ``E_ab`` with exponents ``±1``; the
relation ``U = V`` is stored as ``U V^-1``.  Commutators are
``[g, h] = g h g^-1 h^-1`` under the right action.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..words import NielsenLetter
from .automorphism import FinSuppAutomorphism, MonomialAutomorphism
from .decompose import w_letters, w_letters_variant

GenPower = tuple[NielsenLetter, int]


def signed_generators(n: int) -> list[int]:
    """``X_n^±`` as signed indices ``1, -1, 2, -2, ...``."""
    return [s for k in range(1, n + 1) for s in (k, -k)]


def nielsen_generators(n: int) -> list[NielsenLetter]:
    """All ``E_ab`` with ``a, b`` in ``X_n^±`` and ``b != a^±``."""
    syms = signed_generators(n)
    return [NielsenLetter(a, b) for a in syms for b in syms if abs(a) != abs(b)]


def word_inverse(w: tuple[GenPower, ...]) -> tuple[GenPower, ...]:
    return tuple((g, -e) for g, e in reversed(w))


def commutator(g: tuple[GenPower, ...], h: tuple[GenPower, ...]) -> tuple[GenPower, ...]:
    return g + h + word_inverse(g) + word_inverse(h)


def w_word(a: int, b: int) -> tuple[GenPower, ...]:
    """``w_ab = E_ba E_(a^-1)b E_(b^-1)a^-1`` over generators with exponents."""
    return ((NielsenLetter(b, a), 1), (NielsenLetter(-a, b), 1), (NielsenLetter(-b, a), -1))


def evaluate(w: tuple[GenPower, ...]) -> FinSuppAutomorphism:
    result = FinSuppAutomorphism.identity()
    for g, e in w:
        letter = g if e == 1 else g.inverse()
        result = result.then(FinSuppAutomorphism.from_letters([letter]))
    return result


def sigma_of_w(a: int, b: int) -> MonomialAutomorphism:
    """The monomial map ``a -> b^-1, b -> a`` on signed generators."""
    return MonomialAutomorphism.swap_pair(a, b)


@dataclass(frozen=True)
class Relator:
    family: str
    word: tuple[GenPower, ...]


def gersten_relators(n: int) -> list[Relator]:
    """Every instance of (R1)-(R5) for ``SAut(F_n)`` satisfying the side conditions.

    Symmetric (R2) instances ``[g, h]`` and ``[h, g]`` are kept once.
    """
    if n < 2:
        raise ValueError("rank must be at least 2")
    gens = nielsen_generators(n)
    out: list[Relator] = []
    for g in gens:
        out.append(Relator("R1", ((g, -1), (NielsenLetter(g.head, -g.tail), -1))))
    seen: set[frozenset] = set()
    for g, h in itertools.product(gens, gens):
        a, b, c, d = g.head, g.tail, h.head, h.tail
        if a in (c, d, -d) or b in (c, -c):
            continue
        key = frozenset((g, h))
        if key in seen:
            continue
        seen.add(key)
        out.append(Relator("R2", commutator(((g, 1),), ((h, 1),))))
    for g, h in itertools.product(gens, gens):
        a, b, c = g.head, g.tail, h.tail
        if h.head != b or abs(a) == abs(c):
            continue
        out.append(Relator("R3", commutator(((g, 1),), ((h, 1),)) + ((NielsenLetter(a, c), -1),)))
    for p in gens:
        a, b = p.head, p.tail
        w = w_word(a, b)
        sigma = sigma_of_w(a, b)
        for g in gens:
            image = NielsenLetter(sigma(g.head), sigma(g.tail))
            out.append(Relator("R4", word_inverse(w) + ((g, 1),) + w + ((image, -1),)))
        out.append(Relator("R5", w * 4))
    return out


def kills(relator: Relator, n: int) -> bool:
    return evaluate(relator.word).agrees_on(FinSuppAutomorphism.identity(), n)


@dataclass(frozen=True)
class WDiagnostic:
    """Which printed form of ``w_ab`` induces ``a -> b^-1, b -> a``."""

    a: int
    b: int
    primary_ok: bool
    variant_ok: bool
    forms_agree: bool


def w_diagnostic(n: int) -> list[WDiagnostic]:
    out = []
    syms = signed_generators(n)
    for a, b in itertools.product(syms, syms):
        if abs(a) == abs(b):
            continue
        target = sigma_of_w(a, b).as_fin_supp()
        primary = FinSuppAutomorphism.from_letters(w_letters(a, b))
        variant = FinSuppAutomorphism.from_letters(w_letters_variant(a, b))
        out.append(WDiagnostic(a, b, primary.agrees_on(target, n), variant.agrees_on(target, n),
                               primary.agrees_on(variant, n)))
    return out
