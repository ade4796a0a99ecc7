"""Writing automorphisms as Nielsen words.

* :func:`decompose_automorphism` writes a finite-support automorphism as a
  monomial automorphism followed by a finite Nielsen word, reading the word off
  a Nielsen reduction of the images of the inverse.
* :func:`monomial_to_nielsen_word` realizes monomial automorphisms, including
  the infinite cycle ``x_z(j) -> x_z(j+1)`` and single inversions, which need
  infinite words.
* :func:`express_in_stabilizer_generators` writes an automorphism fixing
  ``x_1..x_k`` with letters whose heads lie above ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..freegroup import NielsenMove, nielsen_reduce, x
from ..words import (
    EMPTY,
    Affine,
    LetterTemplate,
    NielsenLetter,
    Order,
    Pattern,
    TransfiniteWord,
    concat,
    invert,
    word,
)
from .automorphism import FinSuppAutomorphism, MonomialAutomorphism, move_letter, zigzag


def w_letters(a: int, b: int) -> tuple[NielsenLetter, ...]:
    """``w_ab = E(b,a) E(a^-1,b) E(b^-1,a)^-1`` for signed generators ``a``, ``b``."""
    return (NielsenLetter(b, a), NielsenLetter(-a, b), NielsenLetter(-b, a).inverse())


def w_letters_variant(a: int, b: int) -> tuple[NielsenLetter, ...]:
    """The second printed form ``E(b,a) E(a^-1,b) E(b^-1,a^-1)``."""
    return (NielsenLetter(b, a), NielsenLetter(-a, b), NielsenLetter(-b, -a))


# ---------------------------------------------------------------------------
# Finite-support automorphisms


@dataclass(frozen=True)
class Decomposition:
    """``alpha = sigma`` followed by ``letters`` (in position order)."""

    sigma: MonomialAutomorphism
    letters: tuple[NielsenLetter, ...]
    moves: tuple[NielsenMove, ...]

    def automorphism(self) -> FinSuppAutomorphism:
        return self.sigma.as_fin_supp().then(FinSuppAutomorphism.from_letters(self.letters))


def decompose_automorphism(alpha: FinSuppAutomorphism, target_n: int | None = None) -> Decomposition:
    """Reduce ``X alpha^-1`` to a signed basis ``X pi``; then ``alpha = pi^-1 E_q ... E_1``.

    The result is checked against ``alpha`` on ``x_1..x_target_n``.
    """
    n = alpha.rank
    target_n = max(n, target_n or 0)
    start = alpha.inverse().tuple(n)
    reduced, moves = nielsen_reduce(start)
    if any(len(v) != 1 for v in reduced):
        raise ValueError("images of the inverse do not reduce to a basis")
    pi = MonomialAutomorphism({k: v.letters[0] for k, v in enumerate(reduced, 1)})
    result = Decomposition(pi.inverse(), tuple(move_letter(m) for m in reversed(moves)), tuple(moves))
    if not result.automorphism().agrees_on(alpha, target_n):
        raise AssertionError("decomposition does not reproduce the automorphism")
    return result


# ---------------------------------------------------------------------------
# Monomial automorphisms


def _monomial_atoms(pi: MonomialAutomorphism) -> tuple[list[tuple[int, int]], int | None]:
    """Pairs ``(a, b)`` with ``pi w_a1b1 w_a2b2 ... = iota`` where ``iota`` inverts
    at most one generator (returned as its index, or ``None``)."""
    current = dict(pi.mapping)
    atoms: list[tuple[int, int]] = []
    keys = sorted(current)

    def apply(a: int, b: int) -> None:
        w = MonomialAutomorphism.swap_pair(a, b)
        for k in set(current) | {abs(a), abs(b)}:
            s = current.get(k, k)
            current[k] = w(s)

    for pos, k in enumerate(keys):
        s = current.get(k, k)
        if abs(s) != k:
            atoms.append((abs(s), k))
            apply(abs(s), k)
        if current.get(k, k) == -k:
            later = [m for m in keys[pos + 1:]]
            if not later:
                return atoms, k
            atoms += [(k, later[0])] * 2
            apply(k, later[0])
            apply(k, later[0])
    return atoms, None


def inversion_word(index: int) -> TransfiniteWord:
    """An infinite word inverting ``x_index`` only: pair inversions on
    ``(i, i+1), (i+2, i+3), ...`` followed by ``(i+1, i+2), (i+3, i+4), ...``."""
    words = []
    for shift in (0, 1):
        a, b = Affine(2, index + shift), Affine(2, index + shift + 1)
        block = [LetterTemplate("E", b, a), LetterTemplate("E", a, b, -1, 1), LetterTemplate("E", b, a, -1, -1)]
        words.append(TransfiniteWord((Pattern(Order.OMEGA, tuple(block * 2), 0),)))
    return concat(*words)


def finite_monomial_word(pi: MonomialAutomorphism) -> TransfiniteWord:
    """A Nielsen word inducing a finite signed permutation."""
    atoms, leftover = _monomial_atoms(pi)
    parts = [invert(word(*w_letters(a, b))) for a, b in reversed(atoms)]
    if leftover is not None:
        # pi = iota_leftover (atoms)^-1; realize iota by an infinite word
        parts.insert(0, inversion_word(leftover))
    return concat(*parts) if parts else EMPTY


def eight_letter_block(i: int, relabel: Callable[[int], int] = zigzag) -> tuple[NielsenLetter, ...]:
    """Eight letters inducing ``x_-i -> x_(i+1) -> x_-(i+1) -> x_-i`` on Z-indexed
    generators, relabelled into positive indices by ``relabel``."""
    a, b, c = relabel(-i), relabel(i + 1), relabel(-(i + 1))
    return (NielsenLetter(c, a), NielsenLetter(-c, a), NielsenLetter(-c, b), NielsenLetter(-b, -c),
            NielsenLetter(c, -b), NielsenLetter(b, -a), NielsenLetter(-a, -b), NielsenLetter(b, -a))


def zigzag_cycle_word() -> TransfiniteWord:
    """The omega product of eight-letter blocks: ``x_z(j) -> x_z(j+1)`` for all ``j``."""
    a, b, c = Affine(2, 1), Affine(2, 2), Affine(2, 3)
    rows = [(c, 1, a, 1), (c, -1, a, 1), (c, -1, b, 1), (b, -1, c, -1),
            (c, 1, b, -1), (b, 1, a, -1), (a, -1, b, -1), (b, 1, a, -1)]
    block = tuple(LetterTemplate("E", h, t, hs, ts) for h, hs, t, ts in rows)
    return TransfiniteWord((Pattern(Order.OMEGA, block, 0),))


def monomial_to_nielsen_word(sigma: MonomialAutomorphism) -> TransfiniteWord:
    """A word whose induced automorphism is ``sigma``."""
    finite = finite_monomial_word(MonomialAutomorphism(sigma.mapping))
    if sigma.zigzag_shift:
        return concat(zigzag_cycle_word(), finite)
    return finite


# ---------------------------------------------------------------------------
# Stabilizers


@dataclass(frozen=True)
class StabilizerWord:
    """``phi = letters`` followed by ``residue`` (identity or a single inversion)."""

    letters: tuple[NielsenLetter, ...]
    residue: MonomialAutomorphism

    def automorphism(self) -> FinSuppAutomorphism:
        return FinSuppAutomorphism.from_letters(self.letters).then(self.residue.as_fin_supp())


def express_in_stabilizer_generators(phi: FinSuppAutomorphism, n: int, k: int) -> StabilizerWord:
    """Letters ``E(a, b)`` with ``|a| > k`` (and possibly one inversion above ``k``) giving ``phi``."""
    if phi.rank > n:
        raise ValueError(f"automorphism moves generators beyond x{n}")
    moved = [j for j in range(1, k + 1) if phi.image(j) != x(j)]
    if moved:
        raise ValueError(f"automorphism moves x{moved[0]}, which should be fixed")
    reduced, moves = nielsen_reduce(phi.tuple(n))
    if any(len(v) != 1 for v in reduced):
        raise ValueError("images do not form a basis")
    if any(m.i <= k for m in moves):
        raise AssertionError("a fixed entry changed during reduction")
    # X phi --moves--> X pi, so phi = E_1^-1 ... E_q^-1 pi
    letters = [move_letter(m).inverse() for m in moves]
    pi = MonomialAutomorphism({j: v.letters[0] for j, v in enumerate(reduced, 1)})
    atoms, leftover = _monomial_atoms(pi)
    for a, b in reversed(atoms):
        letters += [l.inverse() for l in reversed(w_letters(a, b))]
    rest = FinSuppAutomorphism.from_letters(letters).inverse().then(phi)
    if any(len(v) != 1 for v in rest.images.values()):
        raise AssertionError("residue after the letters is not monomial")
    residue = MonomialAutomorphism({j: v.letters[0] for j, v in rest.images.items()})
    result = StabilizerWord(tuple(letters), residue)
    if not result.automorphism().agrees_on(phi, n) or any(abs(l.head) <= k for l in letters):
        raise AssertionError("stabilizer word does not reproduce the automorphism")
    return result
