"""Automorphisms of free groups acting on the right.

``E(h, t)`` sends the signed generator ``h`` to ``h * t`` and fixes every
other generator.  A sequence of letters acts letter by letter in position
order: ``x (E1 E2) = (x E1) E2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..freegroup import FreeWord, NielsenMove, nielsen_reduce, x
from ..words import NielsenLetter


def letter_images(letter: NielsenLetter) -> dict[int, FreeWord]:
    """The nontrivial generator image of a single letter."""
    h, t = letter.head, letter.tail
    k = abs(h)
    if h > 0:
        return {k: FreeWord((k, t))}
    return {k: FreeWord((-t, k))}


def apply_letter(w: FreeWord, letter: NielsenLetter) -> FreeWord:
    return w.substitute(letter_images(letter))


def apply_letters(w: FreeWord, letters: Iterable[NielsenLetter]) -> FreeWord:
    for letter in letters:
        w = apply_letter(w, letter)
    return w


@dataclass(frozen=True)
class FinSuppAutomorphism:
    """An automorphism of ``F_omega`` moving finitely many generators.

    ``images`` maps an index ``k`` to the image of ``x_k``; absent indices are
    fixed.  Construction drops trivial entries.  Invertibility is witnessed by
    :meth:`inverse`, which reduces the image tuple to a signed basis.
    """

    images: Mapping[int, FreeWord]

    def __post_init__(self) -> None:
        clean = {k: w for k, w in self.images.items() if w != x(k)}
        if any(k < 1 for k in clean):
            raise ValueError("generator indices are positive")
        object.__setattr__(self, "images", dict(sorted(clean.items())))

    @staticmethod
    def identity() -> "FinSuppAutomorphism":
        return FinSuppAutomorphism({})

    @staticmethod
    def from_letters(letters: Iterable[NielsenLetter]) -> "FinSuppAutomorphism":
        result = FinSuppAutomorphism.identity()
        for letter in letters:
            result = result.then(FinSuppAutomorphism(letter_images(letter)))
        return result

    @staticmethod
    def from_tuple(entries: Sequence[FreeWord]) -> "FinSuppAutomorphism":
        """``x_k -> entries[k-1]``; the tuple must be a basis (checked)."""
        alpha = FinSuppAutomorphism({k: w for k, w in enumerate(entries, 1)})
        alpha.inverse()
        return alpha

    @property
    def support(self) -> int:
        """The largest index moved (0 for the identity)."""
        return max(self.images, default=0)

    @property
    def rank(self) -> int:
        """Smallest ``N`` such that the restriction to ``F_N`` is an automorphism of ``F_N``."""
        return max([self.support] + [w.max_index for w in self.images.values()])

    def image(self, k: int) -> FreeWord:
        return self.images.get(k, x(k))

    def __call__(self, w: FreeWord) -> FreeWord:
        return w.substitute(self.images)

    def then(self, other: "FinSuppAutomorphism") -> "FinSuppAutomorphism":
        """First ``self``, then ``other`` (right action)."""
        keys = set(self.images) | set(other.images)
        return FinSuppAutomorphism({k: other(self.image(k)) for k in keys})

    def __mul__(self, other: "FinSuppAutomorphism") -> "FinSuppAutomorphism":
        return self.then(other)

    def tuple(self, n: int | None = None) -> tuple[FreeWord, ...]:
        n = self.rank if n is None else n
        return tuple(self.image(k) for k in range(1, n + 1))

    def nielsen_basis(self) -> tuple[tuple[FreeWord, ...], list[NielsenMove]]:
        """Reduce the image tuple on ``x_1..x_N``; the result is a signed basis."""
        reduced, moves = nielsen_reduce(self.tuple())
        if any(len(w) != 1 for w in reduced):
            raise ValueError("images do not form a basis: Nielsen reduction stops at " +
                             ", ".join(str(w) for w in reduced))
        return reduced, moves

    def inverse(self) -> "FinSuppAutomorphism":
        reduced, moves = self.nielsen_basis()
        # X alpha --moves--> X pi with pi monomial; so alpha^-1 = pi^-1 E_q ... E_1.
        pi_inv = MonomialAutomorphism({k: w.letters[0] for k, w in enumerate(reduced, 1)}).inverse()
        letters = [move_letter(m) for m in reversed(moves)]
        return pi_inv.as_fin_supp().then(FinSuppAutomorphism.from_letters(letters))

    def norm(self) -> int:
        """``max |x alpha|`` over all generators (1 when nothing grows)."""
        return max([1] + [len(w) for w in self.images.values()])

    def agrees_on(self, other: "FinSuppAutomorphism", n: int) -> bool:
        return all(self.image(k) == other.image(k) for k in range(1, n + 1))

    def is_identity(self) -> bool:
        return not self.images

    def __str__(self) -> str:
        if not self.images:
            return "id"
        return ", ".join(f"x{k} -> {w}" for k, w in self.images.items())


def move_letter(move: NielsenMove) -> NielsenLetter:
    """The letter ``E(x_i^eps, x_j^tau)`` matching the move ``T_{i^eps j^tau}``."""
    eps, tau = move.signs
    return NielsenLetter(eps * move.i, tau * move.j)


@dataclass(frozen=True)
class MonomialAutomorphism:
    """A signed permutation of generators with finite support.

    ``mapping[k] = s`` means ``x_k -> x_|s|^sign(s)``.  With ``zigzag_shift``
    the automorphism first applies the infinite cycle ``x_z(j) -> x_z(j+1)``
    over all ``j`` in Z (see :func:`zigzag`) and then the finite part.
    """

    mapping: Mapping[int, int]
    zigzag_shift: bool = False

    def __post_init__(self) -> None:
        clean = {k: s for k, s in self.mapping.items() if s != k}
        targets = sorted(abs(s) for s in clean.values())
        if targets != sorted(clean) or any(s == 0 for s in clean.values()):
            raise ValueError("monomial map is not a signed permutation")
        object.__setattr__(self, "mapping", dict(sorted(clean.items())))

    @staticmethod
    def swap_pair(a: int, b: int) -> "MonomialAutomorphism":
        """``w_ab`` on indices: ``x_a -> x_b^-1``, ``x_b -> x_a`` (signed ``a``, ``b``)."""
        m = _signed_map({a: -b, b: a})
        return MonomialAutomorphism(m)

    def __call__(self, g: int) -> int:
        """Image of a signed generator."""
        k = abs(g)
        if self.zigzag_shift:
            k = zigzag(unzigzag(k) + 1)
        s = self.mapping.get(k, k)
        return s if g > 0 else -s

    def inverse(self) -> "MonomialAutomorphism":
        if self.zigzag_shift:
            raise ValueError("inverse of the zigzag cycle is not represented")
        inv: dict[int, int] = {}
        for k, s in self.mapping.items():
            inv[abs(s)] = k if s > 0 else -k
        return MonomialAutomorphism(inv)

    def then(self, other: "MonomialAutomorphism") -> "MonomialAutomorphism":
        if self.zigzag_shift or other.zigzag_shift:
            raise ValueError("composition with the zigzag cycle is not represented")
        keys = set(self.mapping) | set(other.mapping)
        return MonomialAutomorphism({k: other(self(k)) for k in keys})

    def as_fin_supp(self) -> FinSuppAutomorphism:
        if self.zigzag_shift:
            raise ValueError("the zigzag cycle has infinite support")
        return FinSuppAutomorphism({k: x(s) for k, s in self.mapping.items()})

    def apply(self, w: FreeWord) -> FreeWord:
        return FreeWord(self(g) for g in w)

    def determinant(self) -> int:
        """Determinant of the induced signed permutation matrix."""
        if self.zigzag_shift:
            raise ValueError("the zigzag cycle has no determinant")
        sign = 1
        seen: set[int] = set()
        for k, s in self.mapping.items():
            if s < 0:
                sign = -sign
            if k in seen:
                continue
            length, j = 0, k
            while j not in seen:
                seen.add(j)
                j = abs(self.mapping.get(j, j))
                length += 1
            if length % 2 == 0:
                sign = -sign
        return sign


def _signed_map(m: Mapping[int, int]) -> dict[int, int]:
    out: dict[int, int] = {}
    for g, s in m.items():
        out[abs(g)] = s if g > 0 else -s
    return out


def zigzag(j: int) -> int:
    """The bijection Z -> N: 0, 1, -1, 2, -2, ... go to 1, 2, 3, 4, 5, ..."""
    return 2 * j if j >= 1 else 1 - 2 * j


def unzigzag(k: int) -> int:
    if k < 1:
        raise ValueError("generator indices are positive")
    return k // 2 if k % 2 == 0 else -(k - 1) // 2
