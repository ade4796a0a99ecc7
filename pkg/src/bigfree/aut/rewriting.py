"""Moving a single letter past a word, split and derived forms, and the
factorization of an admissible word into a kernel part times a word indexed by
the negative integers.

For ``alpha = E(x, y)`` and a word ``beta`` none of whose heads is ``x^±`` or
``y^±``, the word ``beta_alpha`` is obtained by the replacements

    E(z, x)    ->  E(z, y^-1) E(z, x)
    E(z, x^-1) ->  E(z, x^-1) E(z, y)

and ``alpha beta = beta_alpha alpha`` as automorphisms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from ..verdict import BudgetExceeded
from ..words import (
    EMPTY,
    Affine,
    Explicit,
    LetterTemplate,
    NielsenLetter,
    Pattern,
    Position,
    Segment,
    TransfiniteWord,
    _rows_to_segments,
    concat,
    invert,
    restrict_open,
    word,
)
from .admissible import (
    DEFAULT_BUDGET,
    NielsenWord,
    PsiEvaluator,
    backward_chain_bound,
    filtration_level,
    kernel_check,
    support_closure,
)


class AdmissibilityViolation(ValueError):
    """``beta`` has a letter whose head is a generator of ``alpha``."""

    def __init__(self, alpha: NielsenLetter, letter: NielsenLetter):
        super().__init__(f"{letter} has a head among the generators of {alpha}")
        self.alpha = alpha
        self.letter = letter


def _rewrite_letter(alpha: NielsenLetter, letter: NielsenLetter) -> list[NielsenLetter]:
    xh, y = alpha.head, alpha.tail
    if abs(letter.head) in (abs(xh), abs(y)):
        raise AdmissibilityViolation(alpha, letter)
    z, t = letter.head, letter.tail
    if t == xh:
        return [NielsenLetter(z, -y), letter]
    if t == -xh:
        return [letter, NielsenLetter(z, y)]
    return [letter]


def _sign(v: int) -> int:
    return 1 if v > 0 else -1


def _rewrite_template(alpha: NielsenLetter, t: LetterTemplate) -> list[LetterTemplate]:
    xh, y = alpha.head, alpha.tail
    if not (t.second.is_constant and t.second.offset == abs(xh)):
        return [t]
    extra = Affine(0, abs(y))
    if t.second_sign == _sign(xh):
        return [LetterTemplate("E", t.first, extra, t.first_sign, -_sign(y)), t]
    return [t, LetterTemplate("E", t.first, extra, t.first_sign, _sign(y))]


def _pattern_violation(alpha: NielsenLetter, seg: Pattern) -> NielsenLetter | None:
    view = seg.mview
    for t in view.block:
        for target in (abs(alpha.head), abs(alpha.tail)):
            if t.first.is_constant:
                if t.first.offset == target:
                    return t.at(view.lo if view.lo is not None else view.hi)
                continue
            m = t.first.solve(target)
            if m is not None and view.contains(m):
                return t.at(m)
    return None


def _hit_rows(alpha: NielsenLetter, seg: Pattern) -> list[int]:
    """Order coordinates of rows in which a nonconstant tail equals ``x^±``."""
    view = seg.mview
    rows = set()
    for t in view.block:
        if t.second.is_constant:
            continue
        m = t.second.solve(abs(alpha.head))
        if m is not None and view.contains(m):
            rows.add(m)
    return sorted(rows)


def _rewrite_segment(alpha: NielsenLetter, seg: Segment) -> list[Segment]:
    if isinstance(seg, Explicit):
        return [Explicit(tuple(l for letter in seg.letters for l in _rewrite_letter(alpha, letter)))]
    bad = _pattern_violation(alpha, seg)
    if bad is not None:
        raise AdmissibilityViolation(alpha, bad)
    rows = _hit_rows(alpha, seg)
    pieces: list[Segment] = []
    lo: int | None = None
    for m in rows:
        pieces += _rows_to_segments(seg, lo, m - 1)
        pieces += _rows_to_segments(seg, m, m)
        lo = m + 1
    pieces += _rows_to_segments(seg, lo, None) if rows else [seg]
    out: list[Segment] = []
    for piece in pieces:
        if isinstance(piece, Explicit):
            out += _rewrite_segment(alpha, piece)
        else:
            block = tuple(nt for t in piece.block for nt in _rewrite_template(alpha, t))
            out.append(Pattern(piece.order, block, piece.start))
    return out


def is_alpha_admissible(alpha: NielsenLetter, beta: TransfiniteWord) -> bool:
    try:
        beta_alpha(alpha, beta)
    except AdmissibilityViolation:
        return False
    return True


def beta_alpha(alpha: NielsenLetter, beta: TransfiniteWord) -> TransfiniteWord:
    """The rewritten word ``beta_alpha``; raises :class:`AdmissibilityViolation`."""
    if beta.alphabet not in (None, "E"):
        raise ValueError("expected a word over Nielsen letters")
    return TransfiniteWord(tuple(s for seg in beta.segments for s in _rewrite_segment(alpha, seg)))


def relator_alpha_beta(alpha: NielsenLetter, beta: TransfiniteWord) -> TransfiniteWord:
    """The kernel word ``alpha beta alpha^-1 beta_alpha^-1``."""
    return concat(word(alpha), beta, word(alpha.inverse()), invert(beta_alpha(alpha, beta)))


# ---------------------------------------------------------------------------
# Split and derived forms


@dataclass(frozen=True)
class DerivedForm:
    """``f = delta alpha beta`` split at the last closure position of ``x_level``,
    rewritten as ``f = r fbar alpha``."""

    level: int
    n_plus: int
    s_plus: Position
    delta: TransfiniteWord
    alpha: NielsenLetter
    beta: TransfiniteWord
    beta_alpha: TransfiniteWord
    r: TransfiniteWord
    fbar: TransfiniteWord


def split_form(w: TransfiniteWord, budget: int = DEFAULT_BUDGET) -> tuple[TransfiniteWord, NielsenLetter, TransfiniteWord]:
    form = derived_form(w, budget)
    return form.delta, form.alpha, form.beta


def derived_form(w: TransfiniteWord, budget: int = DEFAULT_BUDGET) -> DerivedForm:
    level = filtration_level(w)
    if w.is_empty:
        raise ValueError("the empty word has no split form")
    closure = support_closure(w, int(level), budget)
    s_plus = closure.positions[-1]
    delta = restrict_open(w, None, s_plus)
    alpha = w.letter_at(s_plus)
    beta = restrict_open(w, s_plus, None)
    rewritten = beta_alpha(alpha, beta)
    r = concat(delta, relator_alpha_beta(alpha, beta), invert(delta))
    return DerivedForm(int(level), closure.n_plus, s_plus, delta, alpha, beta, rewritten, r,
                       concat(delta, rewritten))


# ---------------------------------------------------------------------------
# Iterated derived forms


@dataclass(frozen=True)
class StageCheck:
    """Checks made after one derived-form step."""

    stage: int
    level: int
    n_plus: int
    splitf: bool
    level_drop: bool
    relator_level: bool
    relator_kernel: bool
    alpha_level: bool
    chain_monotone: bool

    @property
    def ok(self) -> bool:
        return all((self.splitf, self.level_drop, self.relator_level, self.relator_kernel,
                    self.alpha_level, self.chain_monotone))


@dataclass(frozen=True)
class Factorization:
    """``f = (r1 ... rd) residual (alpha_d ... alpha_1)`` with per-stage checks."""

    relators: tuple[TransfiniteWord, ...]
    alphas: tuple[NielsenLetter, ...]  # alpha_1, alpha_2, ...
    residual: TransfiniteWord
    stages: tuple[StageCheck, ...] = field(default=())

    @property
    def tail_word(self) -> TransfiniteWord:
        """``alpha_d ... alpha_1`` in position order."""
        return word(*reversed(self.alphas)) if self.alphas else EMPTY

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.stages)


def _psi_agree(a: TransfiniteWord, b: TransfiniteWord, n: int, budget: int) -> bool:
    pa, pb = PsiEvaluator(a, budget), PsiEvaluator(b, budget)
    return all(pa.image(k) == pb.image(k) for k in range(1, n + 1))


def factor_ra(w: TransfiniteWord, depth: int, check_gens: int = 12, probe_gens: Iterable[int] = range(1, 11),
              budget: int = DEFAULT_BUDGET) -> Factorization:
    """Iterate derived forms ``depth`` times, checking every stage.

    Each stage checks the reassembly identity on ``x_1..x_check_gens``; the
    level and closure-count decrease; that the relator and the moved letter
    live at the current level; that the relator acts trivially; and that the
    longest backward chain of ``f^(k) gamma^(k)`` never grows on the probes.
    """
    probes = list(probe_gens)
    current = w
    relators: list[TransfiniteWord] = []
    alphas: list[NielsenLetter] = []
    stages: list[StageCheck] = []
    previous_m = {p: backward_chain_bound(w, p, budget) for p in probes}
    for stage in range(1, depth + 1):
        if current.is_empty:
            break
        form = derived_form(current, budget)
        relators.append(form.r)
        alphas.append(form.alpha)
        nxt = form.fbar
        gamma = word(*reversed(alphas))
        rebuilt = concat(*relators, nxt, gamma)
        next_level = filtration_level(nxt)
        if form.n_plus > 1:
            drop = next_level == form.level and support_closure(nxt, form.level, budget).n_plus == form.n_plus - 1
        else:
            drop = next_level > form.level
        combined = concat(nxt, gamma)
        try:
            current_m = {p: backward_chain_bound(combined, p, budget) for p in probes}
            monotone = all(current_m[p] <= previous_m[p] for p in probes)
        except BudgetExceeded:
            current_m, monotone = previous_m, False
        stages.append(StageCheck(
            stage=stage,
            level=form.level,
            n_plus=form.n_plus,
            splitf=_psi_agree(w, rebuilt, check_gens, budget),
            level_drop=drop,
            relator_level=filtration_level(form.r) >= form.level,
            relator_kernel=kernel_check(form.r, check_gens, budget),
            alpha_level=abs(form.alpha.head) >= form.level,
            chain_monotone=monotone,
        ))
        previous_m = current_m
        current = nxt
    return Factorization(tuple(relators), tuple(alphas), current, tuple(stages))


def oberwolfach_word(t: int) -> TransfiniteWord:
    """``E(1,2) E(1,t) E(t,-2) E(1,-t) E(t,2)``: a kernel word that agrees with
    ``E(1,2)`` on the letters over indices 1 and 2."""
    if t < 3:
        raise ValueError("t must be at least 3")
    return word(NielsenLetter(1, 2), NielsenLetter(1, t), NielsenLetter(t, -2),
                NielsenLetter(1, -t), NielsenLetter(t, 2))

