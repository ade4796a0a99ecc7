import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bigfree.cli.dsl import parse_word
from bigfree.words import (
    EMPTY,
    CancellationPairing,
    E,
    Explicit,
    LetterTemplate,
    MirrorBlock,
    Order,
    Pattern,
    PatternFamily,
    T,
    TransfiniteWord,
    cancel_check,
    concat,
    infinite_product,
    invert,
    project_to_subalphabet,
    reduce_finite,
    restrict,
    restrict_open,
    word,
)

from .strategies import mixed_words, nielsen_letters, nielsen_patterns, transposition_patterns, transpositions

SHIFT = "prod n = 0 to inf { T(-n, n+1) T(-n, -(n+1)) }"

t_words = mixed_words(transpositions, transposition_patterns())
e_words = mixed_words(nielsen_letters(), nielsen_patterns())


def expand(w: TransfiniteWord, rows: int = 20) -> list:
    """Letters of ``rows`` rows of every segment nearest its finite end, in position order."""
    out = []
    for s, seg in enumerate(w.segments):
        if isinstance(seg, Explicit):
            out += list(seg.letters)
            continue
        view = seg.mview
        if view.lo is not None:
            ms = range(view.lo, view.lo + rows)
        elif view.hi is not None:
            ms = range(view.hi - rows + 1, view.hi + 1)
        else:
            ms = range(-(rows // 2), rows - rows // 2)
        out += [w.letter_at((s, m, k)) for m in ms for k in range(len(seg.block))]
    return out


def small_alphabet(kind: str, indices) -> set:
    if kind == "T":
        return {T(a, b) for a, b in itertools.permutations(indices, 2)}
    signed = [s for k in indices for s in (k, -k)]
    return {E(a, b) for a in signed for b in signed if abs(a) != abs(b)}


# concat


def test_concat_with_empty_word_is_identity():
    w = word(T(1, 2), T(2, 3))
    assert concat(EMPTY, w) == w and concat(w, EMPTY) == w


def test_concat_of_finite_words_merges_runs():
    assert concat(word(T(1, 2)), word(T(2, 3))) == word(T(1, 2), T(2, 3))


def test_shift_word_times_inverse_cancels_by_mirror_pairing():
    w = parse_word(SHIFT)
    f = concat(w, invert(w))
    pairing = CancellationPairing.from_pairs((), [MirrorBlock(0, 1, 2)])
    assert cancel_check(f, EMPTY, pairing)


def test_concat_rejects_mixed_alphabets():
    with pytest.raises(ValueError):
        concat(word(T(1, 2)), word(E(1, 2)))


# invert


def test_invert_single_nielsen_letter():
    assert invert(word(E(1, 2))) == word(E(1, -2))


@given(st.one_of(t_words, e_words))
def test_invert_is_an_involution(w):
    assert invert(invert(w)) == w


def test_invert_omega_pattern_gives_omega_star_pattern():
    w = TransfiniteWord((Pattern(Order.OMEGA, (LetterTemplate("T", (-1, 0), (1, 1)),), 0),))
    inv = invert(w)
    (seg,) = inv.segments
    assert seg.order is Order.OMEGA_STAR and seg.start == 0
    assert seg.block == (LetterTemplate("T", (1, 1), (-1, 0)),)
    # rows nearest the finite end: inverse letters of the first 20 rows in reverse order
    forward = [T(-n, n + 1) for n in range(20)]
    assert expand(inv)[-20:] == [l.inverse() for l in reversed(forward)]


# projection


def test_projection_to_empty_alphabet_is_empty():
    assert project_to_subalphabet(parse_word(SHIFT), set()) == ()


def test_projection_of_shift_word_to_points_zero_and_one():
    assert project_to_subalphabet(parse_word(SHIFT), {T(0, 1), T(1, 0)}) == (T(0, 1),)


def test_constant_pattern_template_is_rejected():
    with pytest.raises(ValueError):
        Pattern(Order.OMEGA, (LetterTemplate("E", (0, 1), (0, 2)),), 0)


def test_projection_requires_inverse_closed_alphabet():
    with pytest.raises(ValueError):
        project_to_subalphabet(word(T(1, 2)), {T(1, 2)})


@given(t_words, st.sets(st.integers(-4, 4), min_size=2, max_size=4))
def test_projection_of_inverse_is_reversed_inverse_projection(w, pts):
    A = small_alphabet("T", pts)
    direct = project_to_subalphabet(w, A)
    assert project_to_subalphabet(invert(w), A) == tuple(l.inverse() for l in reversed(direct))


@given(e_words, st.sets(st.integers(1, 5), min_size=3, max_size=4))
def test_projections_are_compatible_along_nested_alphabets(w, indices):
    B = small_alphabet("E", indices)
    A = small_alphabet("E", sorted(indices)[:2])
    via_b = reduce_finite(l for l in reduce_finite(project_to_subalphabet(w, B)) if l in A)
    assert via_b == reduce_finite(project_to_subalphabet(w, A))


# cancellation


def test_full_cancellation_of_letter_and_inverse():
    f = word(T(1, 2), T(2, 1))
    assert cancel_check(f, EMPTY, CancellationPairing.from_pairs([((0, 0, 0), (0, 1, 0))]))


def test_outer_pair_with_unpaired_middle_letter_is_not_a_cancellation():
    f = word(T(1, 2), T(3, 4), T(2, 1))
    pairing = CancellationPairing.from_pairs([((0, 0, 0), (0, 2, 0))])
    assert not cancel_check(f, word(T(3, 4)), pairing)


def test_nested_pairing_cancels():
    f = word(T(1, 2), T(3, 4), T(4, 3), T(2, 1))
    pairing = CancellationPairing.from_pairs([((0, 0, 0), (0, 3, 0)), ((0, 1, 0), (0, 2, 0))])
    assert cancel_check(f, EMPTY, pairing)


def test_crossing_pairing_is_rejected():
    f = word(T(1, 2), T(3, 4), T(2, 1), T(4, 3))
    pairing = CancellationPairing.from_pairs([((0, 0, 0), (0, 2, 0)), ((0, 1, 0), (0, 3, 0))])
    assert not cancel_check(f, EMPTY, pairing)


@given(st.one_of(t_words, e_words))
def test_empty_pairing_cancels_nothing(w):
    assert cancel_check(w, w, CancellationPairing())


# free reduction


def test_reduce_letter_against_inverse():
    assert reduce_finite([E(1, 2), E(1, -2)]) == ()


def test_reduce_nested_transpositions():
    assert reduce_finite([T(1, 2), T(2, 3), T(3, 2), T(2, 1)]) == ()


def _all_deletion_orders(letters):
    """Every word reachable by deleting adjacent inverse pairs until none remain."""
    stack, seen, finals = [tuple(letters)], set(), set()
    while stack:
        w = stack.pop()
        if w in seen:
            continue
        seen.add(w)
        moves = [i for i in range(len(w) - 1) if w[i + 1] == w[i].inverse()]
        if not moves:
            finals.add(w)
        stack += [w[:i] + w[i + 2:] for i in moves]
    return finals


def test_reduce_matches_every_deletion_order():
    letters = [E(1, 2), E(3, 4), E(3, -4), E(1, 3)]
    assert _all_deletion_orders(letters) == {(E(1, 2), E(1, 3))}
    assert reduce_finite(letters) == (E(1, 2), E(1, 3))


@given(st.lists(st.sampled_from([T(1, 2), T(2, 1), T(2, 3), T(3, 2)]), max_size=10))
def test_reduce_is_idempotent_and_agrees_with_brute_force(letters):
    r = reduce_finite(letters)
    assert reduce_finite(r) == r and len(r) <= len(letters)
    assert all(b != a.inverse() for a, b in zip(r, r[1:]))
    assert _all_deletion_orders(letters) == {r}


# infinite products


def test_product_with_escaping_levels_is_one_omega_pattern():
    w = infinite_product(PatternFamily((LetterTemplate("E", (1, 0), (1, 1)),), 1))
    (seg,) = w.segments
    assert seg.order is Order.OMEGA
    assert expand(w, 3) == [E(1, 2), E(2, 3), E(3, 4)]


def test_product_with_stuck_level_is_rejected():
    with pytest.raises(ValueError, match="level stuck at 1"):
        infinite_product(PatternFamily((LetterTemplate("E", (0, 1), (1, 2)),), 0))


def test_product_of_commutators_is_constructed():
    # [E(i-1, i), E(i+1, i+2)] for i >= 2, written with explicit inverse letters
    block = (LetterTemplate("E", (1, -1), (1, 0)), LetterTemplate("E", (1, 1), (1, 2)),
             LetterTemplate("E", (1, -1), (1, 0), 1, -1), LetterTemplate("E", (1, 1), (1, 2), 1, -1))
    w = infinite_product(PatternFamily(block, 2))
    assert expand(w, 1) == [E(1, 2), E(3, 4), E(1, -2), E(3, -4)]


def test_finite_factor_list_concatenates():
    assert infinite_product([word(E(1, 2)), word(E(2, 3))]) == word(E(1, 2), E(2, 3))


# restriction and explicit expansion


@given(st.one_of(t_words, e_words), st.integers(0, 3), st.integers(0, 5))
@settings(max_examples=60)
def test_symbolic_restriction_matches_explicit_expansion(w, skip, keep):
    """Cutting a word after a position agrees with slicing its explicit expansion."""
    if w.is_empty:
        return
    seg = w.segments[0]
    head = TransfiniteWord((seg,))
    if isinstance(seg, Explicit):
        if len(seg.letters) <= skip:
            return
        pos, index = (0, skip, 0), skip
    elif seg.mview.lo is not None:
        pos, index = (0, seg.mview.lo + skip, 0), skip * len(seg.block)
    else:
        return
    letters = expand(head)
    assert w.letter_at(pos) == letters[index]
    tail = restrict_open(head, pos, None)
    assert expand(tail)[:keep] == letters[index + 1: index + 1 + keep]
    assert expand(restrict(head, pos, None))[: keep + 1] == letters[index: index + 1 + keep]


def test_restrict_open_keeps_prefix_ending_in_a_limit():
    w = parse_word("prod n = 1 to inf { E(n+1, n) } E(1, 2)")
    before = restrict_open(w, None, (1, 0, 0))
    assert before == parse_word("prod n = 1 to inf { E(n+1, n) }")
