import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from bigfree.cli.dsl import parse_word
from bigfree.sym import (
    DivergenceError,
    chain_trace,
    eval_p,
    membership_s,
    membership_s_prime,
    neighborhood_wc,
    sigma_relators,
)
from bigfree.verdict import Status
from bigfree.words import (
    EMPTY,
    CancellationPairing,
    Explicit,
    MirrorBlock,
    T,
    TransfiniteWord,
    cancel_check,
    concat,
    invert,
    restrict,
    word,
)

from .strategies import explicit_words, transposition_patterns, transpositions

ZIGZAG_SHIFT = parse_word("prod n = 0 to inf { T(-n, n+1) T(-n, -(n+1)) }")
TWO_SIDED_SHIFT = parse_word("prod n = -inf to inf { T(-n, 1-n) }")
DESCENDING_SHIFT = parse_word("prod n = -1 to inf { T(-n, 1-n) }")


def apply_finite(letters, point: int) -> int:
    """Push a point through transpositions one letter at a time."""
    for l in letters:
        if point in l.points:
            point = l.b if point == l.a else l.a
    return point


def truncated(w: TransfiniteWord, rows: int) -> list:
    """The letters of ``w`` restricted to the first ``rows`` rows of each omega run."""
    out = []
    for seg in w.segments:
        if isinstance(seg, Explicit):
            out += list(seg.letters)
        else:
            out += [t.at(n) for n in range(seg.start, seg.start + rows) for t in seg.block]
    return out


# chain tracing


def test_single_transposition_trace():
    t = chain_trace(word(T(1, 2)), 1)
    assert t.terminal == 2 and t.steps == 1


def test_zigzag_shift_trace_of_point_one():
    t = chain_trace(ZIGZAG_SHIFT, 1)
    assert t.points == (1, 0, -1, 2) and t.terminal == 2


def test_descending_shift_diverges_from_point_two():
    t = chain_trace(DESCENDING_SHIFT, 2)
    assert t.diverges and t.terminal is None
    assert t.points[:4] == (2, 1, 0, -1)


# membership


def test_two_sided_shift_is_admissible():
    assert membership_s(TWO_SIDED_SHIFT).verified


def test_zigzag_shift_is_admissible():
    assert membership_s(ZIGZAG_SHIFT).verified


def test_descending_shift_is_refuted_with_witness_at_two():
    v = membership_s(DESCENDING_SHIFT)
    assert v.refuted and v.witness.point == 2 and v.witness.direction == "forward"
    assert v.witness.chain[:3] == (2, 1, 0)


def test_zigzag_shift_has_admissible_intervals():
    assert membership_s_prime(ZIGZAG_SHIFT).verified


def test_two_sided_shift_has_an_inadmissible_interval():
    v = membership_s_prime(TWO_SIDED_SHIFT)
    assert v.refuted
    interval = restrict(TWO_SIDED_SHIFT, v.witness.start, None)
    assert chain_trace(interval, v.witness.point).diverges
    # the interval starting at T(1,2) diverges at point 2
    from_t12 = restrict(TWO_SIDED_SHIFT, (0, -1, 0), None)
    assert from_t12.letter_at((0, -1, 0)) == T(1, 2)
    assert membership_s(from_t12).witness.point == 2


def test_finite_words_have_admissible_intervals():
    assert membership_s_prime(word(T(1, 2), T(2, 3), T(5, -1))).verified


def test_constant_template_letter_is_rejected_at_construction():
    with pytest.raises(ValueError):
        parse_word("prod n = 0 to inf { T(1, 2) }")


@given(st.one_of(transposition_patterns(), explicit_words(transpositions)))
@settings(max_examples=80)
def test_interval_admissibility_implies_admissibility(w):
    if membership_s_prime(w).verified:
        assert membership_s(w).verified


# evaluation


def test_zigzag_shift_moves_every_point_up_by_one():
    p = eval_p(ZIGZAG_SHIFT)
    assert p.table(range(-20, 21)) == {n: n + 1 for n in range(-20, 21)}


def test_two_sided_shift_moves_every_point_up_by_one():
    p = eval_p(TWO_SIDED_SHIFT)
    assert all(p(n) == n + 1 for n in range(-20, 21))


def test_two_transpositions_compose_left_to_right():
    assert eval_p(word(T(1, 2), T(2, 3)))(1) == 3


def test_evaluating_divergent_point_raises():
    with pytest.raises(DivergenceError):
        eval_p(DESCENDING_SHIFT)(2)


@given(explicit_words(transpositions, 10), st.integers(-7, 7))
def test_finite_evaluation_matches_letter_by_letter_oracle(w, point):
    assert eval_p(w)(point) == apply_finite(w.letters(), point)


@given(transposition_patterns(), st.integers(-5, 5))
@settings(max_examples=80, suppress_health_check=[HealthCheck.filter_too_much])
def test_omega_pattern_evaluation_matches_long_truncation(w, point):
    seg = w.segments[0]
    assume(seg.order.value == "omega" and membership_s(w).verified)
    t = chain_trace(w, point)
    assume(t.terminal is not None and all(m - seg.start < 40 for _, m, _ in t.positions))
    assert t.terminal == apply_finite(truncated(w, 60), point)


@pytest.mark.parametrize("u,v", [
    (ZIGZAG_SHIFT, ZIGZAG_SHIFT),
    (ZIGZAG_SHIFT, invert(ZIGZAG_SHIFT)),
    (TWO_SIDED_SHIFT, word(T(1, 2), T(0, 5))),
    (word(T(3, -2)), TWO_SIDED_SHIFT),
])
def test_evaluation_is_a_homomorphism(u, v):
    pu, pv, puv = eval_p(u), eval_p(v), eval_p(concat(u, v))
    for n in range(-15, 16):
        assert puv(n) == pv(pu(n))


@given(st.one_of(transposition_patterns(), explicit_words(transpositions)), st.integers(-6, 6))
@settings(max_examples=80)
def test_backward_trace_of_forward_terminal_returns_start(w, point):
    assume(membership_s(w).verified)
    fwd = chain_trace(w, point)
    assume(fwd.terminal is not None)
    assert chain_trace(w, fwd.terminal, "backward").terminal == point


# cancellation invariance


@given(explicit_words(transpositions, 6), st.data())
def test_inserting_a_cancelling_pair_keeps_every_terminal(g, data):
    letters = list(g.letters())
    at = data.draw(st.integers(0, len(letters)))
    extra = data.draw(transpositions)
    f = word(*letters[:at], extra, extra.inverse(), *letters[at:])
    pairing = CancellationPairing.from_pairs([((0, at, 0), (0, at + 1, 0))])
    assert cancel_check(f, g, pairing)
    for point in range(-7, 8):
        assert chain_trace(f, point).terminal == chain_trace(g, point).terminal


def test_cancelling_a_mirrored_pattern_keeps_every_terminal():
    g = word(T(1, 2))
    f = concat(g, ZIGZAG_SHIFT, invert(ZIGZAG_SHIFT))
    assert cancel_check(f, g, CancellationPairing.from_pairs((), [MirrorBlock(1, 2, 3)]))
    for point in range(-10, 11):
        assert chain_trace(f, point).terminal == chain_trace(g, point).terminal


# relators and neighbourhoods


def test_square_relator_is_generated():
    rels = sigma_relators([1, 2])
    assert ("square", word(T(1, 2), T(1, 2))) in [(r.family, r.word) for r in rels]


def test_disjoint_commutator_relator_is_generated():
    rels = sigma_relators([1, 2, 3, 4])
    assert word(T(1, 2), T(3, 4), T(2, 1), T(4, 3)) in [r.word for r in rels if r.family == "disjoint"]


def test_triangle_relator_is_generated():
    rels = sigma_relators([1, 2, 3])
    assert word(T(1, 2), T(1, 3), T(2, 1), T(3, 2)) in [r.word for r in rels if r.family == "triangle"]


def test_every_relator_over_seven_points_fixes_a_window():
    for r in sigma_relators(range(-3, 4)):
        p = eval_p(r.word)
        assert all(p(n) == n for n in range(-10, 11))


def test_empty_word_lies_in_every_neighbourhood():
    assert neighborhood_wc(EMPTY, {1, 2, 3})


def test_cancelling_pair_lies_in_the_neighbourhood_of_its_points():
    assert neighborhood_wc(word(T(1, 2), T(2, 1)), {1, 2})


def test_single_transposition_is_outside_the_neighbourhood_of_its_point():
    assert not neighborhood_wc(word(T(1, 2)), {1})


def test_verdicts_carry_a_status():
    assert membership_s(EMPTY).status is Status.VERIFIED
