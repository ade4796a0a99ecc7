import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bigfree.aut.relators import gersten_relators, kills, w_diagnostic
from bigfree.freegroup import FreeWord, x
from bigfree.presentations import (
    Monomial,
    PresRelator,
    Presentation,
    WhiteheadAut,
    emit,
    generator_automorphism,
    gersten_aut_presentation,
    gersten_saut_presentation,
    mccool_presentation,
    parse_token,
    stabilizer_aut_presentation,
    stabilizer_saut_presentation,
    token,
    whitehead_action,
    whitehead_expand,
)
from bigfree.words import E, NielsenLetter

from .strategies import nielsen_letters


def signed_image(g, s: int) -> list[int]:
    """Image of the signed generator ``s`` under one generator, from the defining formulas."""
    if isinstance(g, NielsenLetter):
        if abs(s) != abs(g.head):
            return [s]
        forward = [g.head, g.tail] if g.head > 0 else [-g.tail, -g.head]
        return forward if s > 0 else [-t for t in reversed(forward)]
    if isinstance(g, Monomial):
        return [g(s)]
    return whitehead_action(g.A, g.a, s)


def substitute(w: list[int], images: dict[int, list[int]]) -> list[int]:
    out: list[int] = []
    for s in w:
        img = images[abs(s)] if s > 0 else [-t for t in reversed(images[abs(s)])]
        out += img
    return list(FreeWord(out).letters)


def relator_is_trivial(word, n: int) -> bool:
    """Evaluate a relator on ``x_1..x_n`` using only the defining formulas."""
    current = {k: [k] for k in range(1, n + 1)}
    for g, e in word:
        if e == 1:
            step = {k: signed_image(g, k) for k in range(1, n + 1)}
        else:
            step = _inverse_images(g, n)
        current = {k: substitute(v, step) for k, v in current.items()}
    return all(current[k] == [k] for k in range(1, n + 1))


def _inverse_images(g, n: int) -> dict[int, list[int]]:
    """Letters invert their tail, Whitehead automorphisms swap ``a`` for its
    inverse, monomials have finite order."""
    if isinstance(g, NielsenLetter):
        return {k: signed_image(NielsenLetter(g.head, -g.tail), k) for k in range(1, n + 1)}
    one = {k: signed_image(g, k) for k in range(1, n + 1)}
    if isinstance(g, WhiteheadAut):
        # (A, a)^-1 = (A - a + a^-1, a^-1)
        inv = WhiteheadAut(frozenset(set(g.A) - {g.a} | {-g.a}), -g.a)
        return {k: signed_image(inv, k) for k in range(1, n + 1)}
    power = one
    while True:
        nxt = {k: substitute(v, one) for k, v in power.items()}
        if all(nxt[k] == [k] for k in nxt):
            return power
        power = nxt


# Whitehead automorphisms


def test_whitehead_with_singleton_set_is_empty():
    assert whitehead_expand({1}, 1) == ()


def test_whitehead_with_one_extra_member_is_one_letter():
    assert whitehead_expand({1, 2}, 2) == (E(1, 2),)


def test_whitehead_with_three_members_expands_to_letters_with_distinct_heads():
    letters = whitehead_expand({1, -3, 2}, 2)
    assert set(letters) == {E(1, 2), E(-3, 2)}
    phi = generator_automorphism(WhiteheadAut(frozenset({1, -3, 2}), 2))
    assert phi.image(1) == FreeWord((1, 2)) and phi.image(3) == FreeWord((-2, 3))


def test_whitehead_requires_a_in_set_and_not_its_inverse():
    with pytest.raises(ValueError):
        WhiteheadAut(frozenset({1, -1, 2}), 1)
    with pytest.raises(ValueError):
        WhiteheadAut(frozenset({2}), 1)


@given(st.sets(st.sampled_from([1, -1, 2, -2, 3, -3, 4, -4]), max_size=6), st.sampled_from([1, 2, 3, 4, -1, -2]))
def test_whitehead_expansion_matches_defining_action(A, a):
    A = {s for s in A if abs(s) != abs(a)} | {a}
    phi = generator_automorphism(WhiteheadAut(frozenset(A), a))
    for k in range(1, 5):
        assert phi.image(k) == FreeWord(whitehead_action(A, a, k))


# verification by evaluation


@pytest.mark.parametrize("builder", [
    lambda: gersten_saut_presentation(3),
    lambda: gersten_aut_presentation(3),
    lambda: mccool_presentation(3),
    lambda: gersten_saut_presentation(4),
])
def test_full_presentations_verify(builder):
    p = builder()
    report = p.verify()
    assert report.ok and report.total == len(p.relators) > 0


def test_gersten_relator_counts_for_rank_three():
    assert gersten_saut_presentation(3).counts == {"R1": 24, "R2": 96, "R3": 48, "R4": 576, "R5": 24}


def test_gersten_relators_kill_every_generator_tuple():
    assert all(kills(r, 3) for r in gersten_relators(3))


@pytest.mark.parametrize("family", ["M1", "M2", "M6"])
def test_mccool_families_agree_with_defining_formulas(family):
    rels = [r for r in mccool_presentation(3).relators if r.family == family]
    sample = random.Random(77).sample(rels, min(60, len(rels)))
    assert sample and all(relator_is_trivial(r.word, 3) for r in sample)


def test_gersten_families_agree_with_defining_formulas():
    for r in gersten_relators(3):
        assert relator_is_trivial(r.word, 3), r


def test_wrong_relator_is_reported():
    bad = Presentation("test", 2, (E(1, 2),), (PresRelator("bad", ((E(1, 2), 1),)),))
    report = bad.verify()
    assert not report.ok and len(report.failed) == 1


def test_unlisted_generator_is_reported():
    p = Presentation("test", 2, (E(1, 2),), (PresRelator("x", ((E(2, 1), 1), (E(2, 1), -1))),))
    assert p.verify().foreign


# stabilizers


def test_stabilizer_of_every_generator_has_no_letters():
    p = stabilizer_saut_presentation(3, 3)
    assert p.generators == () and p.relators == ()


def test_stabilizer_letters_have_heads_above_level():
    p = stabilizer_saut_presentation(4, 2)
    assert {abs(g.head) for g in p.generators} == {3, 4}
    assert p.verify().ok


@pytest.mark.parametrize("n,k", [(3, 1), (4, 2)])
def test_stabilizer_aut_presentation_fixes_low_generators(n, k):
    p = stabilizer_aut_presentation(n, k)
    report = p.verify()
    assert report.ok and not report.moving_generators
    assert p.flags["M5_excluded_by_w"] == 0


def test_stabilizer_generator_sets_shrink_with_level():
    sizes = [len(stabilizer_saut_presentation(4, k).generators) for k in range(1, 5)]
    assert sizes == sorted(sizes, reverse=True) and sizes[-1] == 0
    aut_sizes = [len(stabilizer_aut_presentation(3, k).generators) for k in range(1, 4)]
    assert aut_sizes == sorted(aut_sizes, reverse=True)


def test_stabilizer_level_out_of_range_is_rejected():
    with pytest.raises(ValueError):
        stabilizer_saut_presentation(3, 4)
    with pytest.raises(ValueError):
        emit("StabAut", 3)


# serialization


@pytest.mark.parametrize("group,n,k", [("SAut", 3, None), ("McCool", 2, None), ("StabAut", 3, 1)])
def test_json_roundtrip(group, n, k):
    p = emit(group, n, k)
    data = p.to_json()
    assert data["schema"] == 1 and data["counts"] == p.counts
    q = Presentation.from_json(data)
    assert q == p and q.flags == p.flags


def test_json_with_unknown_schema_is_rejected():
    data = emit("SAut", 2).to_json()
    data["schema"] = 2
    with pytest.raises(ValueError):
        Presentation.from_json(data)


@given(nielsen_letters(4), st.sampled_from([1, -1]))
def test_letter_token_roundtrip(g, e):
    assert parse_token(token(g, e)) == (g, e)


def test_monomial_and_whitehead_token_roundtrip():
    for g in (Monomial((2, -1, 3)), WhiteheadAut(frozenset({1, -3, 2}), 2)):
        assert parse_token(token(g, -1)) == (g, -1)


def test_unparseable_token_is_rejected():
    with pytest.raises(ValueError):
        parse_token("Q(1,2)")


# w diagnostic


def test_both_printed_w_forms_induce_the_same_automorphism():
    diags = w_diagnostic(4)
    assert diags and all(d.primary_ok and d.variant_ok and d.forms_agree for d in diags)


def test_monomial_generator_swaps_with_inversion():
    phi = generator_automorphism(Monomial((-2, 1, 3)))
    assert phi.image(1) == x(-2) and phi.image(2) == x(1)
