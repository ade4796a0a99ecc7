import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bigfree.aut.admissible import (
    PsiEvaluator,
    backward_chain_bound,
    filtration_level,
    kernel_check,
    s_check,
)
from bigfree.aut.rewriting import (
    AdmissibilityViolation,
    beta_alpha,
    derived_form,
    factor_ra,
    is_alpha_admissible,
    oberwolfach_word,
    relator_alpha_beta,
    split_form,
)
from bigfree.cli.dsl import parse_word
from bigfree.words import EMPTY, E, concat, word

from .oracles import random_admissible_pattern_word
from .strategies import explicit_words, nielsen_letters


def psi_agree(a, b, n):
    pa, pb = PsiEvaluator(a), PsiEvaluator(b)
    return all(pa.image(k) == pb.image(k) for k in range(1, n + 1))


# rewriting past a letter


def test_letter_with_tail_on_alpha_head_is_conjugated_from_the_left():
    assert beta_alpha(E(1, 2), word(E(3, 1))) == word(E(3, -2), E(3, 1))


def test_letter_with_inverse_tail_on_alpha_head_is_conjugated_from_the_right():
    assert beta_alpha(E(1, 2), word(E(3, -1))) == word(E(3, -1), E(3, 2))


def test_unrelated_letter_is_unchanged():
    assert beta_alpha(E(1, 2), word(E(3, 4))) == word(E(3, 4))


def test_letter_on_alpha_head_is_a_violation():
    with pytest.raises(AdmissibilityViolation):
        beta_alpha(E(1, 2), word(E(1, 3)))
    assert not is_alpha_admissible(E(1, 2), word(E(2, 3), E(-1, 4)))
    assert is_alpha_admissible(E(1, 2), word(E(3, 1)))


def test_empty_beta_gives_trivial_relator():
    r = relator_alpha_beta(E(1, 2), EMPTY)
    assert r == word(E(1, 2), E(1, -2))
    assert kernel_check(r, 5)


@pytest.mark.parametrize("alpha", [E(1, 2), E(-2, 1), E(2, -1)])
@pytest.mark.parametrize("beta", [word(E(3, 1)), word(E(3, -1), E(4, 2)), word(E(4, -2), E(3, 4), E(5, 1))])
def test_relator_acts_trivially_for_finite_beta(alpha, beta):
    assert kernel_check(relator_alpha_beta(alpha, beta), 8)


def test_relator_acts_trivially_for_pattern_beta():
    beta = parse_word("prod n = 3 to inf { E(n, n-1) }")
    assert s_check(beta).verified
    assert kernel_check(relator_alpha_beta(E(1, 2), beta), 12)


def test_relator_acts_trivially_for_pattern_beta_hitting_alpha_head():
    beta = parse_word("prod n = 3 to inf { E(n, 1) E(n, -1) }")
    assert s_check(beta).verified
    assert kernel_check(relator_alpha_beta(E(1, 2), beta), 12)


@given(explicit_words(nielsen_letters(6), 8), st.sampled_from([E(1, 2), E(1, -3), E(-2, 1)]))
@settings(max_examples=80)
def test_relator_acts_trivially_for_random_admissible_beta(beta, alpha):
    if not is_alpha_admissible(alpha, beta):
        return
    assert kernel_check(relator_alpha_beta(alpha, beta), 7)


# derived form


def test_derived_form_of_single_letter():
    form = derived_form(word(E(1, 2)))
    assert form.level == 1 and form.alpha == E(1, 2)
    assert form.delta == EMPTY and form.beta == EMPTY and form.fbar == EMPTY


def test_derived_form_splits_at_last_closure_position():
    form = derived_form(word(E(2, 3), E(1, 2)))
    assert form.delta == word(E(2, 3)) and form.alpha == E(1, 2) and form.beta == EMPTY


def test_derived_form_rewrites_letters_after_alpha():
    w = word(E(1, 2), E(3, 1))
    form = derived_form(w)
    assert form.alpha == E(1, 2) and form.beta == word(E(3, 1))
    assert form.beta_alpha == word(E(3, -2), E(3, 1))
    assert psi_agree(w, concat(form.r, form.fbar, word(form.alpha)), 6)
    assert split_form(w) == (form.delta, form.alpha, form.beta)


def test_derived_form_of_empty_word_is_rejected():
    with pytest.raises(ValueError):
        derived_form(EMPTY)


@given(explicit_words(nielsen_letters(5), 7))
@settings(max_examples=80)
def test_derived_form_reassembles_finite_words(w):
    if w.is_empty:
        return
    form = derived_form(w)
    assert psi_agree(w, concat(form.r, form.fbar, word(form.alpha)), 6)
    assert kernel_check(form.r, 6)
    assert filtration_level(form.r) >= form.level


# iterated factorization


def test_finite_word_factors_down_to_empty_residual():
    f = factor_ra(word(E(2, 3), E(1, 2), E(3, -1)), depth=10, check_gens=6, probe_gens=range(1, 5))
    assert f.ok and f.residual == EMPTY and len(f.alphas) >= 3


def test_factorization_stages_pass_on_seeded_corpus():
    rng, seen = random.Random(4242), 0
    while seen < 15:
        w = random_admissible_pattern_word(rng)
        if w is None:
            continue
        f = factor_ra(w, depth=5, check_gens=8, probe_gens=range(1, 7))
        assert f.ok, [s for s in f.stages if not s.ok]
        seen += 1


def test_residual_level_grows_with_depth():
    w = parse_word("prod n = 1 to inf { E(n+3, n) }")
    assert s_check(w).verified
    levels = [filtration_level(factor_ra(w, depth=d).residual) for d in (1, 3, 6)]
    assert levels == sorted(levels) and levels[-1] > levels[0]


def test_oberwolfach_word_factors_consistently():
    f = factor_ra(oberwolfach_word(4), depth=6, check_gens=6, probe_gens=range(1, 5))
    assert f.ok and f.residual == EMPTY


def test_oberwolfach_word_needs_three_or_more():
    with pytest.raises(ValueError):
        oberwolfach_word(2)


# backward chains under rewriting


WORKED_F = word(E(2, 5), E(1, 2), E(3, 1), E(3, -1), E(4, -1), E(4, -3))


def test_rewriting_past_alpha_does_not_lengthen_backward_chains():
    rewritten = beta_alpha(E(1, 2), word(E(3, 1), E(3, -1)))
    assert rewritten == word(E(3, -2), E(3, 1), E(3, -1), E(3, 2))
    f_prime = concat(word(E(2, 5)), rewritten, word(E(1, 2), E(4, -1), E(4, -3)))
    assert psi_agree(WORKED_F, f_prime, 6)
    assert backward_chain_bound(WORKED_F, 4) == 4
    for k in range(1, 6):
        assert backward_chain_bound(f_prime, k) <= backward_chain_bound(WORKED_F, k)
