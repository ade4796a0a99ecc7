import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bigfree.aut.admissible import PsiEvaluator, s_check
from bigfree.aut.automorphism import (
    FinSuppAutomorphism,
    MonomialAutomorphism,
    apply_letters,
    unzigzag,
    zigzag,
)
from bigfree.aut.decompose import (
    decompose_automorphism,
    eight_letter_block,
    express_in_stabilizer_generators,
    finite_monomial_word,
    inversion_word,
    monomial_to_nielsen_word,
    w_letters,
    w_letters_variant,
    zigzag_cycle_word,
)
from bigfree.freegroup import FreeWord, x
from bigfree.words import EMPTY, E, NielsenLetter

from .strategies import nielsen_letters


@st.composite
def signed_permutations(draw, n: int = 5):
    perm = draw(st.permutations(range(1, n + 1)))
    signs = draw(st.lists(st.sampled_from((1, -1)), min_size=n, max_size=n))
    return MonomialAutomorphism({k: s * p for k, p, s in zip(range(1, n + 1), perm, signs)})


# relabelling


def test_zigzag_relabelling_examples():
    assert [zigzag(j) for j in (-2, -1, 0, 1, 2)] == [5, 3, 1, 2, 4]


def test_zigzag_relabelling_is_a_bijection():
    assert all(unzigzag(zigzag(j)) == j for j in range(-30, 31))
    assert sorted(zigzag(j) for j in range(-10, 11)) == list(range(1, 22))


# finite-support decomposition


def test_identity_decomposes_into_no_letters():
    d = decompose_automorphism(FinSuppAutomorphism.identity())
    assert d.letters == () and d.sigma.mapping == {}


def test_single_letter_automorphism_decomposes():
    alpha = FinSuppAutomorphism.from_letters([E(1, 2)])
    d = decompose_automorphism(alpha, 4)
    assert d.automorphism().agrees_on(alpha, 4)


@given(st.lists(nielsen_letters(4), max_size=12))
@settings(max_examples=100)
def test_decomposition_roundtrips_on_random_letter_products(letters):
    alpha = FinSuppAutomorphism.from_letters(letters)
    d = decompose_automorphism(alpha, 6)
    for k in range(1, 7):
        expected = apply_letters(x(k), letters)
        got = apply_letters(FreeWord((d.sigma(k),)), d.letters)
        assert got == expected


# monomial realization


def test_w_letters_swap_and_invert():
    w = FinSuppAutomorphism.from_letters(w_letters(1, 2))
    assert w.image(1) == x(-2) and w.image(2) == x(1)
    assert FinSuppAutomorphism.from_letters(w_letters_variant(1, 2)).agrees_on(w, 3)


def test_identity_monomial_has_empty_word():
    assert finite_monomial_word(MonomialAutomorphism({})) == EMPTY


@given(signed_permutations())
@settings(max_examples=60)
def test_finite_signed_permutation_is_realized(pi):
    w = finite_monomial_word(pi)
    assert s_check(w).verified
    psi = PsiEvaluator(w)
    for k in range(1, 9):
        assert psi.image(k) == FreeWord((pi(k),))


@pytest.mark.parametrize("index", [1, 2, 5])
def test_inversion_word_inverts_one_generator(index):
    psi = PsiEvaluator(inversion_word(index))
    for k in range(1, 16):
        assert psi.image(k) == (x(-k) if k == index else x(k))


def test_eight_letter_block_cycles_three_generators():
    a, b, c = zigzag(0), zigzag(1), zigzag(-1)
    phi = FinSuppAutomorphism.from_letters(eight_letter_block(0))
    assert (phi.image(a), phi.image(b), phi.image(c)) == (x(b), x(c), x(a))
    for j in range(-4, 5):
        if zigzag(j) not in (a, b, c):
            assert phi.image(zigzag(j)) == x(zigzag(j))


def test_eight_letter_block_with_identity_relabelling():
    phi = FinSuppAutomorphism.from_letters(eight_letter_block(3, relabel=lambda j: j + 10))
    target = MonomialAutomorphism({7: 14, 14: 6, 6: 7}).as_fin_supp()
    assert phi.agrees_on(target, 16)


def test_zigzag_cycle_word_shifts_integer_indices():
    w = zigzag_cycle_word()
    assert s_check(w).verified
    psi = PsiEvaluator(w)
    for k in range(1, 25):
        assert psi.image(k) == x(zigzag(unzigzag(k) + 1))


def test_shift_with_finite_part_is_realized():
    sigma = MonomialAutomorphism({}, zigzag_shift=True)
    psi = PsiEvaluator(monomial_to_nielsen_word(sigma))
    for k in range(1, 13):
        assert psi.image(k) == x(zigzag(unzigzag(k) + 1))


# stabilizers


def test_stabilizer_word_for_single_letter_above_level():
    phi = FinSuppAutomorphism.from_letters([E(3, 1)])
    s = express_in_stabilizer_generators(phi, 3, 2)
    assert all(abs(l.head) > 2 for l in s.letters)
    assert s.automorphism().agrees_on(phi, 3)


def test_stabilizer_word_for_two_letters_in_rank_four():
    phi = FinSuppAutomorphism.from_letters([E(3, 1), E(4, 3)])
    s = express_in_stabilizer_generators(phi, 4, 2)
    assert all(abs(l.head) > 2 for l in s.letters)
    assert s.automorphism().agrees_on(phi, 4)


def test_stabilizer_rejects_automorphism_moving_fixed_generator():
    with pytest.raises(ValueError, match="moves x1"):
        express_in_stabilizer_generators(FinSuppAutomorphism.from_letters([E(1, 2)]), 3, 1)


def test_stabilizer_rejects_rank_overflow():
    with pytest.raises(ValueError):
        express_in_stabilizer_generators(FinSuppAutomorphism.from_letters([E(5, 1)]), 3, 1)


def test_stabilizer_words_roundtrip_on_seeded_products():
    rng = random.Random(606)
    for _ in range(60):
        letters = []
        for _ in range(rng.randint(0, 10)):
            h = rng.choice((3, 4, 5)) * rng.choice((1, -1))
            t = rng.choice([k for k in range(1, 6) if k != abs(h)]) * rng.choice((1, -1))
            letters.append(NielsenLetter(h, t))
        phi = FinSuppAutomorphism.from_letters(letters)
        s = express_in_stabilizer_generators(phi, 5, 2)
        assert all(abs(l.head) > 2 for l in s.letters)
        assert s.automorphism().agrees_on(phi, 5)
