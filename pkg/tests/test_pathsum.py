from fractions import Fraction

import numpy as np
import pytest

from partialfree.errors import ResourceLimitError
from partialfree.matrices import EnsembleSpec, estimate_word_net, sample_pair
from partialfree.pathsum import (
    LatticeModel,
    boundary_corrected_word_net,
    exact_word_net,
    gaussian_entry_moments,
)
from partialfree.words import Word, word_expansion

from oracles import site_sum_word_net

GAUSS8 = gaussian_entry_moments(8)


def chain(n, circulant=True, moments=GAUSS8):
    return LatticeModel.chain(n, moments, circulant=circulant)


def test_gaussian_entry_moments():
    assert gaussian_entry_moments(8) == (0, 1, 0, 3, 0, 15, 0, 105)


def test_model_validation():
    with pytest.raises(ValueError):
        LatticeModel(np.array([[1, 0], [0, 0]]), (0, 1))  # nonzero diagonal
    with pytest.raises(ValueError):
        LatticeModel(np.array([[0, 1], [0, 0]]), (0, 1))  # not symmetric
    with pytest.raises(ValueError):
        LatticeModel(np.array([[0, 2], [2, 0]]), (0, 1))  # not 0/1


def test_single_hop_words_vanish():
    for n in (4, 9):
        for circulant in (True, False):
            assert exact_word_net(Word.from_string("AB"), chain(n, circulant)) == 0


def test_ab4_circulant_is_two():
    for n in (8, 50, 200):
        assert exact_word_net(Word.from_string("ABABABAB"), chain(n)) == 2


def test_a2b2_circulant():
    assert exact_word_net(Word.from_string("AABB"), chain(8)) == 2
    # against a direct matrix-product oracle at N = 8
    model = chain(8)
    assert site_sum_word_net(Word.from_string("AABB"), model.adjacency, GAUSS8) == 2


def test_ab4_open_chain_boundary_correction():
    for n in (2, 3, 5, 10, 50):
        got = boundary_corrected_word_net(Word.from_string("ABABABAB"),
                                          chain(n, circulant=False))
        assert got == Fraction(2) - Fraction(2, n)


def test_open_chain_difference_is_order_one_over_n():
    word = Word.from_string("ABABABAB")
    for n in (20, 40, 80):
        diff = exact_word_net(word, chain(n)) - boundary_corrected_word_net(
            word, chain(n, circulant=False))
        assert diff == Fraction(2, n)


def test_boundary_correction_requires_open_chain():
    with pytest.raises(ValueError):
        boundary_corrected_word_net(Word.from_string("AB"), chain(6, circulant=True))


def test_two_site_open_chain_b2():
    assert boundary_corrected_word_net(Word.from_string("BB"), chain(2, circulant=False)) == 1


def test_pure_words():
    model = chain(10)
    assert exact_word_net(Word.from_string("AAAA"), model) == 3
    assert exact_word_net(Word.from_string("BB"), model) == 2
    assert exact_word_net(Word.empty(), model) == 1


def test_odd_diagonal_power_vanishes_with_centered_entries():
    # any word forcing an odd entry power at some site has zero expectation
    model = chain(9)
    for text in ("ABBB", "AAABAB", "ABABAB"):
        assert exact_word_net(Word.from_string(text), model) == 0


def test_matches_site_sum_oracle_exhaustively():
    # every word of length <= 6 on small chains, both topologies, exact rationals
    for n in (4, 7):
        for circulant in (True, False):
            model = chain(n, circulant)
            for length in range(1, 7):
                for necklace in word_expansion(length, 2):
                    got = exact_word_net(necklace.word, model)
                    want = site_sum_word_net(necklace.word, model.adjacency, GAUSS8)
                    assert got == want, (n, circulant, necklace.word.to_string())


def test_non_gaussian_moments():
    # entries +-1 with equal weight: m = (0, 1, 0, 1, ...)
    moments = (0, 1, 0, 1, 0, 1, 0, 1)
    model = chain(12, moments=moments)
    got = exact_word_net(Word.from_string("AAAABBAABB"), model)
    want = site_sum_word_net(Word.from_string("AAAABBAABB"), model.adjacency, moments)
    assert got == want


def test_monte_carlo_agreement():
    spec = EnsembleSpec.tridiagonal_adjacency(64, seed=77, circulant=True)
    samples = [sample_pair(spec, i) for i in range(2000)]
    model = chain(64)
    for text in ("ABABABAB", "AABB", "AABABB"):
        word = Word.from_string(text)
        expected = float(exact_word_net(word, model))
        est, se = estimate_word_net(samples, word)
        assert abs(est - expected) < 3 * se + 1e-12, text


def test_hop_budget_enforced():
    model = LatticeModel.chain(6, GAUSS8, max_hops=3)
    with pytest.raises(ResourceLimitError):
        exact_word_net(Word.from_string("ABABABAB"), model)
    # at the bound is fine
    assert exact_word_net(Word.from_string("ABABAB"), model) == 0


def test_float_moments_give_floats():
    model = LatticeModel.chain(8, (0.0, 1.0, 0.0, 3.0))
    value = exact_word_net(Word.from_string("AABB"), model)
    assert isinstance(value, float)
    assert value == pytest.approx(2.0)
