from fractions import Fraction

import pytest

from hplp.explanations import (NonGroundableQuery, UniverseTooLarge, brute_force_worlds,
                               exact_query, explanations_at, make_pairwise_incompatible,
                               world_probabilities)
from hplp.frontend import parse_program
from hplp.resolution import ProgramHasDensityFacts

from conftest import load, q


@pytest.mark.parametrize("colour", ["spades", "clubs", "hearts"])
def test_card_exact(colour):
    b = exact_query(load("card"), q(f"pick(0,{colour})"))
    assert b.exhausted and b.lower == Fraction(1, 3) and b.delta == b.lower


def test_card_brute_force():
    assert brute_force_worlds(load("card"), q("pick(0,hearts)")) == Fraction(1, 3)


def test_single_fact():
    p = parse_program("0.7 :: a.")
    assert brute_force_worlds(p, q("a")) == Fraction(7, 10)
    assert exact_query(p, q("\\+ a")).lower == Fraction(3, 10)


def test_disjunction_oracle():
    p = parse_program("0.3 :: a.\n0.6 :: b.\nc :- a.\nc :- b.")
    expected = Fraction(3, 10) + Fraction(7, 10) * Fraction(6, 10)
    assert brute_force_worlds(p, q("c")) == expected
    assert exact_query(p, q("c")).lower == expected


def test_infinite_game_bounds():
    p = load("card_inf")
    eps = Fraction(1, 10**7)
    yes = exact_query(p, q("at_least_once_spades"), eps)
    no = exact_query(p, q("never_spades"), eps)
    half = Fraction(1, 2)
    for b in (yes, no):
        assert not b.exhausted
        assert half - Fraction(1, 10**6) <= b.lower <= half
    assert 1 - Fraction(2, 10**6) <= yes.lower + no.lower <= 1


def test_infinite_game_first_explanations():
    found, truncated = explanations_at(load("card_inf"), q("at_least_once_spades"), 40)
    assert truncated
    probs = [k.probability() for k in make_pairwise_incompatible(found)]
    assert probs[:3] == [Fraction(1, 3), Fraction(1, 9), Fraction(1, 27)]


def test_bounds_are_monotone():
    p = load("card_inf")
    prev = Fraction(0)
    for depth in (8, 16, 32, 64):
        found, _ = explanations_at(p, q("at_least_once_spades"), depth)
        value = make_pairwise_incompatible(found).probability()
        assert value >= prev
        prev = value


def test_density_program_rejected():
    with pytest.raises(ProgramHasDensityFacts):
        exact_query(load("card_cont"), q("at_least_once_spades"))


def test_nongroundable_query_rejected():
    with pytest.raises(NonGroundableQuery):
        exact_query(parse_program("0.5 :: a(X).\nf :- a(_)."), q("f"))


def test_epsilon_must_be_positive():
    with pytest.raises(ValueError):
        exact_query(load("card"), q("pick(0,spades)"), 0)


def test_universe_limit():
    facts = "".join(f"0.5 :: f{i}.\n" for i in range(21))
    with pytest.raises(UniverseTooLarge):
        brute_force_worlds(parse_program(facts), q("f0"))
    with pytest.raises(UniverseTooLarge):
        world_probabilities(parse_program(facts))


def test_function_symbols_rejected_by_oracle():
    with pytest.raises(UniverseTooLarge):
        brute_force_worlds(load("card_inf"), q("at_least_once_spades"))


def test_world_probabilities_sum_to_one():
    assert sum(world_probabilities(load("card"))) == 1
