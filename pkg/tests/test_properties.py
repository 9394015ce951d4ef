import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from hplp.analysis import validate
from hplp.choices import CompositeChoice
from hplp.explanations import (brute_force_worlds, exact_query, explanations_at,
                               make_pairwise_incompatible, world_probabilities)
from hplp.frontend import parse_program, parse_query
from hplp.sampler import estimate

from gen import random_program

SEEDS = range(50)
CORPUS = {s: random_program(s) for s in SEEDS}


def program(seed):
    return parse_program(CORPUS[seed][0])


@pytest.mark.parametrize("seed", SEEDS)
def test_generated_program_is_well_defined(seed):
    assert validate(program(seed)).verdict == "well_defined"


@pytest.mark.parametrize("seed", SEEDS)
def test_world_probabilities_sum_to_one(seed):
    probs = world_probabilities(program(seed))
    assert len(probs) <= 2 ** 12
    assert sum(probs) == 1


@pytest.mark.parametrize("seed", SEEDS)
def test_exact_matches_brute_force(seed):
    p = program(seed)
    for text in CORPUS[seed][1]:
        query = parse_query(text)
        bound = exact_query(p, query)
        assert bound.exhausted
        assert bound.lower == brute_force_worlds(p, query)


@pytest.mark.parametrize("seed", SEEDS)
def test_sampler_agrees_with_exact(seed):
    p = program(seed)
    query = parse_query(CORPUS[seed][1][0])
    exact = float(brute_force_worlds(p, query))
    n = 10_000
    est = estimate(p, query, n, seed=seed)
    tol = 6 * math.sqrt(exact * (1 - exact) / n)
    assert abs(est.p_hat - exact) <= tol


def _worlds_covered(explanations, atoms):
    covered = set()
    keys = sorted(atoms, key=repr)
    for bits in itertools.product((True, False), repeat=len(keys)):
        world = dict(zip(keys, bits))
        if any(all(world[c.key] == c.selected for c in k) for k in explanations):
            covered.add(bits)
    return covered


@pytest.mark.parametrize("seed", SEEDS)
def test_splitting_preserves_worlds(seed):
    p = program(seed)
    for text in CORPUS[seed][1]:
        found, truncated = explanations_at(p, parse_query(text), 10_000)
        assert not truncated
        split = make_pairwise_incompatible(found)
        atoms = {c.key for k in found for c in k}
        assert {c.key for k in split for c in k} <= atoms
        assert _worlds_covered(found, atoms) == _worlds_covered(split, atoms)
        for i, x in enumerate(split):
            for y in list(split)[i + 1:]:
                assert not x.compatible(y)


@pytest.mark.parametrize("seed", SEEDS[:10])
def test_seed_determinism(seed):
    p = program(seed)
    query = parse_query(CORPUS[seed][1][0])
    a = estimate(p, query, 2000, seed=seed)
    b = estimate(p, query, 2000, seed=seed)
    assert repr(a) == repr(b) and a.to_dict() == b.to_dict()


@settings(max_examples=40, deadline=None)
@given(st.integers(1000, 10**6))
def test_exact_matches_brute_force_fuzz(seed):
    text, queries = random_program(seed)
    p = parse_program(text)
    for q in queries:
        query = parse_query(q)
        assert exact_query(p, query).lower == brute_force_worlds(p, query)


def test_corpus_explanations_split_cleanly():
    from conftest import load
    p = load("card")
    found = [k for text in ("pick(0,spades)", "pick(0,clubs)", "pick(0,hearts)")
             for k in explanations_at(p, parse_query(text), 100)[0]]
    split = make_pairwise_incompatible(found + [CompositeChoice()])
    assert split.probability() == 1
