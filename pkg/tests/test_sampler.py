import logging
import math
from fractions import Fraction

import pytest

from hplp.distributions import RngStream
from hplp.explanations import brute_force_worlds
from hplp.frontend import parse_program
from hplp.resolution import CountabilityError, Solver
from hplp.sampler import (AllSamplesDepthExceeded, Outcome, Sample, confidence_interval,
                          draw_outcome, estimate, estimate_discrete_crosscheck)

from conftest import load, q


def test_deterministic_query_always_true():
    p = parse_program("a.")
    rng = RngStream(0)
    assert all(draw_outcome(p, q("a"), rng) is Outcome.TRUE for _ in range(100))
    assert estimate_discrete_crosscheck(p, q("a"), 1000).p_hat == 1.0


def test_negated_fact():
    p = parse_program("0.7 :: a.")
    exact = float(brute_force_worlds(p, q("\\+ a")))
    assert exact == pytest.approx(0.3)
    est = estimate_discrete_crosscheck(p, q("\\+ a"), 100_000, seed=5)
    assert abs(est.p_hat - exact) < 0.009


def test_card_crosscheck():
    p = load("card")
    est = estimate_discrete_crosscheck(p, q("pick(0,clubs)"), 100_000, seed=8)
    assert abs(est.p_hat - 1 / 3) < 0.009


def test_crosscheck_needs_discrete_program():
    with pytest.raises(ValueError):
        estimate_discrete_crosscheck(load("widget"), q("ok_widget"), 10)


def test_memoized_fact():
    p = parse_program("0.5 :: a.\nb :- a, a.")
    for seed in range(50):
        s = Sample(RngStream(seed))
        Solver(p).first_answer(q("b"), s)
        assert len(s.discrete) == 1
    contradiction = q("a, \\+ a")
    rng = RngStream(1)
    assert all(draw_outcome(p, contradiction, rng) is Outcome.FALSE for _ in range(200))


def test_memoized_continuous():
    p = load("card_cont")
    solver = Solver(p)
    for seed in range(20):
        s = Sample(RngStream(seed))
        solver.first_answer(q("angle(0,X), angle(0,Y)"), s)
        assert len(s.continuous) == 1
        first = solver.first_answer(q("angle(0,X)"), s)
        again = solver.first_answer(q("angle(0,X)"), s)
        assert first == again


def test_mixture_draws_one_component():
    p = load("gaussian_mixture")
    rng = RngStream(3)
    solver = Solver(p)
    for _ in range(200):
        s = Sample(rng)
        solver.first_answer(q("mix"), s)
        assert len(s.discrete) == 1
        assert len(s.continuous) == 1
        (h,) = s.discrete.values()
        (key,) = s.continuous
        assert key[0] == ("g" if h else "h")


def test_card_game_terminates():
    p = load("card_cont")
    est = estimate(p, q("at_least_once_spades"), 2000, seed=1, depth_bound=100_000)
    assert est.depth_exceeded == 0 and est.n_completed == 2000


def test_estimate_invariants():
    est = estimate(load("card"), q("pick(0,hearts)"), 5000, seed=2)
    assert est.ci_low <= est.p_hat <= est.ci_high
    assert est.n == 5000 and est.seed == 2
    assert est.p_hat * est.n_completed == pytest.approx(round(est.p_hat * est.n_completed))


def test_reproducible():
    p = load("card_cont")
    a = estimate(p, q("at_least_once_spades"), 3000, seed=11)
    b = estimate(p, q("at_least_once_spades"), 3000, seed=11)
    assert a.to_dict() == b.to_dict()
    c = estimate(p, q("at_least_once_spades"), 3000, seed=12)
    assert c.to_dict() != a.to_dict()


def test_workers_reproducible():
    p = load("card")
    a = estimate(p, q("pick(0,clubs)"), 4000, seed=4, workers=2)
    b = estimate(p, q("pick(0,clubs)"), 4000, seed=4, workers=2)
    assert a == b
    assert a.n_completed == 4000


def test_interval_small_counts():
    lo, hi = confidence_interval(3, 100)
    assert lo == pytest.approx(0.006229971538306395)
    assert hi == pytest.approx(0.08517605297428002)
    assert confidence_interval(0, 50)[0] == 0.0
    assert confidence_interval(50, 50)[1] == 1.0


def test_interval_normal_approximation():
    lo, hi = confidence_interval(500, 1000)
    half = 1.959963984540054 * math.sqrt(0.25 / 1000)
    assert (lo, hi) == pytest.approx((0.5 - half, 0.5 + half))


def test_all_samples_too_deep():
    p = parse_program("loop :- loop.")
    with pytest.raises(AllSamplesDepthExceeded):
        estimate(p, q("loop"), 5, depth_bound=100)


def test_deep_samples_dropped_with_warning(caplog):
    p = parse_program("0.5 :: c(_).\nrun(N) :- c(N), run(s(N)).\nrun(_).")
    with caplog.at_level(logging.WARNING):
        est = estimate(p, q("run(0)"), 2000, seed=0, depth_bound=8)
    assert est.depth_exceeded > 0
    assert est.n_completed == 2000 - est.depth_exceeded
    assert "exceeded the depth bound" in caplog.text


def test_continuous_index_aborts():
    with pytest.raises(CountabilityError):
        estimate(load("cont_index_bad"), q("res(M)"), 10)


def test_n_must_be_positive():
    with pytest.raises(ValueError):
        estimate(load("card"), q("pick(0,clubs)"), 0)
