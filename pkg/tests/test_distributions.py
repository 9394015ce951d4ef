import math
import statistics

import numpy as np
import pytest
from scipy import integrate

from hplp.distributions import (ArithmeticTypeError, DensitySpec, InvalidParameter,
                                RngStream, UnboundVariable, compare, draw, eval_arith,
                                pdf, sample)
from hplp.frontend import parse_program, parse_term
from hplp.resolution import Solver
from hplp.sampler import Sample
from hplp.terms import Const, Var

from conftest import load, q


def spec(family, a, b):
    return DensitySpec(family, (parse_term(str(a)), parse_term(str(b))))


def test_uniform_support():
    rng = RngStream(7)
    s = spec("uniform_dens", 0, 6.28)
    xs = [sample(s, {}, rng) for _ in range(20_000)]
    assert min(xs) >= 0 and max(xs) <= 6.28


def test_gaussian_mean():
    rng = RngStream(11)
    xs = [sample(spec("gaussian", 0, 1), {}, rng) for _ in range(100_000)]
    assert abs(statistics.fmean(xs)) < 0.02


def test_narrow_uniform():
    rng = RngStream(3)
    for eps in (1e-3, 1e-6, 1e-9):
        x = draw("uniform_dens", 2.0, 2.0 + eps, rng)
        assert 2.0 <= x <= 2.0 + eps


def test_uniform_pdf_with_sampled_lower_bound():
    s = DensitySpec("uniform_dens", (Var("X"), Const(2)))
    assert pdf(s, {"X": 0.5}, 1.0) == pytest.approx(2 / 3)


def test_uniform_pdf_outside_support():
    assert pdf(spec("uniform_dens", 0, 1), {}, 2.0) == 0


def test_standard_normal_pdf():
    assert pdf(spec("gaussian", 0, 1), {}, 0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))


@pytest.mark.parametrize("mean,var", [(0, 1), (5, 2), (0.5, 1.5)])
def test_gaussian_pdf_integrates_to_one(mean, var):
    s = spec("gaussian", mean, var)
    sd = math.sqrt(var)
    total, _ = integrate.quad(lambda x: pdf(s, {}, x), mean - 8 * sd, mean + 8 * sd,
                              epsabs=1e-12, epsrel=1e-12)
    assert abs(total - 1) < 1e-6


def test_variance_parameter_is_variance():
    rng = RngStream(5)
    xs = np.array([draw("gaussian", 0.0, 4.0, rng) for _ in range(50_000)])
    assert xs.var() == pytest.approx(4.0, rel=0.05)


def test_bad_parameters():
    with pytest.raises(InvalidParameter):
        sample(spec("gaussian", 0, 0), {}, RngStream(0))
    with pytest.raises(InvalidParameter):
        sample(spec("uniform_dens", 1, 1), {}, RngStream(0))
    with pytest.raises(ValueError):
        DensitySpec("poisson", (Const(1), Const(2)))


def test_arith():
    assert eval_arith(parse_term("Y + Z"), {"Y": 0.5, "Z": 2.0}) == 2.5
    assert eval_arith(parse_term("X"), {"X": 3.14}) == 3.14
    assert compare(">", 3.5, 3.14)
    assert eval_arith(parse_term("-(2) * 3 / 4 - 1")) == -2.5


def test_arith_errors():
    with pytest.raises(UnboundVariable):
        eval_arith(parse_term("X + 1"))
    with pytest.raises(ZeroDivisionError):
        eval_arith(parse_term("1 / 0"))
    with pytest.raises(ArithmeticTypeError):
        eval_arith(parse_term("a + 1"))


def test_streams_are_reproducible():
    a, b = RngStream(42, 3), RngStream(42, 3)
    assert [a.random() for _ in range(5000)] == [b.random() for _ in range(5000)]
    assert [a.standard_normal() for _ in range(10)] == [b.standard_normal()
                                                       for _ in range(10)]
    c = RngStream(42, 4)
    assert [RngStream(42, 3).random() for _ in range(3)] != [c.random() for _ in range(3)]


def test_compound_gaussian_moments():
    # mean ~ N(1,5), value ~ N(mean,2)  gives  value ~ N(1,7)
    rng = RngStream(2024)
    n = 100_000
    xs = np.array([draw("gaussian", draw("gaussian", 1.0, 5.0, rng), 2.0, rng)
                   for _ in range(n)])
    se_mean = math.sqrt(7 / n)
    se_var = 7 * math.sqrt(2 / (n - 1))
    assert abs(xs.mean() - 1) < 5 * se_mean
    assert abs(xs.var(ddof=1) - 7) < 5 * se_var


def test_compound_gaussian_through_program():
    p = load("mean_estimation")
    rng = RngStream(99)
    solver = Solver(p)
    n = 20_000
    xs = np.array([solver.first_answer(q("value(1,X)"), Sample(rng))[Var("X")].value
                   for _ in range(n)])
    assert abs(xs.mean() - 1) < 5 * math.sqrt(7 / n)
    assert abs(xs.var(ddof=1) - 7) < 5 * 7 * math.sqrt(2 / (n - 1))


def test_shared_mean_within_one_world():
    p = load("mean_estimation")
    s = Sample(RngStream(1))
    solver = Solver(p)
    solver.first_answer(q("value(1,X), value(2,Y)"), s)
    means = [k for k in s.continuous if k[0] == "mean"]
    assert len(means) == 1
