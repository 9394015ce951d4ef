import pytest

from hplp.analysis import (ERROR, UNVERIFIED, WARNING, check_continuous_usage,
                           check_mutual_exclusivity, check_prev_positive_literal,
                           check_query, check_range_restriction, query_accepted,
                           validate)
from hplp.frontend import parse_program

from conftest import load, q

GOLDEN = {
    "card": ("well_defined", set()),
    "card_inf": ("well_defined", set()),
    "card_cont": ("well_defined", set()),
    "gaussian_mixture": ("well_defined", set()),
    "widget": ("well_defined", set()),
    "mean_estimation": ("well_defined", set()),
    "wheel_joint": ("well_defined", set()),
    "prev_literal_good": ("well_defined", set()),
    "prev_literal_bad": ("ill_defined", {"PREV_POSITIVE_LITERAL"}),
    "gaussian_mixture_bad": ("ill_defined", {"MUTUAL_EXCLUSION"}),
    "cont_index_bad": ("ill_defined", {"CONT_INDEX"}),
}


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_verdicts(name):
    verdict, rules = GOLDEN[name]
    report = validate(load(name))
    assert report.verdict == verdict
    assert {d.rule for d in report.diagnostics if d.severity == ERROR} == rules


QUERIES = [("f_0(1)", True), ("f_1", True), ("f_2(X)", True), ("f_4(1)", True),
           ("f_5", True), ("f_0(_)", False), ("f_3", False), ("f_4(_)", False)]


@pytest.mark.parametrize("query,ok", QUERIES)
def test_query_groundness(query, ok):
    assert query_accepted(load("groundness"), q(query)) is ok


def test_range_restriction():
    assert check_range_restriction(load("card")) == []
    diags = check_range_restriction(parse_program("p(X) :- q.\nq."))
    assert [(d.rule, d.severity) for d in diags] == [("RANGE_RESTRICTION", ERROR)]
    assert "X" in diags[0].message


def test_widget_has_no_diagnostics():
    assert validate(load("widget")).diagnostics == []


def test_prev_positive_literal_good_and_bad():
    assert check_prev_positive_literal(load("prev_literal_good")) == []
    diags = check_prev_positive_literal(load("prev_literal_bad"))
    assert len(diags) == 1 and diags[0].rule == "PREV_POSITIVE_LITERAL"
    assert diags[0].span.line == 4


def test_constant_argument_is_bound():
    p = parse_program("1/2 :: a(_).\nf_1 :- a(1).")
    assert check_prev_positive_literal(p) == []


def test_mixture_exclusive_through_unfolding():
    assert check_mutual_exclusivity(load("gaussian_mixture"), 3) == []


def test_overlapping_mixture():
    diags = check_mutual_exclusivity(load("gaussian_mixture_bad"), 3)
    assert [(d.rule, d.severity) for d in diags] == [("MUTUAL_EXCLUSION", ERROR)]


def test_widget_exclusive_after_one_step():
    p = load("widget")
    assert [d.severity for d in check_mutual_exclusivity(p, 0)] == [UNVERIFIED]
    assert check_mutual_exclusivity(p, 1) == []


def test_continuous_usage():
    assert check_continuous_usage(load("mean_estimation")) == []
    assert check_continuous_usage(load("wheel_joint")) == []
    diags = check_continuous_usage(load("cont_index_bad"))
    assert {d.rule for d in diags} == {"CONT_INDEX"}
    assert any("X" in d.message for d in diags)


def test_continuous_value_in_term_position():
    p = parse_program("v(X) : gaussian(X,0,1).\nr(Y) :- v(X), foo(X, Y).\nfoo(a, b).")
    rules = {d.rule for d in validate(p).diagnostics if d.severity == ERROR}
    assert rules & {"CONT_USAGE", "SIG_CONFLICT"}


def test_empty_program():
    r = validate(parse_program(""))
    assert r.verdict == "well_defined" and r.diagnostics == []


def test_floundering_risk_warning():
    r = validate(load("card_inf_naive"))
    assert r.verdict == "well_defined"
    diags = check_query(load("card_inf_naive"), q("at_least_once_spades"))
    assert "FLOUNDER_RISK" in {d.rule for d in diags}
    assert any(d.severity == WARNING for d in diags)


def test_report_is_deterministic():
    for name in GOLDEN:
        a = validate(load(name)).to_json()
        b = validate(load(name)).to_json()
        assert a == b


def test_diagnostics_sorted_by_location():
    text = "p(X) :- q.\nq.\nr(Y) :- q."
    diags = validate(parse_program(text)).diagnostics
    lines = [d.span.line for d in diags]
    assert lines == sorted(lines) and len(lines) == 2


PROBES = {
    "independent": ("0.3 :: machine(a).\n0.5 :: machine(b).\n"
                    "st(a,Z) : gaussian(Z,2,1).\nst(b,Z) : gaussian(Z,3,1).\n"
                    "w(X) :- machine(M), st(M,X)."),
    "nested": ("h : 0.6.\nheads :- h.\nh2 :- heads.\ng(X) : gaussian(X,0,1).\n"
               "h(X) : gaussian(X,5,2).\nmix(X) :- h2, g(X).\nmix(X) :- heads, h(X)."),
    "chain": ("h : 0.6.\na1 :- h.\na2 :- a1.\na3 :- a2.\na4 :- a3.\na5 :- a4.\n"
              "b5 :- \\+ a4.\ng(X) : gaussian(X,0,1).\nk(X) : gaussian(X,5,2).\n"
              "mix(X) :- a5, g(X).\nmix(X) :- b5, k(X)."),
    "comparisons": ("u(X) : uniform_dens(X,0,1).\ng(X) : gaussian(X,0,1).\n"
                    "k(X) : gaussian(X,5,2).\nmix(X) :- u(U), U > 0.5, g(X).\n"
                    "mix(X) :- u(U), U < 0.5, k(X)."),
}


def _status(program, depth):
    sev = {d.severity for d in check_mutual_exclusivity(program, depth)}
    return "error" if ERROR in sev else "unverified" if sev else "exclusive"


@pytest.mark.parametrize("name", sorted(PROBES) + ["gaussian_mixture", "widget",
                                                   "gaussian_mixture_bad"])
def test_unfolding_monotone(name):
    p = parse_program(PROBES[name]) if name in PROBES else load(name)
    seen = [_status(p, d) for d in range(7)]
    if "exclusive" in seen:
        first = seen.index("exclusive")
        assert all(s == "exclusive" for s in seen[first:])
    assert not ("exclusive" in seen and "error" in seen)


def test_probe_outcomes():
    assert _status(parse_program(PROBES["independent"]), 1) == "error"
    assert _status(parse_program(PROBES["nested"]), 3) == "error"
    assert _status(parse_program(PROBES["chain"]), 1) == "exclusive"
    assert _status(parse_program(PROBES["comparisons"]), 6) == "unverified"


def test_diagnostic_json_shape():
    d = validate(load("prev_literal_bad")).to_dict()["diagnostics"][0]
    assert set(d) == {"rule", "severity", "line", "col", "message"}
