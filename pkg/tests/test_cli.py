import io
import json
import subprocess
import sys

import jsonschema
import pytest

from hplp.cli import run
from hplp.resources import corpus_names, corpus_path, schema


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def prog(name):
    return str(corpus_path(name))


def test_check_card():
    code, out, _ = call("check", prog("card"))
    assert code == 0 and "verdict: well_defined" in out


@pytest.mark.parametrize("name", corpus_names())
def test_check_json_schema(name):
    code, out, _ = call("check", "--format", "json", prog(name))
    data = json.loads(out)
    jsonschema.validate(data, schema("report"))
    assert code == {"well_defined": 0, "ill_defined": 1, "unverified": 2}[data["verdict"]]


def test_check_query_option():
    assert call("check", prog("groundness"), "--query", "f_1")[0] == 1
    code, out, _ = call("check", "--format", "json", prog("card"), "--query",
                        "pick(0,spades)")
    assert code == 0 and json.loads(out)["diagnostics"] == []


def test_check_unverified_exit_code(tmp_path):
    f = tmp_path / "cmp.hpl"
    f.write_text("u(X) : uniform_dens(X,0,1).\ng(X) : gaussian(X,0,1).\n"
                 "k(X) : gaussian(X,5,2).\nmix(X) :- u(U), U > 0.5, g(X).\n"
                 "mix(X) :- u(U), U < 0.5, k(X).\n")
    assert call("check", f)[0] == 2
    assert call("query", "--mc", "--samples", "10", f, "mix(X)")[0] == 2
    assert call("query", "--mc", "--samples", "10", "--force", f, "mix(X)")[0] == 0


def test_exact_query_json():
    code, out, _ = call("query", "--exact", "--epsilon", "1e-7", "--format", "json",
                        prog("card_inf"), "at_least_once_spades")
    assert code == 0
    data = json.loads(out)
    jsonschema.validate(data, schema("bound"))
    assert abs(data["lower_float"] - 0.5) < 1e-6


def test_exact_query_text():
    code, out, _ = call("query", "--exact", prog("card"), "pick(0,spades)")
    assert code == 0 and "lower: 1/3" in out and "exhausted: True" in out


def test_mc_query_json_and_text_agree():
    args = ("query", "--mc", "--samples", "2000", "--seed", "42")
    _, out_json, _ = call(*args, "--format", "json", prog("card_cont"),
                          "at_least_once_spades")
    _, out_text, _ = call(*args, prog("card_cont"), "at_least_once_spades")
    data = json.loads(out_json)
    jsonschema.validate(data, schema("estimate"))
    text = dict(line.split(": ", 1) for line in out_text.splitlines())
    assert set(text) == set(data)
    for k, v in data.items():
        assert text[k] == str(v)


def test_seed_from_environment(monkeypatch):
    args = ("query", "--mc", "--samples", "500", "--format", "json", prog("card"),
            "pick(0,clubs)")
    monkeypatch.setenv("HPLP_SEED", "77")
    a = json.loads(call(*args)[1])
    assert a["seed"] == 77
    assert json.loads(call(*args, "--seed", "77")[1]) == a
    monkeypatch.setenv("HPLP_SEED", "x")
    assert call(*args)[0] == 64


def test_refuses_ill_defined():
    code, out, err = call("query", "--mc", prog("prev_literal_bad"), "g1(1)")
    assert code == 1 and out == "" and "PREV_POSITIVE_LITERAL" in err


def test_continuous_index_never_forced():
    code, _, err = call("query", "--mc", "--force", prog("cont_index_bad"), "res(M)")
    assert code == 1 and "CONT_INDEX" in err


def test_forced_floundering_is_inference_error():
    assert call("query", "--mc", prog("card_inf_naive"), "at_least_once_spades")[0] == 1
    code, _, err = call("query", "--mc", "--force", prog("card_inf_naive"),
                        "at_least_once_spades")
    assert code == 3 and "FloundedNegation" in err


def test_exact_on_density_program_is_inference_error():
    assert call("query", "--exact", prog("card_cont"), "at_least_once_spades")[0] == 3


def test_usage_errors():
    assert call()[0] == 64
    assert call("bogus")[0] == 64
    assert call("query", prog("card"), "pick(0,clubs)")[0] == 64
    assert call("query", "--mc", "--samples", "0", prog("card"), "a")[0] == 64
    assert call("query", "--exact", "--epsilon", "-1", prog("card"), "a")[0] == 64
    assert call("query", "--exact", "--mc", prog("card"), "a")[0] == 64


def test_missing_file():
    assert call("check", "/nonexistent/x.hpl")[0] == 66


def test_syntax_error(tmp_path):
    f = tmp_path / "bad.hpl"
    f.write_text("p :- q(.\n")
    code, _, err = call("check", f)
    assert code == 65 and "1:" in err
    assert call("query", "--mc", prog("card"), "pick(0,")[0] == 65


@pytest.mark.parametrize("name", corpus_names())
def test_ast_schema(name):
    code, out, _ = call("ast", prog(name))
    assert code == 0
    jsonschema.validate(json.loads(out), schema("ast"))


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "hplp", "check", prog("card")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "well_defined" in r.stdout
