import pytest

from hplp.frontend import parse_program, parse_query
from hplp.resources import read_corpus


def load(name):
    return parse_program(read_corpus(name))


def q(text):
    return parse_query(text)


@pytest.fixture
def corpus():
    return load
