"""Logic terms and literals shared by every stage of the engine.

Terms are immutable.  Source spans ride along for diagnostics but never take
part in equality or hashing, so a parsed term and a term built by hand compare
equal when they have the same structure.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int
    end_col: int

    def to_dict(self) -> dict:
        return {"line": self.line, "col": self.col,
                "end_line": self.end_line, "end_col": self.end_col}

    def __lt__(self, other: "Span") -> bool:
        return (self.line, self.col) < (other.line, other.col)


class Term:
    __slots__ = ()


class Var(Term):
    __slots__ = ("name", "span")

    def __init__(self, name: str, span: Optional[Span] = None):
        self.name = name
        self.span = span

    def __eq__(self, other):
        return type(other) is Var and other.name == self.name

    def __hash__(self):
        return hash(("V", self.name))

    def __repr__(self):
        return self.name


class Const(Term):
    """A symbol (``str``), an integer or a real."""

    __slots__ = ("value", "span", "_hash")

    def __init__(self, value: Union[str, int, float], span: Optional[Span] = None):
        self.value = value
        self.span = span
        self._hash = None

    def __eq__(self, other):
        # 1 and 1.0 are different terms
        return (type(other) is Const and type(other.value) is type(self.value)
                and other.value == self.value)

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((type(self.value).__name__, self.value))
        return h

    def __repr__(self):
        return format_term(self)

    @property
    def is_real(self) -> bool:
        return type(self.value) is float

    @property
    def is_number(self) -> bool:
        return type(self.value) in (int, float)


class Compound(Term):
    __slots__ = ("functor", "args", "span", "_hash")

    def __init__(self, functor: str, args, span: Optional[Span] = None):
        if not functor:
            raise ValueError("empty functor")
        if not args:
            raise ValueError("compound terms need at least one argument")
        self.functor = functor
        self.args = tuple(args)
        self.span = span
        self._hash = None

    @classmethod
    def make(cls, functor: str, args: tuple) -> "Compound":
        """Unchecked constructor for the solver's hot path."""
        obj = object.__new__(cls)
        obj.functor = functor
        obj.args = args
        obj.span = None
        obj._hash = None
        return obj

    def __eq__(self, other):
        return (type(other) is Compound and other.functor == self.functor
                and other.args == self.args)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.functor, self.args))
        return self._hash

    def __repr__(self):
        return format_term(self)

    @property
    def arity(self) -> int:
        return len(self.args)


ARITH_OPS = frozenset({"+", "-", "*", "/"})
COMPARISON_OPS = ("<", ">", "=<", ">=")


def indicator(atom: Term) -> tuple[str, int]:
    """``(name, arity)`` of an atom-shaped term."""
    if type(atom) is Compound:
        return atom.functor, len(atom.args)
    if type(atom) is Const and type(atom.value) is str:
        return atom.value, 0
    raise TypeError(f"not an atom: {atom!r}")


def atom_args(atom: Term) -> tuple:
    return atom.args if type(atom) is Compound else ()


def is_ground(t: Term) -> bool:
    if type(t) is Var:
        return False
    if type(t) is Compound:
        return all(is_ground(a) for a in t.args)
    return True


def term_vars(t: Term) -> Iterator[Var]:
    """Variables of ``t`` in left-to-right order, with repeats."""
    if type(t) is Var:
        yield t
    elif type(t) is Compound:
        for a in t.args:
            yield from term_vars(a)


def unique_vars(*terms: Term) -> list[Var]:
    seen: dict[Var, None] = {}
    for t in terms:
        for v in term_vars(t):
            seen.setdefault(v, None)
    return list(seen)


def is_arith(t: Term) -> bool:
    return type(t) is Compound and t.functor in ARITH_OPS and len(t.args) in (1, 2)


# -- literals ---------------------------------------------------------------

class Literal:
    __slots__ = ()

    def terms(self) -> tuple:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Positive(Literal):
    atom: Term
    span: Optional[Span] = None

    def __eq__(self, other):
        return type(other) is Positive and other.atom == self.atom

    def __hash__(self):
        return hash(("+", self.atom))

    def terms(self):
        return (self.atom,)


@dataclass(frozen=True, eq=False)
class Negative(Literal):
    atom: Term
    span: Optional[Span] = None

    def __eq__(self, other):
        return type(other) is Negative and other.atom == self.atom

    def __hash__(self):
        return hash(("\\+", self.atom))

    def terms(self):
        return (self.atom,)


@dataclass(frozen=True, eq=False)
class Comparison(Literal):
    op: str
    left: Term
    right: Term
    span: Optional[Span] = None

    def __eq__(self, other):
        return (type(other) is Comparison and other.op == self.op
                and other.left == self.left and other.right == self.right)

    def __hash__(self):
        return hash((self.op, self.left, self.right))

    def terms(self):
        return (self.left, self.right)


@dataclass(frozen=True, eq=False)
class Definition(Literal):
    """``Target =:= Expr``: binds a derived continuous variable."""

    target: Var
    expr: Term
    span: Optional[Span] = None

    def __eq__(self, other):
        return (type(other) is Definition and other.target == self.target
                and other.expr == self.expr)

    def __hash__(self):
        return hash(("=:=", self.target, self.expr))

    def terms(self):
        return (self.target, self.expr)


def literal_vars(lit: Literal) -> list[Var]:
    return unique_vars(*lit.terms())


# -- printing ---------------------------------------------------------------

_PREC = {"+": 500, "-": 500, "*": 400, "/": 400}


def _format_number(v) -> str:
    if type(v) is float:
        r = repr(v)
        return r if ("." in r or "e" in r or "n" in r) else r + ".0"
    return str(v)


def _needs_quotes(s: str) -> bool:
    if not s:
        return True
    if s[0].islower() and all(c.isalnum() or c == "_" for c in s):
        return False
    return s not in ("[]",)


def format_term(t: Term, prec: int = 999) -> str:
    if type(t) is Var:
        return "_" if t.name.startswith("_#") else t.name
    if type(t) is Const:
        v = t.value
        if type(v) is str:
            return "'" + v.replace("'", "\\'") + "'" if _needs_quotes(v) else v
        s = _format_number(v)
        return f"({s})" if s.startswith("-") and prec < 999 else s
    if t.functor in _PREC and len(t.args) == 2:
        p = _PREC[t.functor]
        left = format_term(t.args[0], p)
        right = format_term(t.args[1], p - 1)
        s = f"{left} {t.functor} {right}"
        return f"({s})" if p > prec else s
    if t.functor == "-" and len(t.args) == 1:
        return "-" + format_term(t.args[0], 200)
    name = format_term(Const(t.functor))
    return f"{name}(" + ", ".join(format_term(a) for a in t.args) + ")"


def format_literal(lit: Literal) -> str:
    if type(lit) is Positive:
        return format_term(lit.atom)
    if type(lit) is Negative:
        return "\\+ " + format_term(lit.atom)
    if type(lit) is Comparison:
        return f"{format_term(lit.left)} {lit.op} {format_term(lit.right)}"
    if type(lit) is Definition:
        return f"{format_term(lit.target)} =:= {format_term(lit.expr)}"
    raise TypeError(lit)


def format_fraction(p: Fraction) -> str:
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"
