"""Recursive-descent parser for hybrid probabilistic logic programs.

Accepted top-level forms::

    P :: Atom.                      discrete probabilistic fact
    Atom : P.                       same fact, annotated form
    Atom : gaussian(V, Mean, Var).  density fact
    Atom : uniform_dens(V, Lo, Hi).
    Head.                           deterministic fact
    Head :- L1, ..., Ln.            clause
    :- continuous(p/N, [I, ...]).   signature override

Body literals are atoms, ``\\+ Atom``, comparisons ``E1 op E2`` with op in
``< > =< >=`` and definitions ``V =:= Expr``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from hplp.frontend.lexer import HplSyntaxError, Token, tokenize
from hplp.frontend.program import (DENSITY_FAMILIES, Clause, ContinuousDirective,
                                   DensityFact, DiscreteFact, Program)
from hplp.terms import (COMPARISON_OPS, Comparison, Compound, Const, Definition,
                        Negative, Positive, Span, Term, Var, is_arith, term_vars)

_NUMBER = ("INT", "REAL", "RAT")


class ParseError(HplSyntaxError):
    pass


def _span(first: Token, last: Token) -> Span:
    return Span(first.line, first.col, last.end_line, last.end_col)


def _variant_key(t: Term):
    """Structure of ``t`` with variables numbered by first occurrence."""
    names: dict = {}

    def walk(x):
        if type(x) is Var:
            return ("$VAR", names.setdefault(x.name, len(names)))
        if type(x) is Compound:
            return (x.functor,) + tuple(walk(a) for a in x.args)
        return (type(x.value).__name__, x.value)

    return walk(t)


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.anon = 0
        lines = text.split("\n")
        self.eof_line = len(lines)
        self.eof_col = len(lines[-1]) + 1

    # -- token helpers
    def peek(self, offset: int = 0) -> Optional[Token]:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, kind: str, text: Optional[str] = None, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.eof_line, self.eof_col)
        self.pos += 1
        return tok

    def expect(self, kind: str, *expected: str) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind:
            self.fail("unexpected " + (repr(tok.text) if tok else "end of input"),
                      expected or (kind,))
        return self.advance()

    def fail(self, message: str, expected=(), tok: Optional[Token] = None):
        tok = tok or self.peek()
        if tok is None:
            raise ParseError(message, self.eof_line, self.eof_col, expected)
        raise ParseError(message, tok.line, tok.col, expected)

    def last(self) -> Token:
        return self.tokens[self.pos - 1]

    # -- terms
    def variable(self, tok: Token) -> Var:
        span = _span(tok, tok)
        if tok.text == "_":
            self.anon += 1
            return Var(f"_#{self.anon}", span)
        return Var(tok.text, span)

    def expr(self) -> Term:
        first = self.peek()
        left = self.product()
        while self.at("OP", "+") or self.at("OP", "-"):
            op = self.advance().text
            right = self.product()
            left = Compound(op, (left, right), _span(first, self.last()))
        return left

    def product(self) -> Term:
        first = self.peek()
        left = self.unary()
        while self.at("OP", "*") or self.at("OP", "/"):
            op = self.advance().text
            right = self.unary()
            left = Compound(op, (left, right), _span(first, self.last()))
        return left

    def unary(self) -> Term:
        if self.at("OP", "-"):
            first = self.advance()
            nxt = self.peek()
            if nxt is not None and nxt.kind in ("INT", "REAL") and (
                    nxt.line, nxt.col) == (first.end_line, first.end_col):
                self.advance()
                return Const(-nxt.value, _span(first, nxt))
            arg = self.unary()
            return Compound("-", (arg,), _span(first, self.last()))
        return self.primary()

    def primary(self) -> Term:
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of input", ("term",))
        if tok.kind == "VAR":
            return self.variable(self.advance())
        if tok.kind in ("INT", "REAL"):
            self.advance()
            return Const(tok.value, _span(tok, tok))
        if tok.kind == "RAT":
            self.advance()
            num, den = tok.text.split("/")
            sp = _span(tok, tok)
            return Compound("/", (Const(int(num), sp), Const(int(den), sp)), sp)
        if tok.kind == "ATOM":
            return self.atom()
        if tok.kind == "LPAREN":
            self.advance()
            inner = self.expr()
            self.expect("RPAREN", "')'")
            return inner
        if tok.kind == "CUT":
            self.fail("cut is not supported")
        if tok.kind == "LBRACKET":
            self.fail("lists are only allowed in directives")
        self.fail(f"unexpected {tok.text!r}", ("term",))

    def atom(self) -> Term:
        tok = self.expect("ATOM", "atom")
        if self.at("LPAREN") and (self.peek().line, self.peek().col) == (
                tok.end_line, tok.end_col):
            self.advance()
            args = [self.expr()]
            while self.at("COMMA"):
                self.advance()
                args.append(self.expr())
            self.expect("RPAREN", "','", "')'")
            return Compound(tok.value, args, _span(tok, self.last()))
        return Const(tok.value, _span(tok, tok))

    # -- literals
    def literal(self):
        first = self.peek()
        if first is None:
            self.fail("unexpected end of input", ("literal",))
        if first.kind == "NAF":
            self.advance()
            if not self.at("ATOM"):
                self.fail("negation applies to atoms only", ("atom",))
            a = self.atom()
            return Negative(a, _span(first, self.last()))
        if first.kind == "CUT":
            self.fail("cut is not supported")
        left = self.expr()
        tok = self.peek()
        if tok is not None and tok.kind == "OP" and tok.text not in ("+", "-", "*", "/"):
            self.advance()
            if tok.text == "=:=":
                if type(left) is not Var:
                    self.fail("left side of =:= must be a variable", tok=first)
                right = self.expr()
                return Definition(left, right, _span(first, self.last()))
            if tok.text not in COMPARISON_OPS:
                self.fail(f"unsupported comparison operator {tok.text!r}",
                          ("<", ">", "=<", ">=", "=:="), tok=tok)
            right = self.expr()
            return Comparison(tok.text, left, right, _span(first, self.last()))
        if tok is not None and tok.kind == "ATOM" and tok.text == "is":
            self.fail("'is' is not supported; use =:= to define a variable", tok=tok)
        if type(left) is Var or (type(left) is Const and type(left.value) is not str) \
                or is_arith(left):
            self.fail("expected an atom or a comparison", tok=first)
        return Positive(left, _span(first, self.last()))

    def body(self) -> tuple:
        lits = [self.literal()]
        while self.at("COMMA"):
            self.advance()
            lits.append(self.literal())
        return tuple(lits)

    # -- top level
    def probability(self) -> Fraction:
        tok = self.advance()
        if tok.kind not in _NUMBER:
            self.fail("expected a probability", _NUMBER, tok=tok)
        p = Fraction(tok.text) if tok.kind == "REAL" else Fraction(tok.value)
        if not 0 < p <= 1:
            self.fail(f"probability {tok.text} outside ]0,1]", tok=tok)
        return p

    def head(self) -> Term:
        if not self.at("ATOM"):
            self.fail(f"unexpected {self.peek().text!r}", ("atom",))
        return self.atom()

    def item(self):
        first = self.peek()
        if first.kind == "NECK":
            return self.directive()
        if first.kind in _NUMBER and self.at("OPDOUBLECOLON", offset=1):
            p = self.probability()
            self.advance()
            template = self.head()
            self.expect("DOT", "'.'")
            return DiscreteFact(template, p, span=_span(first, self.last()))
        head = self.head()
        tok = self.peek()
        if tok is None:
            self.fail("unexpected end of input", ("'.'", "':-'", "':'"))
        if tok.kind == "DOT":
            self.advance()
            return Clause(head, (), _span(first, tok))
        if tok.kind == "NECK":
            self.advance()
            body = self.body()
            self.expect("DOT", "','", "'.'")
            return Clause(head, body, _span(first, self.last()))
        if tok.kind == "COLON":
            self.advance()
            if self.peek() is not None and self.peek().kind in _NUMBER:
                p = self.probability()
                self.expect("DOT", "'.'")
                return DiscreteFact(head, p, span=_span(first, self.last()))
            return self.density(head, first)
        self.fail(f"unexpected {tok.text!r}", ("'.'", "':-'", "':'"))

    def density(self, head: Term, first: Token):
        dtok = self.peek()
        dens = self.expr()
        if type(dens) is not Compound or dens.functor not in DENSITY_FAMILIES:
            self.fail("expected a probability or a density",
                      ("number", "gaussian(...)", "uniform_dens(...)"), tok=dtok)
        if len(dens.args) != 3:
            self.fail(f"{dens.functor} takes 3 arguments", tok=dtok)
        var = dens.args[0]
        if type(var) is not Var:
            self.fail("first argument of a density must be a variable", tok=dtok)
        if type(head) is not Compound or var not in head.args:
            self.fail(f"density variable {var.name} must be an argument of the head",
                      tok=first)
        self.expect("DOT", "'.'")
        return DensityFact(head, dens.functor, var, tuple(dens.args[1:]),
                           span=_span(first, self.last()))

    def directive(self):
        first = self.advance()
        name = self.expect("ATOM", "continuous")
        if name.text != "continuous":
            self.fail(f"unsupported directive {name.text!r}", ("continuous",), tok=name)
        self.expect("LPAREN", "'('")
        pname = self.expect("ATOM", "predicate name").value
        if not self.at("OP", "/"):
            self.fail("expected name/arity", ("'/'",))
        self.advance()
        arity = self.expect("INT", "arity").value
        self.expect("COMMA", "','")
        self.expect("LBRACKET", "'['")
        positions = []
        if not self.at("RBRACKET"):
            positions.append(self.expect("INT", "position").value)
            while self.at("COMMA"):
                self.advance()
                positions.append(self.expect("INT", "position").value)
        self.expect("RBRACKET", "']'")
        self.expect("RPAREN", "')'")
        self.expect("DOT", "'.'")
        for p in positions:
            if not 1 <= p <= arity:
                self.fail(f"position {p} outside 1..{arity}", tok=first)
        return ContinuousDirective((pname, arity), frozenset(positions),
                                   _span(first, self.last()))

    def program(self) -> list:
        items = []
        while self.peek() is not None:
            items.append(self.item())
        return items


def _check_items(items: list) -> None:
    seen: dict = {}
    kinds: dict = {}
    for item in items:
        if isinstance(item, (DiscreteFact, DensityFact)):
            kind = "discrete" if isinstance(item, DiscreteFact) else "density"
            other = kinds.setdefault(item.key, (kind, item))
            if other[0] != kind:
                sp = item.span
                raise ParseError(
                    f"{item.key[0]}/{item.key[1]} is defined both as a discrete and "
                    "as a density fact", sp.line if sp else 0, sp.col if sp else 0)
            if isinstance(item, DiscreteFact):
                note = ("p", item.probability)
            else:
                note = ("d", item.family, item.template.args.index(item.var),
                        _variant_key(Compound("p", (item.template,) + item.params)))
            key = _variant_key(item.template)
            prev = seen.setdefault(key, note)
            if prev != note:
                sp = item.span
                raise ParseError("contradictory annotations for the same fact",
                                 sp.line if sp else 0, sp.col if sp else 0)


def parse_items(text: str) -> list:
    return _Parser(text).program()


def build_program(items: list) -> Program:
    from hplp.frontend.signatures import infer_signatures

    _check_items(items)
    discrete, density, clauses, directives = [], [], [], []
    numbered = []
    for item in items:
        if isinstance(item, DiscreteFact):
            item = DiscreteFact(item.template, item.probability, len(discrete), item.span)
            discrete.append(item)
        elif isinstance(item, DensityFact):
            item = DensityFact(item.template, item.family, item.var, item.params,
                               len(density), item.span)
            density.append(item)
        elif isinstance(item, Clause):
            clauses.append(item)
        else:
            directives.append(item)
        numbered.append(item)
    program = Program(discrete, density, clauses, directives=directives, items=numbered)
    program.signatures, program.signature_conflicts = infer_signatures(program,
                                                                       with_conflicts=True)
    return program


def parse_program(text: str) -> Program:
    """Parse program text into a :class:`Program` with inferred signatures."""
    return build_program(parse_items(text))


def parse_query(text: str) -> tuple:
    """Parse a query: a conjunction of body literals, optional final dot."""
    p = _Parser(text)
    if p.peek() is None:
        p.fail("empty query", ("literal",))
    lits = p.body()
    if p.at("DOT"):
        p.advance()
    if p.peek() is not None:
        p.fail(f"unexpected {p.peek().text!r}", ("','", "end of query"))
    return lits


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.expr()
    if p.peek() is not None:
        p.fail(f"unexpected {p.peek().text!r}", ("end of term",))
    return t


def query_vars(goal: tuple) -> list:
    seen: dict = {}
    for lit in goal:
        for t in lit.terms():
            for v in term_vars(t):
                if not v.name.startswith("_#"):
                    seen.setdefault(v, None)
    return list(seen)
