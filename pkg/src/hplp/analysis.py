"""Static well-definedness checks for hybrid programs.

Every check returns a list of :class:`Diagnostic`; :func:`validate` runs them
all and derives a verdict.  :func:`check_query` is a separate, query-driven
mode analysis that decides whether a query only ever calls probabilistic
facts with ground index arguments.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from hplp.frontend.program import Clause, DensityFact, DiscreteFact, Program
from hplp.resolution import resolve, unify_in
from hplp.terms import (Comparison, Compound, Const, Definition, Negative, Positive,
                        Span, Var, format_literal, format_term, indicator, is_arith,
                        term_vars)

RULES = ("RANGE_RESTRICTION", "PREV_POSITIVE_LITERAL", "MUTUAL_EXCLUSION",
         "CONT_USAGE", "CONT_INDEX", "SIG_CONFLICT", "FLOUNDER_RISK")
ERROR, WARNING, UNVERIFIED = "error", "warning", "unverified"

DEFAULT_UNFOLD_DEPTH = 3


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    severity: str
    span: Optional[Span]
    message: str

    def sort_key(self) -> tuple:
        s = self.span
        return (s.line, s.col) if s else (0, 0), self.rule, self.message

    def to_dict(self) -> dict:
        s = self.span
        return {"rule": self.rule, "severity": self.severity,
                "line": s.line if s else 0, "col": s.col if s else 0,
                "message": self.message}

    def __str__(self):
        s = self.span
        where = f"{s.line}:{s.col}" if s else "-"
        return f"{where}: {self.severity} {self.rule}: {self.message}"


@dataclass
class Report:
    verdict: str
    diagnostics: list = field(default_factory=list)

    @classmethod
    def of(cls, diagnostics: Iterable[Diagnostic]) -> "Report":
        diags = sorted(set(diagnostics), key=Diagnostic.sort_key)
        if any(d.severity == ERROR for d in diags):
            verdict = "ill_defined"
        elif any(d.severity == UNVERIFIED for d in diags):
            verdict = "unverified"
        else:
            verdict = "well_defined"
        return cls(verdict, diags)

    def errors(self) -> list:
        return [d for d in self.diagnostics if d.severity == ERROR]

    def to_dict(self) -> dict:
        return {"verdict": self.verdict,
                "diagnostics": [d.to_dict() for d in self.diagnostics]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# -- shared helpers ---------------------------------------------------------

def _span(*candidates) -> Optional[Span]:
    for c in candidates:
        s = getattr(c, "span", None)
        if s is not None:
            return s
    return None


def _atom_literals(clause: Clause):
    for lit in clause.body:
        if type(lit) in (Positive, Negative):
            yield lit


def _vars(t) -> set:
    return set(term_vars(t))


def _lit_vars(lit) -> set:
    out: set = set()
    for t in lit.terms():
        out |= _vars(t)
    return out


class _Facts:
    """Per-predicate facts about how a program defines each key."""

    def __init__(self, program: Program):
        self.program = program
        self.sig = program.signatures
        self.prob: dict = {}        # key -> probabilistic definitions
        self.ordinary: set = set()  # keys with a clause or deterministic fact
        for item in program.items:
            if isinstance(item, DiscreteFact) and not item.deterministic:
                self.prob.setdefault(item.key, []).append(item)
            elif isinstance(item, DensityFact):
                self.prob.setdefault(item.key, []).append(item)
            elif isinstance(item, (Clause, DiscreteFact)):
                self.ordinary.add(item.key)

    def required(self, key) -> tuple:
        """0-based positions a probabilistic call needs ground: index
        positions and density parameter positions."""
        index: set = set()
        params: set = set()
        for f in self.prob.get(key, ()):
            args = f.template.args if type(f.template) is Compound else ()
            if isinstance(f, DiscreteFact):
                index |= {i for i, a in enumerate(args) if _vars(a)}
                continue
            pvars = {v for p in f.params for v in term_vars(p)}
            for i, a in enumerate(args):
                if a == f.var:
                    continue
                if type(a) is Var and a in pvars:
                    params.add(i)
                elif _vars(a):
                    index.add(i)
        return index, params

    def continuous_vars(self, clause: Clause) -> set:
        cont: set = set()

        def visit(t, positions):
            if type(t) is not Compound:
                return
            for i, a in enumerate(t.args, start=1):
                if type(a) is Var and i in positions:
                    cont.add(a)
                elif type(a) is Compound and not is_arith(a):
                    visit(a, self.sig.functor_continuous((a.functor, len(a.args))))

        visit(clause.head, self.sig.continuous(indicator(clause.head)))
        for lit in clause.body:
            if type(lit) in (Positive, Negative):
                visit(lit.atom, self.sig.continuous(indicator(lit.atom)))
            elif type(lit) is Definition:
                cont.add(lit.target)
                cont |= _vars(lit.expr)
        return cont

    def caller_bound(self, clause: Clause) -> set:
        """Head variables assumed bound on entry: those the body does not
        itself produce through an ordinary positive literal."""
        produced: set = set()
        for lit in clause.body:
            if type(lit) is Positive and indicator(lit.atom) in self.ordinary:
                produced |= _vars(lit.atom)
        return _vars(clause.head) - produced


# -- range restriction -------------------------------------------------------

def check_range_restriction(program: Program) -> list:
    """Head variables at term positions must occur in a positive body
    literal.  A variable that only feeds a negated probabilistic fact is let
    through: its groundness is the caller's obligation and is checked by the
    query analysis."""
    sig = program.signatures
    facts = _Facts(program)
    out = []
    for clause in program.clauses:
        key = indicator(clause.head)
        args = clause.head.args if type(clause.head) is Compound else ()
        term_vars_ = []
        for i, a in enumerate(args, start=1):
            if type(a) is Var and sig.is_continuous(key, i):
                continue
            term_vars_.extend(term_vars(a))
        positive: set = set()
        for lit in clause.body:
            if type(lit) is Positive or (
                    type(lit) is Negative and indicator(lit.atom) in facts.prob):
                positive |= _vars(lit.atom)
        reported: set = set()
        for v in term_vars_:
            if v in positive or v in reported:
                continue
            reported.add(v)
            name = "_" if v.name.startswith("_#") else v.name
            out.append(Diagnostic(
                "RANGE_RESTRICTION", ERROR, _span(v, clause),
                f"head variable {name} of {key[0]}/{key[1]} does not occur in a "
                "positive body literal"))
    return out


# -- probabilistic facts called with bound arguments -------------------------

def check_prev_positive_literal(program: Program) -> list:
    facts = _Facts(program)
    out = []
    for clause in program.clauses:
        bound = set(facts.caller_bound(clause))
        for lit in clause.body:
            if type(lit) in (Positive, Negative):
                key = indicator(lit.atom)
                if key in facts.prob:
                    index, _ = facts.required(key)
                    args = lit.atom.args if type(lit.atom) is Compound else ()
                    for i in sorted(index):
                        for v in term_vars(args[i]):
                            if v in bound:
                                continue
                            name = "_" if v.name.startswith("_#") else v.name
                            out.append(Diagnostic(
                                "PREV_POSITIVE_LITERAL", ERROR, _span(v, lit, clause),
                                f"variable {name} in argument {i + 1} of probabilistic "
                                f"fact {key[0]}/{key[1]} is not bound by a previous "
                                f"positive literal in the clause for "
                                f"{format_term(clause.head)}"))
                if type(lit) is Positive:
                    bound |= _vars(lit.atom)
            elif type(lit) is Definition:
                bound.add(lit.target)
    return out


# -- continuous usage -------------------------------------------------------

def _real_constants(t, positions, sig, path=()):
    """Real constants at non-continuous positions of ``t``."""
    if type(t) is not Compound:
        return
    for i, a in enumerate(t.args, start=1):
        if type(a) is Const and type(a.value) is float and i not in positions:
            yield a
        elif type(a) is Compound and not is_arith(a):
            yield from _real_constants(a, sig.functor_continuous(
                (a.functor, len(a.args))), sig)


def check_continuous_usage(program: Program) -> list:
    facts = _Facts(program)
    sig = program.signatures
    fixed_keys = set(facts.prob) | {f.key for f in program.discrete_facts} | {
        d.pred for d in program.directives}
    out = []

    for f in program.density_facts:
        head_vars = _vars(f.template)
        for p in f.params:
            for v in term_vars(p):
                if v not in head_vars:
                    out.append(Diagnostic(
                        "CONT_USAGE", ERROR, _span(v, f),
                        f"parameter variable {v.name} of {f.family} in "
                        f"{format_term(f.template)} is never bound"))
    for item in program.discrete_facts + program.density_facts:
        key = item.key
        for c in _real_constants(item.template, sig.continuous(key), sig):
            out.append(Diagnostic(
                "CONT_USAGE", ERROR, _span(c, item),
                f"real constant {format_term(c)} in a term position of "
                f"{key[0]}/{key[1]}"))

    for clause in program.clauses:
        cont = facts.continuous_vars(clause)
        atoms = [(clause.head, clause)] + [(lit.atom, lit)
                                           for lit in _atom_literals(clause)]
        for atom, where in atoms:
            key = indicator(atom)
            positions = sig.continuous(key)
            for c in _real_constants(atom, positions, sig):
                out.append(Diagnostic(
                    "CONT_USAGE", ERROR, _span(c, where, clause),
                    f"real constant {format_term(c)} in a term position of "
                    f"{key[0]}/{key[1]}"))
            if key not in fixed_keys or type(atom) is not Compound:
                continue
            for i, a in enumerate(atom.args, start=1):
                if i in positions:
                    continue
                for v in term_vars(a):
                    if v not in cont:
                        continue
                    if key in facts.prob:
                        out.append(Diagnostic(
                            "CONT_INDEX", ERROR, _span(v, where, clause),
                            f"continuous variable {v.name} indexes the random "
                            f"variable {key[0]}/{key[1]} (argument {i}); a real value "
                            "cannot identify a random variable"))
                    else:
                        out.append(Diagnostic(
                            "CONT_USAGE", ERROR, _span(v, where, clause),
                            f"continuous variable {v.name} in term position {i} of "
                            f"{key[0]}/{key[1]}"))
    for c in program.signature_conflicts:
        out.append(Diagnostic("SIG_CONFLICT", ERROR, c.span, c.message))
    return out


# -- mutual exclusivity ------------------------------------------------------
#
# A conjunction is a tuple of goals over a shared substitution.  Goals are
# ("+", atom, leaf), ("-", atom, leaf) or ("c", literal); leaf goals are
# probabilistic atoms that unfolding leaves in place.

class _Unfolder:
    def __init__(self, program: Program, facts: _Facts):
        self.program = program
        self.facts = facts
        self.fresh = itertools.count(1)

    def rename(self, t, sfx):
        if type(t) is Var:
            return Var(t.name + sfx)
        if type(t) is Compound:
            return Compound(t.functor, tuple(self.rename(a, sfx) for a in t.args))
        return t

    def rename_lit(self, lit, sfx):
        t = type(lit)
        if t is Positive:
            return Positive(self.rename(lit.atom, sfx), lit.span)
        if t is Negative:
            return Negative(self.rename(lit.atom, sfx), lit.span)
        if t is Comparison:
            return Comparison(lit.op, self.rename(lit.left, sfx),
                              self.rename(lit.right, sfx), lit.span)
        return Definition(self.rename(lit.target, sfx), self.rename(lit.expr, sfx),
                          lit.span)

    def goals(self, body) -> tuple:
        out = []
        for lit in body:
            if type(lit) is Positive:
                # even probabilistic atoms get one step, to pick a template
                out.append(("+", lit.atom, False))
            elif type(lit) is Negative:
                out.append(("-", lit.atom, self.is_leaf(lit.atom)))
            else:
                out.append(("c", lit))
        return tuple(out)

    def is_leaf(self, atom) -> bool:
        return indicator(atom) not in self.facts.ordinary

    def alternatives(self, atom, s: dict) -> list:
        """One unfolding step of ``atom``: ``(goals, subst)`` per matching
        definition, in source order."""
        out = []
        for item in self.program.definitions(indicator(atom)):
            sfx = f"~{next(self.fresh)}"
            if isinstance(item, Clause):
                s2 = unify_in(atom, self.rename(item.head, sfx), s)
                if s2 is not None:
                    body = [self.rename_lit(lit, sfx) for lit in item.body]
                    out.append((self.goals(body), s2))
            else:
                s2 = unify_in(atom, self.rename(item.template, sfx), s)
                if s2 is None:
                    continue
                if isinstance(item, DiscreteFact) and item.deterministic:
                    out.append(((), s2))
                else:
                    out.append(((("+", atom, True),), s2))
        return out

    def step(self, conj: tuple) -> list:
        """Unfold every non-leaf goal of ``conj`` once."""
        goals, s = conj
        partial = [((), s)]
        for g in goals:
            nxt = []
            for done, s1 in partial:
                if g[0] == "+" and not g[2]:
                    for alt, s2 in self.alternatives(g[1], s1):
                        nxt.append((done + alt, s2))
                elif g[0] == "-" and not g[2]:
                    neg = self.negate(g[1], s1)
                    if neg is None:
                        nxt.append((done + (g,), s1))
                    else:
                        nxt.extend((done + n, s1) for n in neg)
                else:
                    nxt.append((done + (g,), s1))
            partial = nxt
        return [c for c in partial if self.consistent(c)]

    def negate(self, atom, s: dict) -> Optional[list]:
        """``not atom`` as a list of conjunctions, when every definition
        unfolds to at most one literal without binding ``atom``; else None."""
        atom = resolve(atom, s)
        if _vars(atom):
            return None
        conj: list = []
        for goals, s2 in self.alternatives(atom, s):
            if len(goals) == 0:
                return []            # atom holds unconditionally
            if len(goals) > 1 or goals[0][0] == "c":
                return None
            sign, a, leaf = goals[0]
            a = resolve(a, s2)
            if _vars(a):
                return None
            conj.append(("-" if sign == "+" else "+", a, leaf or sign == "-"
                         and self.is_leaf(a)))
        return [tuple(conj)]

    @staticmethod
    def consistent(conj) -> bool:
        goals, s = conj
        pos, neg = set(), set()
        for g in goals:
            if g[0] in "+-":
                a = resolve(g[1], s)
                (pos if g[0] == "+" else neg).add(a)
        return not (pos & neg)

    @staticmethod
    def complete(conj) -> bool:
        return all(g[2] if g[0] in "+-" else type(g[1]) is not Comparison
                   for g in conj[0])

    @staticmethod
    def has_open(conj) -> bool:
        return any(g[0] in "+-" and not g[2] for g in conj[0])


def _merge(s1: dict, s2: dict) -> Optional[dict]:
    out = s1
    for name, t in s2.items():
        if s1.get(name) is t:
            continue
        out = unify_in(Var(name), t, out)
        if out is None:
            return None
    return out


def _exclusive(c1, c2) -> tuple:
    """``(exclusive, merged_substitution)`` for two conjunctions."""
    s = _merge(c1[1], c2[1])
    if s is None:
        return True, None
    pos1 = {resolve(g[1], s) for g in c1[0] if g[0] == "+"}
    neg1 = {resolve(g[1], s) for g in c1[0] if g[0] == "-"}
    pos2 = {resolve(g[1], s) for g in c2[0] if g[0] == "+"}
    neg2 = {resolve(g[1], s) for g in c2[0] if g[0] == "-"}
    return bool(pos1 & neg2 or pos2 & neg1), s


def _body_term_vars(clause: Clause, facts: _Facts) -> list:
    head = _vars(clause.head)
    cont = facts.continuous_vars(clause)
    seen: dict = {}
    for lit in clause.body:
        if type(lit) is Positive:
            for v in term_vars(lit.atom):
                if v not in head and v not in cont:
                    seen.setdefault(v, None)
    return list(seen)


def check_mutual_exclusivity(program: Program,
                             unfold_depth: int = DEFAULT_UNFOLD_DEPTH) -> list:
    if unfold_depth < 0:
        raise ValueError("unfold_depth must be non-negative")
    facts = _Facts(program)
    sig = program.signatures
    by_key: dict = {}
    for c in program.clauses:
        by_key.setdefault(c.key, []).append(c)
    out = []
    for key, clauses in by_key.items():
        if not sig.continuous(key):
            continue
        pairs = [(i, j) for i in range(len(clauses)) for j in range(i + 1, len(clauses))]
        pairs += [(i, i) for i, c in enumerate(clauses) if _body_term_vars(c, facts)]
        for i, j in pairs:
            diag = _check_pair(program, facts, key, clauses[i], clauses[j],
                               unfold_depth, same=(i == j))
            if diag is not None:
                out.append(diag)
    return out


def _check_pair(program, facts, key, ci: Clause, cj: Clause, depth: int,
                same: bool) -> Optional[Diagnostic]:
    u = _Unfolder(program, facts)
    a, b = "~a", "~b"
    s0 = unify_in(u.rename(ci.head, a), u.rename(cj.head, b), {})
    if s0 is None:
        return None
    shared = [(u.rename(v, a), u.rename(v, b)) for v in _body_term_vars(ci, facts)] \
        if same else []
    left = [(u.goals([u.rename_lit(l, a) for l in ci.body]), s0)]
    right = [(u.goals([u.rename_lit(l, b) for l in cj.body]), s0)]
    left = [c for c in left if u.consistent(c)]
    right = [c for c in right if u.consistent(c)]
    what = (f"groundings of the clause for {key[0]}/{key[1]} at line {ci.span.line}"
            if same and ci.span else
            f"clauses for {key[0]}/{key[1]}" + (
                f" at lines {ci.span.line} and {cj.span.line}"
                if ci.span and cj.span else ""))
    for level in range(depth + 1):
        overlap = None
        open_pair = False
        for c1 in left:
            for c2 in right:
                excl, s = _exclusive(c1, c2)
                if excl:
                    continue
                pairs = [(resolve(x, s), resolve(y, s)) for x, y in shared]
                ground = all(not _vars(x) and not _vars(y) for x, y in pairs)
                if pairs and ground and all(x == y for x, y in pairs):
                    continue      # the same grounding, not a second one
                merged = (c1[0] + c2[0], s)
                if u.complete(c1) and u.complete(c2) and u.consistent(merged) \
                        and ground:
                    overlap = overlap or (c1, c2)
                else:
                    open_pair = True
        if overlap is None and not open_pair:
            return None
        if level == depth or not any(u.has_open(c) for c in left + right):
            break
        left = [c2 for c in left for c2 in u.step(c)]
        right = [c2 for c in right for c2 in u.step(c)]
    if overlap is not None:
        return Diagnostic(
            "MUTUAL_EXCLUSION", ERROR, cj.span,
            f"the bodies of the {what} can both be true in one world, so the "
            "continuous variable may get more than one value")
    return Diagnostic(
        "MUTUAL_EXCLUSION", UNVERIFIED, cj.span,
        f"could not show that the bodies of the {what} are mutually exclusive "
        f"within unfolding depth {depth}")


# -- negation safety --------------------------------------------------------

def check_flounder_risk(program: Program) -> list:
    facts = _Facts(program)
    out = []
    for clause in program.clauses:
        bound = set(facts.caller_bound(clause))
        for lit in clause.body:
            if type(lit) is Positive:
                bound |= _vars(lit.atom)
            elif type(lit) is Definition:
                bound.add(lit.target)
            elif type(lit) is Negative:
                free = sorted(v.name for v in _vars(lit.atom) - bound)
                if free:
                    out.append(Diagnostic(
                        "FLOUNDER_RISK", WARNING, _span(lit, clause),
                        f"{format_literal(lit)} may be selected with unbound "
                        f"variables {', '.join(n if not n.startswith('_#') else '_' for n in free)}"))
    return out


def validate(program: Program, unfold_depth: int = DEFAULT_UNFOLD_DEPTH) -> Report:
    diags = []
    diags += check_range_restriction(program)
    diags += check_prev_positive_literal(program)
    diags += check_mutual_exclusivity(program, unfold_depth)
    diags += check_continuous_usage(program)
    diags += check_flounder_risk(program)
    return Report.of(diags)


# -- query-driven groundness ------------------------------------------------

class _Modes:
    """Abstract interpretation over call patterns: which arguments are ground
    on entry and which are ground after success."""

    def __init__(self, program: Program):
        self.program = program
        self.facts = _Facts(program)
        self.memo: dict = {}
        self.diags: set = set()
        self.done: set = set()
        self.active: set = set()
        self.changed = False

    def run(self, query) -> list:
        while True:
            self.changed = False
            self.diags = set()
            self.done = set()
            self.body(query, set(), "the query", None)
            if not self.changed:
                return sorted(self.diags, key=Diagnostic.sort_key)

    def call(self, atom, mode: tuple, lit, where: str) -> tuple:
        key = indicator(atom)
        memo_key = (key, mode)
        if memo_key in self.done or memo_key in self.active:
            return self.memo.get(memo_key, (True,) * len(mode))
        self.active.add(memo_key)
        try:
            result = self._call(key, atom, mode, lit, where)
        finally:
            self.active.discard(memo_key)
        self.done.add(memo_key)
        if self.memo.get(memo_key, (True,) * len(mode)) != result:
            self.changed = True
        self.memo[memo_key] = result
        return result

    def _call(self, key, atom, mode, lit, where) -> tuple:
        outs = []
        index, params = self.facts.required(key)
        for item in self.program.definitions(key):
            if isinstance(item, Clause):
                outs.append(self.clause(item, mode))
                continue
            args = item.template.args if type(item.template) is Compound else ()
            if isinstance(item, DiscreteFact) and item.deterministic:
                outs.append(tuple(m or not _vars(a) for m, a in zip(mode, args)))
                continue
            for i in sorted(index | params):
                if mode[i] or not _vars(args[i]):
                    continue
                rule = "CONT_USAGE" if i in params else "PREV_POSITIVE_LITERAL"
                self.diags.add(Diagnostic(
                    rule, ERROR, _span(lit),
                    f"{where} calls probabilistic fact {key[0]}/{key[1]} with "
                    f"argument {i + 1} possibly unbound"))
            outs.append((True,) * len(mode))
        if not outs:
            return (True,) * len(mode)
        return tuple(all(o[i] for o in outs) for i in range(len(mode)))

    def clause(self, clause: Clause, mode: tuple) -> tuple:
        args = clause.head.args if type(clause.head) is Compound else ()
        bound: set = set()
        for m, a in zip(mode, args):
            if m:
                bound |= _vars(a)
        where = f"the clause for {format_term(clause.head)}"
        bound = self.body(clause.body, bound, where, clause)
        return tuple(not (_vars(a) - bound) for a in args)

    def body(self, body, bound: set, where: str, clause) -> set:
        bound = set(bound)
        for lit in body:
            t = type(lit)
            if t is Positive:
                atom = lit.atom
                args = atom.args if type(atom) is Compound else ()
                mode = tuple(not (_vars(a) - bound) for a in args)
                out = self.call(atom, mode, lit, where)
                for ok, a in zip(out, args):
                    if ok:
                        bound |= _vars(a)
            elif t is Negative:
                free = _vars(lit.atom) - bound
                if free:
                    self.diags.add(Diagnostic(
                        "FLOUNDER_RISK", WARNING, _span(lit, clause),
                        f"{format_literal(lit)} in {where} is selected with "
                        "unbound variables"))
                else:
                    args = lit.atom.args if type(lit.atom) is Compound else ()
                    self.call(lit.atom, (True,) * len(args), lit, where)
            elif t is Comparison:
                if _lit_vars(lit) - bound:
                    self.diags.add(Diagnostic(
                        "FLOUNDER_RISK", WARNING, _span(lit, clause),
                        f"{format_literal(lit)} in {where} compares unbound "
                        "variables"))
            else:
                if _vars(lit.expr) - bound:
                    self.diags.add(Diagnostic(
                        "FLOUNDER_RISK", WARNING, _span(lit, clause),
                        f"{format_literal(lit)} in {where} evaluates unbound "
                        "variables"))
                else:
                    bound.add(lit.target)
        return bound


def check_query(program: Program, query) -> list:
    """Diagnostics for ``query`` (a sequence of body literals).  Error
    diagnostics mean some answer may not be a ground instance of the query."""
    return _Modes(program).run(tuple(query))


def query_accepted(program: Program, query) -> bool:
    return not any(d.severity == ERROR for d in check_query(program, query))
