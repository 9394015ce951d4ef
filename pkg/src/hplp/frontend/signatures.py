"""Signature inference: which argument positions carry continuous values."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from hplp.frontend.program import (Clause, DensityFact, DiscreteFact, Program,
                                   SignatureTable)
from hplp.terms import (Compound, Const, Definition, Negative, Positive, Span, Var,
                        indicator, is_arith, term_vars)


@dataclass(frozen=True)
class SignatureConflict:
    pred: tuple
    position: int
    span: Optional[Span]
    message: str


def _atoms(clause: Clause):
    yield clause.head
    for lit in clause.body:
        if type(lit) in (Positive, Negative):
            yield lit.atom


def _walk_compounds(t, out: set):
    if type(t) is Compound:
        if not is_arith(t):
            out.add((t.functor, len(t.args)))
        for a in t.args:
            _walk_compounds(a, out)


def fixed_signatures(program: Program) -> dict:
    """Positions decided by fact declarations and directives."""
    fixed: dict = {}
    for f in program.discrete_facts:
        fixed.setdefault(f.key, set())
    for f in program.density_facts:
        cont = fixed.setdefault(f.key, set())
        param_vars = {v for p in f.params for v in term_vars(p)}
        for i, a in enumerate(f.template.args, start=1):
            if a == f.var or (type(a) is Var and a in param_vars):
                cont.add(i)
    for d in program.directives:
        fixed[d.pred] = set(d.positions)
    return fixed


def infer_signatures(program: Program, with_conflicts: bool = False):
    fixed = fixed_signatures(program)
    preds: dict = {k: set(v) for k, v in fixed.items()}
    functors: dict = {}

    for clause in program.clauses:
        for atom in _atoms(clause):
            preds.setdefault(indicator(atom), set())
            for a in getattr(atom, "args", ()):
                names: set = set()
                _walk_compounds(a, names)
                for k in names:
                    functors.setdefault(k, set())
        for lit in clause.body:
            for t in lit.terms():
                names = set()
                _walk_compounds(t, names)
                for k in names:
                    functors.setdefault(k, set())
    for f in program.discrete_facts + program.density_facts:
        for a in f.template.args if type(f.template) is Compound else ():
            names = set()
            _walk_compounds(a, names)
            for k in names:
                functors.setdefault(k, set())

    def continuous_vars(clause: Clause) -> set:
        cont: set = set()

        def visit(t, positions):
            if type(t) is not Compound:
                return
            for i, a in enumerate(t.args, start=1):
                if type(a) is Var and i in positions:
                    cont.add(a)
                elif type(a) is Compound and not is_arith(a):
                    visit(a, functors.get((a.functor, len(a.args)), ()))

        for atom in _atoms(clause):
            visit(atom, preds.get(indicator(atom), ()))
        for lit in clause.body:
            if type(lit) is Definition:
                cont.add(lit.target)
                cont.update(term_vars(lit.expr))
        return cont

    changed = True
    while changed:
        changed = False
        for clause in program.clauses:
            cont = continuous_vars(clause)
            if not cont:
                continue

            def mark(t, table_key, table):
                nonlocal changed
                for i, a in enumerate(t.args, start=1):
                    if type(a) is Var and a in cont and i not in table[table_key]:
                        table[table_key].add(i)
                        changed = True
                    elif type(a) is Compound and not is_arith(a):
                        mark(a, (a.functor, len(a.args)), functors)

            for atom in _atoms(clause):
                if type(atom) is not Compound:
                    continue
                key = indicator(atom)
                if key in fixed:
                    for a in atom.args:
                        if type(a) is Compound and not is_arith(a):
                            mark(a, (a.functor, len(a.args)), functors)
                    continue
                mark(atom, key, preds)

    table = SignatureTable({k: frozenset(v) for k, v in preds.items()},
                           {k: frozenset(v) for k, v in functors.items()})
    if not with_conflicts:
        return table
    return table, _conflicts(program, table, fixed)


def _conflicts(program: Program, table: SignatureTable, fixed: dict) -> list:
    out = []
    for clause in program.clauses:
        for atom in _atoms(clause):
            if type(atom) is not Compound:
                continue
            key = indicator(atom)
            cont = table.continuous(key)
            for i, a in enumerate(atom.args, start=1):
                if i not in cont:
                    continue
                bad = (type(a) is Const and type(a.value) is str) or (
                    type(a) is Compound and not is_arith(a))
                if bad:
                    out.append(SignatureConflict(
                        key, i, getattr(a, "span", None) or clause.span,
                        f"argument {i} of {key[0]}/{key[1]} is inferred continuous "
                        f"but holds the term {a!r}"))
    # directives that forbid what the clauses need
    for d in program.directives:
        inferred = _infer_without(program, d.pred)
        extra = inferred.continuous(d.pred) - d.positions
        for i in sorted(extra):
            out.append(SignatureConflict(
                d.pred, i, d.span,
                f"argument {i} of {d.pred[0]}/{d.pred[1]} is declared a term position "
                "but receives a continuous variable"))
    return out


def _infer_without(program: Program, pred) -> SignatureTable:
    directives = [d for d in program.directives if d.pred != pred]
    trimmed = Program(program.discrete_facts, program.density_facts, program.clauses,
                      directives=directives,
                      items=[i for i in program.items if i not in program.directives
                             or i in directives])
    return infer_signatures(trimmed)
