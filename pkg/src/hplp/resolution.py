"""Unification and SLDNF resolution with leftmost literal selection.

The solver runs in two modes:

* exact: enumerates refutations depth first and returns, for each one, the
  composite choice it assumed, including the choices that make negated
  subgoals fail;
* sampling: resolves against one lazily drawn world (a ``Sample``) and
  returns the first answer.

Substitutions are triangular dicts keyed by variable name and are never
mutated once shared, so backtracking needs no trail.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any, Iterator, Optional

from hplp.choices import AtomicChoice, CompositeChoice, complement
from hplp.distributions import (UnboundDensityParameter, UnboundVariable, compare,
                                eval_arith)
from hplp.frontend.program import Clause, DensityFact, DiscreteFact, Program
from hplp.frontend.signatures import fixed_signatures
from hplp.terms import (Comparison, Compound, Const, Definition, Negative, Positive,
                        Term, Var, format_term, is_ground)

POS, NEG, CMP, DEF, LAZY = 0, 1, 2, 3, 4


class ResolutionError(Exception):
    pass


class DepthExceeded(ResolutionError):
    pass


class FloundedNegation(ResolutionError):
    pass


class NonGroundProbabilisticFact(ResolutionError):
    pass


class CountabilityError(ResolutionError):
    """A continuous random variable would be identified by a real value."""


class ProgramHasDensityFacts(ResolutionError):
    pass


# -- substitutions ----------------------------------------------------------

def walk(t: Term, s: dict) -> Term:
    while type(t) is Var:
        b = s.get(t.name)
        if b is None:
            return t
        t = b
    return t


def resolve(t: Term, s: dict) -> Term:
    while type(t) is Var:
        b = s.get(t.name)
        if b is None:
            return t
        t = b
    if type(t) is Compound:
        changed = False
        out = []
        for a in t.args:
            r = resolve(a, s)
            if r is not a:
                changed = True
            out.append(r)
        return Compound.make(t.functor, tuple(out)) if changed else t
    return t


def ground_instance(t: Term, s: dict) -> Optional[Term]:
    """``resolve(t, s)`` when that is ground, else ``None``."""
    while type(t) is Var:
        t = s.get(t.name)
        if t is None:
            return None
    if type(t) is Compound:
        changed = False
        out = []
        for a in t.args:
            r = ground_instance(a, s)
            if r is None:
                return None
            if r is not a:
                changed = True
            out.append(r)
        return Compound.make(t.functor, tuple(out)) if changed else t
    return t


def _occurs(name: str, t: Term, s: dict) -> bool:
    t = walk(t, s)
    if type(t) is Var:
        return t.name == name
    if type(t) is Compound:
        return any(_occurs(name, a, s) for a in t.args)
    return False


def unify_in(a: Term, b: Term, s: dict) -> Optional[dict]:
    """Extend ``s`` with an mgu of ``a`` and ``b``; ``None`` on failure.  The
    input dict is left untouched."""
    out = s
    copied = False
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(x, out)
        y = walk(y, out)
        if x is y:
            continue
        tx, ty = type(x), type(y)
        if tx is Var:
            if ty is Var and x.name == y.name:
                continue
            if _occurs(x.name, y, out):
                return None
            if not copied:
                out = dict(out)
                copied = True
            out[x.name] = y
        elif ty is Var:
            if _occurs(y.name, x, out):
                return None
            if not copied:
                out = dict(out)
                copied = True
            out[y.name] = x
        elif tx is Compound:
            if ty is not Compound or x.functor != y.functor or len(x.args) != len(y.args):
                return None
            stack.extend(zip(x.args, y.args))
        elif not x == y:
            return None
    return out


def unify(a: Term, b: Term) -> Optional[dict]:
    """Most general unifier of ``a`` and ``b`` as an idempotent ``{Var: Term}``
    map, or ``None`` when the terms do not unify."""
    s = unify_in(a, b, {})
    if s is None:
        return None
    return {Var(name): resolve(Var(name), s) for name in s}


def apply(t: Term, subst: dict) -> Term:
    """Apply a ``{Var: Term}`` substitution."""
    if type(t) is Var:
        return subst.get(t, t)
    if type(t) is Compound:
        return Compound(t.functor, tuple(apply(a, subst) for a in t.args))
    return t


def compose(first: dict, second: dict) -> dict:
    """``first`` followed by ``second``, both ``{Var: Term}`` maps."""
    out = {v: apply(t, second) for v, t in first.items()}
    for v, t in second.items():
        out.setdefault(v, t)
    return {v: t for v, t in out.items() if t != v}


# -- compiled program -------------------------------------------------------

def _rename(t: Term, suffix: str) -> Term:
    tt = type(t)
    if tt is Var:
        return Var(t.name + suffix)
    if tt is Compound:
        return Compound(t.functor, tuple(_rename(a, suffix) for a in t.args))
    return t


_CONSTS: dict = {}


def _intern(t: Term) -> Term:
    """Copy of ``t`` sharing one object per constant, so that most constant
    tests succeed on identity."""
    tt = type(t)
    if tt is Const:
        k = (type(t.value), t.value)
        c = _CONSTS.get(k)
        if c is None:
            c = _CONSTS[k] = Const(t.value)
        return c
    if tt is Compound:
        return Compound.make(t.functor, tuple(_intern(a) for a in t.args))
    return t


def _compile_literal(lit) -> tuple:
    t = type(lit)
    if t is Positive:
        return (POS, _intern(lit.atom))
    if t is Negative:
        return (NEG, _intern(lit.atom))
    if t is Comparison:
        return (CMP, lit.op, _intern(lit.left), _intern(lit.right))
    if t is Definition:
        return (DEF, lit.target, _intern(lit.expr))
    raise TypeError(lit)


_NOENV: dict = {}


def _renamer(t: Term):
    """Compile ``t`` into a function of ``(env, suffix)``: variables found in
    ``env`` are replaced by their value, the others renamed apart."""
    if is_ground(t):
        return lambda env, sfx: t
    if type(t) is Var:
        name = t.name

        def var(env, sfx):
            v = env.get(name)
            return Var(name + sfx) if v is None else v
        return var
    f = t.functor
    parts = tuple(_renamer(a) for a in t.args)
    make = Compound.make
    if len(parts) == 1:
        p0, = parts
        return lambda env, sfx: make(f, (p0(env, sfx),))
    if len(parts) == 2:
        p0, p1 = parts
        return lambda env, sfx: make(f, (p0(env, sfx), p1(env, sfx)))
    return lambda env, sfx: make(f, tuple([p(env, sfx) for p in parts]))


def _goal_renamer(g: tuple):
    code = g[0]
    if code <= NEG:
        a = _renamer(g[1])
        return lambda env, sfx: (code, a(env, sfx))
    if code == CMP:
        op, l, r = g[1], _renamer(g[2]), _renamer(g[3])
        return lambda env, sfx: (CMP, op, l(env, sfx), r(env, sfx))
    t, e = _renamer(g[1]), _renamer(g[2])
    return lambda env, sfx: (DEF, t(env, sfx), e(env, sfx))


class _Def:
    __slots__ = ("kind", "item", "head", "body", "ground", "params", "term_positions",
                 "key", "probe", "pfloat", "match", "lazy_body", "open", "param_r", "var_r",
                 "simple", "local")


def _head_matcher(head: Term) -> tuple:
    """Per-argument plan for unifying a call with a fresh copy of ``head``:
    ``(0, name)`` binds a first-occurrence variable, ``(1, const)`` tests a
    constant, ``(2, term)`` falls back to full unification."""
    if type(head) is not Compound:
        return ()
    plan = []
    seen: set = set()
    for a in head.args:
        if type(a) is Var and a.name not in seen:
            seen.add(a.name)
            plan.append((0, a.name))
        elif type(a) is Const:
            plan.append((1, a))
        else:
            for n in _var_names(a):
                seen.add(n)
            plan.append((2, a))
    return tuple(plan)


def _var_names(t: Term):
    if type(t) is Var:
        yield t.name
    elif type(t) is Compound:
        for a in t.args:
            yield from _var_names(a)


def _compile(program: Program) -> dict:
    fixed = fixed_signatures(program)
    table: dict = {}
    for item in program.items:
        d = _Def()
        d.item = item
        if isinstance(item, Clause):
            d.kind = "clause"
            d.head = _intern(item.head)
            d.body = tuple(_compile_literal(lit) for lit in item.body)
            d.lazy_body = tuple(_goal_renamer(g) for g in d.body)
            head_vars = set(_var_names(item.head))
            d.local = any(n not in head_vars for lit in item.body
                          for t in lit.terms() for n in _var_names(t))
            d.ground = is_ground(item.head) and all(
                is_ground(t) for lit in item.body for t in lit.terms())
        elif isinstance(item, DiscreteFact):
            d.kind = "discrete"
            d.head = _intern(item.template)
            d.ground = is_ground(item.template)
        elif isinstance(item, DensityFact):
            d.kind = "density"
            d.head = _intern(item.template)
            d.params = item.params
            d.param_r = tuple(_renamer(p) for p in item.params)
            d.var_r = _renamer(item.var)
            d.ground = False
            cont = fixed.get(item.key, set())
            d.term_positions = tuple(i for i in range(len(item.template.args))
                                     if i + 1 not in cont)
        else:
            continue
        d.key = item.key
        args = d.head.args if type(d.head) is Compound else ()
        d.probe = tuple((i, a) for i, a in enumerate(args) if is_ground(a))
        d.pfloat = float(item.probability) if d.kind == "discrete" else None
        d.match = _head_matcher(d.head)
        d.simple = all(op < 2 for op, _ in d.match)
        d.open = d.kind == "discrete" and type(d.head) is Compound and all(
            op == 0 for op, _ in d.match)
        table.setdefault(item.key, []).append(d)
    return table


def _ikey(t: Term):
    """Index key of a walked argument: the constant, the principal functor,
    or None for a variable."""
    tt = type(t)
    if tt is Const:
        return t
    if tt is Compound:
        return (t.functor, len(t.args))
    return None


def _build_index(defs: list) -> tuple:
    """Per-argument tables narrowing the definitions a call can match."""
    if len(defs) < 2 or type(defs[0].head) is not Compound:
        return ()
    out = []
    for pos in range(len(defs[0].head.args)):
        keys = [_ikey(d.head.args[pos]) for d in defs]
        if all(k is None for k in keys):
            continue
        table = {}
        for k in keys:
            if k is not None and k not in table:
                table[k] = tuple(d for d, k2 in zip(defs, keys) if k2 is None or k2 == k)
        anyd = tuple(d for d, k in zip(defs, keys) if k is None)
        out.append((pos, table, anyd))
    return tuple(out)


def _key_of(atom: Term):
    if type(atom) is Compound:
        return (atom.functor, len(atom.args))
    if type(atom) is Const and type(atom.value) is str:
        return (atom.value, 0)
    raise ResolutionError(f"cannot call {format_term(atom)}")


def _contains_real(t: Term) -> bool:
    if type(t) is Const:
        return type(t.value) is float
    if type(t) is Compound:
        return any(_contains_real(a) for a in t.args)
    return False


@dataclass(frozen=True)
class Exact:
    depth_bound: int = 10_000


@dataclass(frozen=True)
class Sampling:
    sample: Any
    depth_bound: int = 100_000


class Solver:
    """SLDNF solver over one immutable program.  Not thread safe; create one
    per worker."""

    MAX_NEGATION_NESTING = 2_000

    def __init__(self, program: Program, depth_bound: int = 10_000):
        self.program = program
        self.depth_bound = depth_bound
        self.defs = _compile(program)
        self._fact_only = {k for k, ds in self.defs.items()
                           if all(d.kind == "discrete" for d in ds)}
        self._index = {k: _build_index(ds) for k, ds in self.defs.items()}
        self._fresh = itertools.count(1)
        self.truncated = False
        self._nesting = 0

    # -- helpers
    def _suffix(self) -> str:
        return f"#{next(self._fresh)}"

    @staticmethod
    def goal_stack(goal) -> Optional[tuple]:
        stack = None
        for lit in reversed(tuple(goal)):
            stack = (_compile_literal(lit), stack)
        return stack

    def _resolve_clause(self, atom, d: _Def, s: dict, rest):
        """Unify ``atom`` with a fresh copy of clause ``d``; return the new goal
        list and substitution, or ``(None, None)``."""
        if d.probe:
            args = atom.args
            for i, c in d.probe:
                a = walk(args[i], s)
                if type(a) is not Var and not (a is c or a == c) and is_ground(a):
                    return None, None
        if d.ground:
            s2 = unify_in(atom, d.head, s)
            return (self._push(d.body, rest), s2) if s2 is not None else (None, None)
        if d.simple:
            # head variables are substituted into the body, not bound
            env = {}
            s2 = s
            if type(atom) is Compound:
                for (op, x), a in zip(d.match, atom.args):
                    if type(a) is Var:
                        a = walk(a, s2)
                    if op == 0:
                        env[x] = a
                    elif type(a) is Var:
                        if s2 is s:
                            s2 = dict(s)
                        s2[a.name] = x
                    elif not (a is x or a == x):
                        return None, None
            sfx = f"#{next(self._fresh)}" if d.local else ""
        else:
            env = _NOENV
            sfx = f"#{next(self._fresh)}"
            s2 = self._match_head(atom, d.match, s, sfx)
            if s2 is None:
                return None, None
        for r in reversed(d.lazy_body):
            rest = ((LAZY, r, env, sfx), rest)
        return rest, s2

    def _candidates(self, atom, s: dict) -> tuple:
        key = _key_of(atom)
        for pos, table, anyd in self._index.get(key, ()):
            k = _ikey(walk(atom.args[pos], s))
            if k is not None:
                return table.get(k, anyd)
        return self.defs.get(key, ())

    @staticmethod
    def _match_head(atom, plan, s: dict, sfx: str) -> Optional[dict]:
        if type(atom) is not Compound:
            return s
        out = None
        for (op, x), a in zip(plan, atom.args):
            if op == 0:
                if out is None:
                    out = dict(s)
                out[x + sfx] = a
            elif op == 1:
                a = walk(a, out if out is not None else s)
                if type(a) is Var:
                    if out is None:
                        out = dict(s)
                    out[a.name] = x
                elif not (a is x or a == x):
                    return None
            else:
                r = unify_in(a, _rename(x, sfx), out if out is not None else s)
                if r is None:
                    return None
                out = r if out is not None or r is not s else None
        return out if out is not None else s

    @staticmethod
    def _push(body: tuple, rest):
        for g in reversed(body):
            rest = (g, rest)
        return rest

    def _arith(self, goal, s):
        try:
            if goal[0] == CMP:
                return compare(goal[1], eval_arith(goal[2], s), eval_arith(goal[3], s))
            return eval_arith(goal[2], s)
        except UnboundVariable as e:
            raise ResolutionError(f"instantiation error: {e}") from None

    def _define(self, goal, s):
        value = self._arith(goal, s)
        target = walk(goal[1], s)
        if type(target) is Var:
            return unify_in(target, Const(value), s)
        if type(target) is Const and type(target.value) in (int, float):
            return s if float(target.value) == value else None
        raise ResolutionError(f"=:= target bound to non-number {format_term(target)}")

    def _ground_fact(self, atom, d, s):
        if d.open:
            # distinct variables only: the call itself is the instance
            inst = ground_instance(atom, s)
            if inst is None:
                inst = resolve(atom, s)
                raise NonGroundProbabilisticFact(
                    f"probabilistic fact {format_term(d.head)} called with non-ground "
                    f"arguments: {format_term(inst)}")
            return s, inst
        if d.probe:
            args = atom.args
            for i, c in d.probe:
                a = walk(args[i], s)
                if type(a) is not Var and not (a is c or a == c) and is_ground(a):
                    return None, None
        if d.ground:
            s2 = unify_in(atom, d.head, s)
        else:
            s2 = self._match_head(atom, d.match, s, self._suffix())
        if s2 is None:
            return None, None
        inst = ground_instance(atom, s2)
        if inst is None:
            inst = resolve(atom, s2)
            raise NonGroundProbabilisticFact(
                f"probabilistic fact {format_term(d.head)} called with non-ground "
                f"arguments: {format_term(inst)}")
        return s2, inst

    # -- sampling mode
    def solve_sampling(self, goal, sample, subst: Optional[dict] = None,
                       depth: int = 0) -> Iterator[dict]:
        """Answers of ``goal`` (body literals) in the world drawn by ``sample``."""
        return self._run_sampling(self.goal_stack(goal), sample, subst or {}, depth)

    def _step_sampling(self, atom, dd: _Def, s: dict, rest, sample):
        """Resolve ``atom`` against one definition; ``(goals, subst)`` or
        ``(None, None)``."""
        kind = dd.kind
        if kind == "clause":
            return self._resolve_clause(atom, dd, s, rest)
        if kind == "discrete":
            s2, inst = self._ground_fact(atom, dd, s)
            if s2 is not None and (dd.pfloat == 1.0 or sample.bit(dd.item, inst,
                                                                  dd.pfloat)):
                return rest, s2
            return None, None
        s2 = self._density(atom, dd, s, sample)
        return (rest, s2) if s2 is not None else (None, None)

    def _run_sampling(self, goals, sample, subst: dict, depth: int) -> Iterator[dict]:
        # Choice points are resumed lazily: later clauses are only tried on
        # backtracking, so a first answer never pays for them.
        stack = [(goals, subst, depth, None, 0)]
        bound = self.depth_bound
        defs_of = self.defs
        index = self._index
        step = self._step_sampling
        resolve_clause = self._resolve_clause
        while stack:
            goals, s, d, cp, i = stack.pop()
            if cp is not None:
                atom, defs = cp
                n = len(defs)
                while i < n:
                    goals2, s2 = step(atom, defs[i], s, goals, sample)
                    i += 1
                    if s2 is not None:
                        break
                else:
                    continue
                if i < n:
                    stack.append((goals, s, d, cp, i))
                goals, s, d = goals2, s2, d + 1
            while True:
                if goals is None:
                    yield s
                    break
                g, rest = goals
                if d >= bound:
                    raise DepthExceeded(f"depth bound {bound} exceeded")
                code = g[0]
                if code == LAZY:
                    g = g[1](g[2], g[3])
                    code = g[0]
                if code == POS:
                    atom = walk(g[1], s)
                    t = type(atom)
                    if t is Compound:
                        key = (atom.functor, len(atom.args))
                        defs = defs_of.get(key, ())
                        for pos, table, anyd in index.get(key, ()):
                            k = _ikey(walk(atom.args[pos], s))
                            if k is not None:
                                defs = table.get(k, anyd)
                                break
                    else:
                        defs = defs_of.get(_key_of(atom), ())
                    n = len(defs)
                    j = 0
                    while j < n:
                        dd = defs[j]
                        j += 1
                        if dd.kind == "clause":
                            goals2, s2 = resolve_clause(atom, dd, s, rest)
                        else:
                            goals2, s2 = step(atom, dd, s, rest, sample)
                        if s2 is not None:
                            break
                    else:
                        break
                    if j < n:
                        stack.append((rest, s, d, (atom, defs), j))
                    goals, s, d = goals2, s2, d + 1
                elif code == NEG:
                    atom = ground_instance(g[1], s)
                    if atom is None:
                        atom = resolve(g[1], s)
                        raise FloundedNegation(
                            f"negation selected on non-ground {format_term(atom)}")
                    if self._provable(atom, sample, d + 1):
                        break
                    goals, d = rest, d + 1
                elif code == CMP:
                    if not self._arith(g, s):
                        break
                    goals, d = rest, d + 1
                else:
                    s2 = self._define(g, s)
                    if s2 is None:
                        break
                    goals, s, d = rest, s2, d + 1

    def _provable(self, atom, sample, depth: int) -> bool:
        key = _key_of(atom)
        if key in self._fact_only:
            return self._any_fact(atom, key, sample)
        if self._nesting >= self.MAX_NEGATION_NESTING:
            raise DepthExceeded("negation nesting too deep")
        self._nesting += 1
        try:
            return next(self._run_sampling(((POS, atom), None), sample, {}, depth),
                        None) is not None
        finally:
            self._nesting -= 1

    def _any_fact(self, atom, key, sample) -> bool:
        """Whether the ground ``atom`` holds as a discrete fact in ``sample``."""
        for dd in self.defs[key]:
            s2, inst = self._ground_fact(atom, dd, {})
            if s2 is not None and (dd.pfloat == 1.0 or sample.bit(dd.item, inst,
                                                                  dd.pfloat)):
                return True
        return False

    def _density(self, atom, dd: _Def, s, sample):
        sfx = self._suffix()
        fact: DensityFact = dd.item
        s2 = self._match_head(atom, dd.match, s, sfx)
        if s2 is None:
            return None
        key_args = tuple(resolve(atom.args[i], s2) for i in dd.term_positions)
        for a in key_args:
            if _contains_real(a):
                raise CountabilityError(
                    f"random variable {fact.key[0]}/{fact.key[1]} would be indexed by "
                    f"the real value {format_term(a)}")
            if not is_ground(a):
                raise NonGroundProbabilisticFact(
                    f"density fact {format_term(fact.template)} called with non-ground "
                    f"index {format_term(a)}")
        try:
            pa, pb = dd.param_r
            a = eval_arith(pa(_NOENV, sfx), s2)
            b = eval_arith(pb(_NOENV, sfx), s2)
        except UnboundVariable as e:
            raise UnboundDensityParameter(
                f"{fact.family} parameter of {format_term(fact.template)}: {e}") from None
        value = sample.value(fact, key_args, a, b)
        return unify_in(dd.var_r(_NOENV, sfx), Const(value), s2)

    # -- exact mode
    def solve_exact(self, goal, choices: Optional[dict] = None,
                    truncations: Optional[list] = None) -> Iterator[tuple]:
        """Yield ``(subst, choices)`` per refutation of ``goal``; ``choices``
        maps ``(fact index, ground atom)`` to :class:`AtomicChoice`.  Branches
        cut by the depth bound are appended to ``truncations``."""
        return self._run_exact(self.goal_stack(goal), {}, choices or {}, 0,
                               [] if truncations is None else truncations)

    def _run_exact(self, goals, subst: dict, choices: dict, depth: int,
                   truncations: list) -> Iterator[tuple]:
        stack = [(goals, subst, choices, depth)]
        bound = self.depth_bound
        while stack:
            goals, s, ch, d = stack.pop()
            if goals is None:
                yield s, ch
                continue
            g, rest = goals
            if d >= bound:
                self.truncated = True
                truncations.append(ch)
                continue
            code = g[0]
            if code == LAZY:
                g = g[1](g[2], g[3])
                code = g[0]
            if code == POS:
                atom = walk(g[1], s)
                alts = []
                for dd in self._candidates(atom, s):
                    kind = dd.kind
                    if kind == "clause":
                        goals2, s2 = self._resolve_clause(atom, dd, s, rest)
                        if s2 is not None:
                            alts.append((goals2, s2, ch, d + 1))
                    elif kind == "discrete":
                        s2, inst = self._ground_fact(atom, dd, s)
                        if s2 is None:
                            continue
                        fact: DiscreteFact = dd.item
                        if fact.deterministic:
                            alts.append((rest, s2, ch, d + 1))
                            continue
                        key = (fact.index, inst)
                        prev = ch.get(key)
                        if prev is None:
                            ch2 = dict(ch)
                            ch2[key] = AtomicChoice(fact.index, inst, True,
                                                    fact.probability)
                            alts.append((rest, s2, ch2, d + 1))
                        elif prev.selected:
                            alts.append((rest, s2, ch, d + 1))
                    else:
                        raise ProgramHasDensityFacts(
                            f"exact inference reached density fact "
                            f"{format_term(dd.item.template)}")
                stack.extend(reversed(alts))
            elif code == NEG:
                atom = ground_instance(g[1], s)
                if atom is None:
                    atom = resolve(g[1], s)
                    raise FloundedNegation(
                        f"negation selected on non-ground {format_term(atom)}")
                for piece in self._negate(atom, ch, d + 1, truncations):
                    stack.append((rest, s, piece, d + 1))
            elif code == CMP:
                if self._arith(g, s):
                    stack.append((rest, s, ch, d + 1))
            else:
                s2 = self._define(g, s)
                if s2 is not None:
                    stack.append((rest, s2, ch, d + 1))

    def _negate(self, atom, ch: dict, depth: int, truncations: list) -> list:
        """Choice dicts extending ``ch`` under which ``atom`` has no proof.
        Regions where the sub-proof was cut short are reported through
        ``truncations``; they are neither proved nor refuted."""
        if self._nesting >= self.MAX_NEGATION_NESTING:
            self.truncated = True
            truncations.append(ch)
            return []
        extra = []
        truncs: list = []
        self._nesting += 1
        try:
            for _, ch2 in self._run_exact(((POS, atom), None), {}, ch, depth, truncs):
                if len(ch2) == len(ch):
                    return []          # provable without further assumptions
                extra.append(CompositeChoice._trusted(
                    {k: c for k, c in ch2.items() if k not in ch}))
        finally:
            self._nesting -= 1
        for t in truncs:
            truncations.append(t)
            if len(t) == len(ch):
                return []
            extra.append(CompositeChoice._trusted(
                {k: c for k, c in t.items() if k not in ch}))
        extra.sort(key=len)
        out = []
        for piece in complement(extra, CompositeChoice()):
            merged = dict(ch)
            for c in piece:
                merged[c.key] = c
            out.append(merged)
        return out

    # -- convenience
    def explanations(self, goal) -> Iterator[tuple]:
        """Yield ``(answer, CompositeChoice)`` in exact mode."""
        names = _goal_var_names(goal)
        for s, ch in self.solve_exact(goal):
            yield _answer(names, s), CompositeChoice._trusted(ch)

    def first_answer(self, goal, sample) -> Optional[dict]:
        names = _goal_var_names(goal)
        s = next(self.solve_sampling(goal, sample), None)
        return None if s is None else _answer(names, s)


def _goal_var_names(goal) -> list:
    seen: dict = {}
    for lit in goal:
        for t in lit.terms():
            stack = [t]
            while stack:
                x = stack.pop()
                if type(x) is Var:
                    seen.setdefault(x.name, None)
                elif type(x) is Compound:
                    stack.extend(reversed(x.args))
    return [n for n in seen if not n.startswith("_#")]


def _answer(names, s) -> dict:
    return {Var(n): resolve(Var(n), s) for n in names}


def solve(program: Program, goal, mode):
    """Exact mode: iterator of ``(answer, CompositeChoice)``.  Sampling mode:
    the first answer substitution, or ``None`` when the goal fails in the
    sampled world."""
    if isinstance(mode, Exact):
        return Solver(program, mode.depth_bound).explanations(goal)
    if isinstance(mode, Sampling):
        return Solver(program, mode.depth_bound).first_answer(goal, mode.sample)
    raise TypeError(f"unknown mode {mode!r}")
