"""Exact query probabilities from explanations, plus a brute-force oracle.

:func:`exact_query` enumerates explanations with a growing depth bound,
splits them into a pairwise incompatible set and sums their probabilities.
When the enumeration finishes without hitting the bound the sum is exact;
otherwise it is a lower bound.

:func:`brute_force_worlds` shares no code with resolution: it grounds a
function-free program, computes the well-founded model of every world bottom
up and adds up the probabilities of the worlds where the query is true.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from hplp.analysis import ERROR, check_query
from hplp.choices import CompositeChoice, prob_composite, split_against
from hplp.distributions import DistributionError, compare, eval_arith
from hplp.frontend.program import Program
from hplp.resolution import ProgramHasDensityFacts, ResolutionError, Solver
from hplp.terms import (Comparison, Compound, Const, Negative, Positive, Var,
                        format_fraction, is_ground, term_vars)

DEFAULT_EPSILON = Fraction(1, 10**6)
DEFAULT_MAX_FACTS = 20


class NonGroundableQuery(ResolutionError):
    pass


class UniverseTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class ExplanationSet:
    explanations: tuple
    pairwise_incompatible: bool = False
    covering: bool = False

    def __iter__(self):
        return iter(self.explanations)

    def __len__(self):
        return len(self.explanations)

    def probability(self) -> Fraction:
        if not self.pairwise_incompatible:
            raise ValueError("probabilities only add up over incompatible sets")
        return sum((prob_composite(k) for k in self.explanations), Fraction(0))


@dataclass(frozen=True)
class ProbabilityBound:
    lower: Fraction
    delta: Fraction
    exhausted: bool
    iterations: int
    depth: int = 0

    def to_dict(self) -> dict:
        return {"lower": format_fraction(self.lower), "lower_float": float(self.lower),
                "delta": format_fraction(self.delta), "delta_float": float(self.delta),
                "exhausted": self.exhausted, "iterations": self.iterations,
                "depth": self.depth}


def make_pairwise_incompatible(explanations: Iterable[CompositeChoice]) -> ExplanationSet:
    """Equivalent set of pairwise incompatible composite choices.

    Each new explanation is split against every one already kept, branching
    on the smallest atomic choice it lacks; pieces covered by a kept
    explanation are dropped."""
    kept: list = []
    covering = getattr(explanations, "covering", False)
    for kappa in explanations:
        pieces = [kappa]
        for sigma in kept:
            nxt = []
            for pi in pieces:
                nxt.extend(split_against(pi, sigma))
            pieces = nxt
            if not pieces:
                break
        kept.extend(pieces)
    return ExplanationSet(tuple(kept), pairwise_incompatible=True, covering=covering)


def _schedule(depth_schedule: Optional[Sequence[int]], max_iterations: int):
    if depth_schedule is not None:
        return list(depth_schedule)[:max_iterations]
    return [16 * 2**i for i in range(max_iterations)]


def explanations_at(program: Program, query, depth: int) -> tuple:
    """``(explanations, truncated)`` for one depth bound."""
    solver = Solver(program, depth)
    found = [k for _, k in solver.explanations(query)]
    return found, solver.truncated


def exact_query(program: Program, query, epsilon=DEFAULT_EPSILON,
                max_iterations: int = 16,
                depth_schedule: Optional[Sequence[int]] = None,
                check: bool = True) -> ProbabilityBound:
    """Probability of ``query`` by iterative deepening over explanations."""
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if program.density_facts:
        raise ProgramHasDensityFacts("exact inference needs a purely discrete program")
    query = tuple(query)
    if check:
        errors = [d for d in check_query(program, query) if d.severity == ERROR]
        if errors:
            raise NonGroundableQuery("; ".join(d.message for d in errors))
    lower = Fraction(0)
    delta = Fraction(0)
    iterations = 0
    depth = 0
    for depth in _schedule(depth_schedule, max_iterations):
        iterations += 1
        found, truncated = explanations_at(program, query, depth)
        value = make_pairwise_incompatible(found).probability()
        delta = max(value - lower, Fraction(0))
        lower = max(lower, value)
        if not truncated:
            return ProbabilityBound(lower, delta, True, iterations, depth)
        if iterations > 1 and delta < epsilon:
            break
    return ProbabilityBound(lower, delta, False, iterations, depth)


# -- brute-force oracle -----------------------------------------------------

def _herbrand_constants(program: Program, query) -> list:
    found: dict = {}

    def visit(t):
        if type(t) is Const:
            found.setdefault(t, None)
        elif type(t) is Compound:
            if any(type(a) is Var for a in term_vars(t)) and not is_ground(t):
                raise UniverseTooLarge(
                    "brute force needs a function-free program; found a compound "
                    "with variables")
            found.setdefault(t, None)

    def args(atom):
        return atom.args if type(atom) is Compound else ()

    for f in program.discrete_facts:
        for a in args(f.template):
            visit(a)
    for c in program.clauses:
        for a in args(c.head):
            visit(a)
        for lit in c.body:
            if type(lit) in (Positive, Negative):
                for a in args(lit.atom):
                    visit(a)
    for lit in query:
        if type(lit) in (Positive, Negative):
            for a in args(lit.atom):
                visit(a)
    return list(found)


def _subst(t, env: dict):
    if type(t) is Var:
        return env[t]
    if type(t) is Compound:
        return Compound(t.functor, tuple(_subst(a, env) for a in t.args))
    return t


def _groundings(terms, universe):
    vs = []
    for t in terms:
        for v in term_vars(t):
            if v not in vs:
                vs.append(v)
    for values in itertools.product(universe, repeat=len(vs)):
        yield dict(zip(vs, values))


def _ground_body(body, env):
    """Ground positive and negative atoms, or None when a builtin fails."""
    pos, neg = [], []
    env = dict(env)
    for lit in body:
        t = type(lit)
        if t is Positive:
            pos.append(_subst(lit.atom, env))
        elif t is Negative:
            neg.append(_subst(lit.atom, env))
        elif t is Comparison:
            try:
                ok = compare(lit.op, eval_arith(_subst(lit.left, env)),
                             eval_arith(_subst(lit.right, env)))
            except (DistributionError, ZeroDivisionError):
                return None
            if not ok:
                return None
        else:
            try:
                value = eval_arith(_subst(lit.expr, env))
            except (DistributionError, ZeroDivisionError):
                return None
            target = env.get(lit.target)
            if target is None or type(target.value) is str or \
                    float(target.value) != value:
                return None
    return pos, neg


def _least_model(rules, facts: set, assumed: set) -> set:
    """Least model with ``\\+ a`` read as ``a not in assumed``."""
    model = set(facts)
    active = [(h, p) for h, p, n in rules if not (set(n) & assumed)]
    changed = True
    while changed:
        changed = False
        for h, p in active:
            if h not in model and all(a in model for a in p):
                model.add(h)
                changed = True
    return model


def well_founded(rules, facts: set) -> tuple:
    """``(true, possibly_true)`` atoms of the well-founded model, by the
    alternating fixpoint."""
    true: set = set()
    possible = _least_model(rules, facts, true)
    while True:
        true2 = _least_model(rules, facts, possible)
        possible2 = _least_model(rules, facts, true2)
        if true2 == true and possible2 == possible:
            return true, possible
        true, possible = true2, possible2


def brute_force_worlds(program: Program, query,
                       max_facts: int = DEFAULT_MAX_FACTS) -> Fraction:
    """P(query) by enumerating every world of a finite discrete program."""
    if program.density_facts:
        raise ProgramHasDensityFacts("brute force needs a purely discrete program")
    query = tuple(query)
    universe = _herbrand_constants(program, query)

    choices = []          # (probability, ground atom)
    certain: set = set()
    for f in program.discrete_facts:
        for env in _groundings([f.template], universe):
            atom = _subst(f.template, env)
            if f.deterministic:
                certain.add(atom)
            else:
                choices.append((f.probability, atom))
    if len(choices) > max_facts:
        raise UniverseTooLarge(
            f"{len(choices)} ground probabilistic facts exceed the limit of {max_facts}")

    rules = []
    for c in program.clauses:
        for env in _groundings([c.head] + [t for lit in c.body for t in lit.terms()],
                               universe):
            body = _ground_body(c.body, env)
            if body is not None:
                rules.append((_subst(c.head, env), tuple(body[0]), tuple(body[1])))

    qterms = [t for lit in query for t in lit.terms()]
    qbodies = [b for b in (_ground_body(query, env)
                           for env in _groundings(qterms, universe)) if b is not None]

    total = Fraction(0)
    for bits in itertools.product((True, False), repeat=len(choices)):
        weight = Fraction(1)
        facts = set(certain)
        for (p, atom), on in zip(choices, bits):
            weight *= p if on else 1 - p
            if on:
                facts.add(atom)
        true, possible = well_founded(rules, facts)
        holds = False
        for pos, neg in qbodies:
            if all(a in true for a in pos) and not any(a in possible for a in neg):
                holds = True
                break
            if all(a in possible for a in pos) and not any(a in true for a in neg):
                raise ValueError("a world has no two-valued well-founded model "
                                 "for the query")
        if holds:
            total += weight
    return total


def world_probabilities(program: Program, max_facts: int = DEFAULT_MAX_FACTS) -> list:
    """Probabilities of all total choices over the ground probabilistic
    facts of a function-free program."""
    universe = _herbrand_constants(program, ())
    probs = [f.probability for f in program.discrete_facts if not f.deterministic
             for _ in _groundings([f.template], universe)]
    if len(probs) > max_facts:
        raise UniverseTooLarge(f"{len(probs)} ground probabilistic facts")
    out = []
    for bits in itertools.product((True, False), repeat=len(probs)):
        w = Fraction(1)
        for p, on in zip(probs, bits):
            w *= p if on else 1 - p
        out.append(w)
    return out
