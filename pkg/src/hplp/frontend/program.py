from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from hplp.terms import (Literal, Span, Term, Var, format_fraction, format_literal,
                        format_term, indicator)

DENSITY_FAMILIES = {"gaussian": ("mean", "variance"), "uniform_dens": ("low", "high")}

PredKey = tuple[str, int]


@dataclass(frozen=True, eq=False)
class DiscreteFact:
    template: Term
    probability: Fraction
    index: int = 0
    span: Optional[Span] = None

    @property
    def key(self) -> PredKey:
        return indicator(self.template)

    @property
    def deterministic(self) -> bool:
        return self.probability == 1


@dataclass(frozen=True, eq=False)
class DensityFact:
    template: Term
    family: str
    var: Var
    params: tuple
    index: int = 0
    span: Optional[Span] = None

    @property
    def key(self) -> PredKey:
        return indicator(self.template)

    @property
    def output_position(self) -> int:
        """0-based argument position holding the sampled value."""
        return self.template.args.index(self.var)


@dataclass(frozen=True, eq=False)
class Clause:
    head: Term
    body: tuple = ()
    span: Optional[Span] = None

    @property
    def key(self) -> PredKey:
        return indicator(self.head)


@dataclass(frozen=True)
class ContinuousDirective:
    pred: PredKey
    positions: frozenset  # 1-based
    span: Optional[Span] = None


Definition = Union[DiscreteFact, DensityFact, Clause]


@dataclass
class SignatureTable:
    """Continuous argument positions (1-based) per predicate and functor."""

    predicates: dict = field(default_factory=dict)
    functors: dict = field(default_factory=dict)

    def continuous(self, key: PredKey) -> frozenset:
        return self.predicates.get(key, frozenset())

    def functor_continuous(self, key: PredKey) -> frozenset:
        return self.functors.get(key, frozenset())

    def is_continuous(self, key: PredKey, position: int) -> bool:
        return position in self.predicates.get(key, ())

    def as_dict(self) -> dict:
        fmt = lambda d: {f"{k[0]}/{k[1]}": sorted(v) for k, v in sorted(d.items())}
        return {"predicates": fmt(self.predicates), "functors": fmt(self.functors)}


@dataclass
class Program:
    discrete_facts: list = field(default_factory=list)
    density_facts: list = field(default_factory=list)
    clauses: list = field(default_factory=list)
    signatures: SignatureTable = field(default_factory=SignatureTable)
    directives: list = field(default_factory=list)
    items: list = field(default_factory=list)
    signature_conflicts: list = field(default_factory=list)
    _defs: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index()

    def _index(self):
        self._defs = {}
        for item in self.items:
            if isinstance(item, ContinuousDirective):
                continue
            self._defs.setdefault(item.key, []).append(item)

    def definitions(self, key: PredKey) -> list:
        """Facts and clauses for ``key`` in source order."""
        return self._defs.get(key, [])

    def defined(self) -> set:
        return set(self._defs)

    @property
    def is_discrete(self) -> bool:
        return not self.density_facts

    def probabilistic_keys(self) -> set:
        return {f.key for f in self.discrete_facts if not f.deterministic} | {
            f.key for f in self.density_facts}

    def density_keys(self) -> set:
        return {f.key for f in self.density_facts}

    def discrete_keys(self) -> set:
        return {f.key for f in self.discrete_facts}


def format_item(item) -> str:
    if isinstance(item, DiscreteFact):
        return f"{format_fraction(item.probability)} :: {format_term(item.template)}."
    if isinstance(item, DensityFact):
        params = ", ".join(format_term(p) for p in (item.var,) + item.params)
        return f"{format_term(item.template)} : {item.family}({params})."
    if isinstance(item, Clause):
        if not item.body:
            return format_term(item.head) + "."
        body = ", ".join(format_literal(lit) for lit in item.body)
        return f"{format_term(item.head)} :- {body}."
    if isinstance(item, ContinuousDirective):
        pos = ", ".join(str(p) for p in sorted(item.positions))
        return f":- continuous({item.pred[0]}/{item.pred[1]}, [{pos}])."
    raise TypeError(item)


def pretty_print(program: Program) -> str:
    return "".join(format_item(item) + "\n" for item in program.items)


def body_literals(clause: Clause) -> tuple[Literal, ...]:
    return clause.body
