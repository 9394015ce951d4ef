"""Atomic and composite choices over ground probabilistic facts.

An atomic choice fixes the truth value of one ground instance of one discrete
fact.  A composite choice is a consistent set of them.  All probabilities are
exact fractions.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from hplp.terms import Term, format_term


class InconsistentChoice(ValueError):
    pass


@dataclass(frozen=True, order=False)
class AtomicChoice:
    fact: int           # index of the DiscreteFact in the program
    atom: Term          # ground instance of the fact template
    selected: bool
    probability: Fraction

    @property
    def key(self) -> tuple:
        return (self.fact, self.atom)

    def sort_key(self) -> tuple:
        return (self.fact, format_term(self.atom), self.selected)

    def negated(self) -> "AtomicChoice":
        return AtomicChoice(self.fact, self.atom, not self.selected, self.probability)

    def weight(self) -> Fraction:
        return self.probability if self.selected else 1 - self.probability

    def __repr__(self):
        return f"({format_term(self.atom)},{int(self.selected)})"


class CompositeChoice:
    """Immutable consistent set of atomic choices, keyed by ground fact."""

    __slots__ = ("_by_key", "_hash")

    def __init__(self, choices: Iterable[AtomicChoice] = ()):
        by_key: dict = {}
        for c in choices:
            prev = by_key.get(c.key)
            if prev is not None and prev.selected != c.selected:
                raise InconsistentChoice(f"{c.atom!r} is both selected and not")
            by_key[c.key] = c
        self._by_key = by_key
        self._hash = None

    @classmethod
    def _trusted(cls, by_key: Mapping) -> "CompositeChoice":
        obj = cls.__new__(cls)
        obj._by_key = dict(by_key)
        obj._hash = None
        return obj

    def __iter__(self):
        return iter(sorted(self._by_key.values(), key=AtomicChoice.sort_key))

    def __len__(self):
        return len(self._by_key)

    def __contains__(self, c: AtomicChoice) -> bool:
        other = self._by_key.get(c.key)
        return other is not None and other.selected == c.selected

    def __eq__(self, other):
        return isinstance(other, CompositeChoice) and {
            k: c.selected for k, c in self._by_key.items()} == {
            k: c.selected for k, c in other._by_key.items()}

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset((k, c.selected) for k, c in self._by_key.items()))
        return self._hash

    def __repr__(self):
        return "{" + ", ".join(repr(c) for c in self) + "}"

    def get(self, key):
        return self._by_key.get(key)

    def keys(self):
        return self._by_key.keys()

    def compatible(self, other: "CompositeChoice") -> bool:
        small, big = sorted((self._by_key, other._by_key), key=len)
        for k, c in small.items():
            o = big.get(k)
            if o is not None and o.selected != c.selected:
                return False
        return True

    def issubset(self, other: "CompositeChoice") -> bool:
        return all(c in other for c in self._by_key.values())

    def union(self, other: "CompositeChoice") -> "CompositeChoice":
        if not self.compatible(other):
            raise InconsistentChoice("union of incompatible composite choices")
        merged = dict(self._by_key)
        merged.update(other._by_key)
        return CompositeChoice._trusted(merged)

    def add(self, c: AtomicChoice) -> "CompositeChoice":
        prev = self._by_key.get(c.key)
        if prev is not None:
            if prev.selected != c.selected:
                raise InconsistentChoice(f"{c.atom!r} is both selected and not")
            return self
        merged = dict(self._by_key)
        merged[c.key] = c
        return CompositeChoice._trusted(merged)

    def difference(self, other: "CompositeChoice") -> list:
        """Atomic choices of ``self`` not present in ``other``, sorted."""
        return sorted((c for c in self._by_key.values() if c not in other),
                      key=AtomicChoice.sort_key)

    def probability(self) -> Fraction:
        return prob_composite(self)


def prob_composite(kappa: CompositeChoice) -> Fraction:
    """Product of p over selected and 1 - p over unselected choices."""
    p = Fraction(1)
    for c in kappa._by_key.values():
        p *= c.probability if c.selected else 1 - c.probability
    return p


def complement(explanations: Iterable[CompositeChoice],
               base: CompositeChoice = CompositeChoice()) -> list:
    """Pairwise incompatible extensions of ``base`` covering exactly the worlds
    compatible with ``base`` where no member of ``explanations`` holds."""
    pieces = [base]
    for kappa in explanations:
        nxt = []
        for sigma in pieces:
            if not sigma.compatible(kappa):
                nxt.append(sigma)
                continue
            # derivation order keeps the pieces small for chained explanations
            missing = [c for c in kappa._by_key.values() if c not in sigma]
            if not missing:
                continue
            prefix = sigma
            for c in missing:
                nxt.append(prefix.add(c.negated()))
                prefix = prefix.add(c)
        pieces = nxt
    return pieces


def split_against(kappa: CompositeChoice, other: CompositeChoice) -> list:
    """Split ``kappa`` into pieces incompatible with ``other``; pieces that
    would be covered by ``other`` are dropped."""
    if not kappa.compatible(other):
        return [kappa]
    out = []
    prefix = kappa
    for c in other.difference(kappa):
        out.append(prefix.add(c.negated()))
        prefix = prefix.add(c)
    return out
