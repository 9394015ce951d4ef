"""JSON view of a parsed program: node kinds plus source spans."""
from __future__ import annotations

from hplp.frontend.program import (Clause, ContinuousDirective, DensityFact,
                                   DiscreteFact, Program)
from hplp.terms import (Comparison, Compound, Const, Definition, Negative, Positive,
                        Var, format_fraction)


def _span(node):
    s = getattr(node, "span", None)
    return s.to_dict() if s is not None else None


def term_to_dict(t) -> dict:
    if type(t) is Var:
        name = "_" if t.name.startswith("_#") else t.name
        return {"kind": "var", "name": name, "span": _span(t)}
    if type(t) is Const:
        v = t.value
        kind = "symbol" if type(v) is str else "int" if type(v) is int else "real"
        return {"kind": kind, "value": v, "span": _span(t)}
    if type(t) is Compound:
        return {"kind": "compound", "functor": t.functor,
                "args": [term_to_dict(a) for a in t.args], "span": _span(t)}
    raise TypeError(t)


def literal_to_dict(lit) -> dict:
    t = type(lit)
    if t is Positive:
        return {"kind": "positive", "atom": term_to_dict(lit.atom), "span": _span(lit)}
    if t is Negative:
        return {"kind": "negative", "atom": term_to_dict(lit.atom), "span": _span(lit)}
    if t is Comparison:
        return {"kind": "comparison", "op": lit.op, "left": term_to_dict(lit.left),
                "right": term_to_dict(lit.right), "span": _span(lit)}
    if t is Definition:
        return {"kind": "definition", "target": term_to_dict(lit.target),
                "expr": term_to_dict(lit.expr), "span": _span(lit)}
    raise TypeError(lit)


def item_to_dict(item) -> dict:
    if isinstance(item, DiscreteFact):
        return {"kind": "discrete_fact", "template": term_to_dict(item.template),
                "probability": format_fraction(item.probability), "span": _span(item)}
    if isinstance(item, DensityFact):
        return {"kind": "density_fact", "template": term_to_dict(item.template),
                "family": item.family, "var": term_to_dict(item.var),
                "params": [term_to_dict(p) for p in item.params], "span": _span(item)}
    if isinstance(item, Clause):
        return {"kind": "clause", "head": term_to_dict(item.head),
                "body": [literal_to_dict(lit) for lit in item.body],
                "span": _span(item)}
    if isinstance(item, ContinuousDirective):
        return {"kind": "directive", "predicate": f"{item.pred[0]}/{item.pred[1]}",
                "positions": sorted(item.positions), "span": _span(item)}
    raise TypeError(item)


def program_to_dict(program: Program) -> dict:
    return {"items": [item_to_dict(i) for i in program.items],
            "signatures": program.signatures.as_dict()}
