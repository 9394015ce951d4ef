"""Random finite discrete programs for property tests.

Programs are function-free, stratified (rules only call lower strata) and
range-restricted: every rule with a variable starts with ``dom(X)``, so
probabilistic facts and negations are always called ground.
"""
import random
from fractions import Fraction

CONSTS = ("a", "b")


def _prob(rng):
    return Fraction(rng.randint(1, 9), 10)


def random_program(seed: int, max_ground_facts: int = 12):
    rng = random.Random(seed)
    lines = [f"dom({c})." for c in CONSTS]
    facts = []                       # (name, arity)
    ground = 0
    for i in range(rng.randint(2, 6)):
        arity = rng.choice((0, 1))
        if arity == 1 and rng.random() < 0.3:
            c = rng.choice(CONSTS)
            cost = 1
            head = f"f{i}({c})"
        else:
            cost = 2 if arity else 1
            head = f"f{i}(_)" if arity else f"f{i}"
        if ground + cost > max_ground_facts:
            break
        ground += cost
        lines.append(f"{_prob(rng)} :: {head}.")
        facts.append((f"f{i}", arity))
    derived = []                     # (name, arity) in stratum order
    for i in range(rng.randint(1, 4)):
        arity = rng.choice((0, 1))
        name = f"d{i}"
        for _ in range(rng.randint(1, 3)):
            lines.append(_rule(rng, name, arity, facts, derived))
        derived.append((name, arity))
    queries = []
    for name, arity in derived:
        if arity:
            queries.append(f"{name}({rng.choice(CONSTS)})")
        else:
            queries.append(name)
    queries.append("\\+ " + queries[-1])
    return "\n".join(lines) + "\n", queries


def _call(rng, name, arity, var):
    if arity == 0:
        return name
    arg = var if var and rng.random() < 0.7 else rng.choice(CONSTS)
    return f"{name}({arg})"


def _rule(rng, name, arity, facts, derived):
    var = "X" if arity or rng.random() < 0.5 else None
    body = ["dom(X)"] if var else []
    for _ in range(rng.randint(1, 3)):
        pool = facts + derived
        pname, parity = rng.choice(pool)
        lit = _call(rng, pname, parity, var)
        if rng.random() < 0.35:
            lit = "\\+ " + lit
        body.append(lit)
    head = f"{name}(X)" if arity else name
    return f"{head} :- {', '.join(body)}."
