"""Density families, arithmetic evaluation and reproducible random streams."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from hplp.terms import Compound, Const, Term, Var

FAMILIES = ("gaussian", "uniform_dens")


class DistributionError(Exception):
    pass


class UnboundVariable(DistributionError):
    pass


class UnboundDensityParameter(UnboundVariable):
    pass


class InvalidParameter(DistributionError):
    pass


class ArithmeticTypeError(DistributionError):
    pass


@dataclass(frozen=True)
class DensitySpec:
    family: str
    params: tuple

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown density family {self.family!r}")
        if len(self.params) != 2:
            raise ValueError(f"{self.family} takes two parameters")


class RngStream:
    """Buffered numpy stream derived from ``(seed, stream)``.

    Uniform and standard-normal draws come from two separate buffers, so each
    kind of draw is reproducible by position alone.
    """

    BLOCK = 4096

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(self.seed & (2**64 - 1), spawn_key=(self.stream,))
        self._gen = np.random.Generator(np.random.PCG64(ss))
        self._u = self._n = ()
        self._ui = self._ni = 0

    def random(self) -> float:
        if self._ui >= len(self._u):
            self._u = self._gen.random(self.BLOCK).tolist()
            self._ui = 0
        x = self._u[self._ui]
        self._ui += 1
        return x

    def standard_normal(self) -> float:
        if self._ni >= len(self._n):
            self._n = self._gen.standard_normal(self.BLOCK).tolist()
            self._ni = 0
        x = self._n[self._ni]
        self._ni += 1
        return x


def _lookup(bindings: Mapping, v: Var):
    b = bindings.get(v.name)
    if b is None:
        b = bindings.get(v)
    return b


def eval_arith(expr, bindings: Mapping = {}) -> float:
    """Evaluate ``+ - * /`` over reals.  ``bindings`` maps variables (or their
    names) to numbers or to terms; chains of variable bindings are followed."""
    t = type(expr)
    if t is Const:
        v = expr.value
        if type(v) is str:
            raise ArithmeticTypeError(f"{v!r} is not a number")
        return float(v)
    if t is Var:
        b = _lookup(bindings, expr)
        if b is None:
            raise UnboundVariable(f"variable {expr.name} is unbound")
        if isinstance(b, Term):
            return eval_arith(b, bindings)
        return float(b)
    if t is Compound:
        args = expr.args
        if len(args) == 2:
            a = eval_arith(args[0], bindings)
            b = eval_arith(args[1], bindings)
            f = expr.functor
            if f == "+":
                return a + b
            if f == "-":
                return a - b
            if f == "*":
                return a * b
            if f == "/":
                if b == 0:
                    raise ZeroDivisionError("division by zero")
                return a / b
        elif len(args) == 1 and expr.functor == "-":
            return -eval_arith(args[0], bindings)
        raise ArithmeticTypeError(f"{expr!r} is not an arithmetic expression")
    if isinstance(expr, (int, float)):
        return float(expr)
    raise ArithmeticTypeError(f"cannot evaluate {expr!r}")


def compare(op: str, a: float, b: float) -> bool:
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "=<":
        return a <= b
    if op == ">=":
        return a >= b
    raise ValueError(f"unknown comparison {op!r}")


def parameters(spec: DensitySpec, bindings: Mapping = {}) -> tuple:
    try:
        a, b = (eval_arith(p, bindings) for p in spec.params)
    except UnboundVariable as e:
        raise UnboundDensityParameter(str(e)) from None
    if spec.family == "gaussian" and not b > 0:
        raise InvalidParameter(f"gaussian variance must be positive, got {b}")
    if spec.family == "uniform_dens" and not a < b:
        raise InvalidParameter(f"uniform_dens needs low < high, got [{a}, {b}]")
    return a, b


def draw(family: str, a: float, b: float, rng: RngStream) -> float:
    if family == "gaussian":
        # second parameter is the variance
        if not b > 0:
            raise InvalidParameter(f"gaussian variance must be positive, got {b}")
        return a + math.sqrt(b) * rng.standard_normal()
    if not a < b:
        raise InvalidParameter(f"uniform_dens needs low < high, got [{a}, {b}]")
    return a + (b - a) * rng.random()


def sample(spec: DensitySpec, bindings: Mapping, rng: RngStream) -> float:
    a, b = parameters(spec, bindings)
    return draw(spec.family, a, b, rng)


def pdf(spec: DensitySpec, bindings: Mapping, x: float) -> float:
    a, b = parameters(spec, bindings)
    if spec.family == "gaussian":
        return math.exp(-(x - a) ** 2 / (2 * b)) / math.sqrt(2 * math.pi * b)
    return 1.0 / (b - a) if a <= x <= b else 0.0
