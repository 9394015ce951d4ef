"""Monte Carlo query estimation by lazy, memoized world sampling.

Each draw starts from an empty :class:`Sample`.  Resolution asks it for the
truth value of a ground discrete fact or the value of a continuous random
variable the first time one is needed; later requests within the same draw
see the same value.
"""
from __future__ import annotations

import enum
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

from hplp.distributions import RngStream, draw
from hplp.frontend.program import DensityFact, DiscreteFact, Program
from hplp.resolution import DepthExceeded, ResolutionError, Solver

log = logging.getLogger(__name__)

DEFAULT_DEPTH = 100_000


class Outcome(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    DEPTH_EXCEEDED = "depth_exceeded"


class AllSamplesDepthExceeded(ResolutionError):
    pass


class Sample:
    """One world, drawn lazily.

    ``discrete`` maps ``(fact index, ground atom)`` to a bit; ``continuous``
    maps ``(predicate, arity, index terms)`` to a real.  Index terms are
    ground logical terms, never reals.
    """

    def __init__(self, rng: Optional[RngStream] = None, discrete: Optional[dict] = None):
        self.rng = rng
        self.discrete: dict = dict(discrete or {})
        self.continuous: dict = {}

    def bit(self, fact: DiscreteFact, atom, p: Optional[float] = None) -> bool:
        key = (fact.index, atom)
        v = self.discrete.get(key)
        if v is None:
            v = self.rng.random() < (float(fact.probability) if p is None else p)
            self.discrete[key] = v
        return v

    def value(self, fact: DensityFact, key_args: tuple, a: float, b: float) -> float:
        key = fact.key + (key_args,)
        v = self.continuous.get(key)
        if v is None:
            v = draw(fact.family, a, b, self.rng)
            self.continuous[key] = v
        return v


def draw_outcome(program: Program, query, rng: RngStream,
                 depth_bound: int = DEFAULT_DEPTH, solver: Optional[Solver] = None):
    """Truth value of ``query`` in one freshly sampled world."""
    solver = solver or Solver(program, depth_bound)
    sample = Sample(rng)
    try:
        found = next(solver.solve_sampling(query, sample), None)
    except DepthExceeded:
        return Outcome.DEPTH_EXCEEDED
    return Outcome.TRUE if found is not None else Outcome.FALSE


@dataclass(frozen=True)
class Estimate:
    p_hat: float
    ci_low: float
    ci_high: float
    n: int
    n_completed: int
    depth_exceeded: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def confidence_interval(successes: int, n: int, level: float = 0.95) -> tuple:
    """Normal-approximation interval; Clopper-Pearson when either count is
    below 10."""
    p = successes / n
    if min(successes, n - successes) < 10:
        from scipy.special import betaincinv

        alpha = 1 - level
        lo = 0.0 if successes == 0 else float(betaincinv(successes, n - successes + 1,
                                                         alpha / 2))
        hi = 1.0 if successes == n else float(betaincinv(successes + 1, n - successes,
                                                         1 - alpha / 2))
        return min(lo, p), max(hi, p)
    z = 1.959963984540054
    half = z * math.sqrt(p * (1 - p) / n)
    return max(0.0, p - half), min(1.0, p + half)


def _chunk(n: int, workers: int) -> list:
    base, extra = divmod(n, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def _run_chunk(program: Program, query, count: int, seed: int, stream: int,
               depth_bound: int) -> tuple:
    rng = RngStream(seed, stream)
    solver = Solver(program, depth_bound)
    succ = done = exceeded = 0
    for _ in range(count):
        out = draw_outcome(program, query, rng, depth_bound, solver)
        if out is Outcome.DEPTH_EXCEEDED:
            exceeded += 1
            continue
        done += 1
        if out is Outcome.TRUE:
            succ += 1
    return succ, done, exceeded


def estimate(program: Program, query, n: int, seed: int = 0,
             depth_bound: int = DEFAULT_DEPTH, workers: int = 1) -> Estimate:
    """Estimate P(query) from ``n`` sampled worlds.

    Worker ``w`` draws from stream ``(seed, w)``; for a fixed ``(seed,
    workers)`` the result does not depend on scheduling.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    workers = max(1, min(int(workers), n))
    sizes = _chunk(n, workers)
    if workers == 1:
        parts = [_run_chunk(program, query, n, seed, 0, depth_bound)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, program, query, size, seed, w, depth_bound)
                       for w, size in enumerate(sizes)]
            parts = [f.result() for f in futures]
    succ = sum(p[0] for p in parts)
    done = sum(p[1] for p in parts)
    exceeded = sum(p[2] for p in parts)
    if done == 0:
        raise AllSamplesDepthExceeded(f"all {n} samples exceeded depth {depth_bound}")
    if exceeded > 0.001 * n:
        log.warning("%d of %d samples exceeded the depth bound and were dropped",
                    exceeded, n)
    lo, hi = confidence_interval(succ, done)
    return Estimate(succ / done, lo, hi, n, done, exceeded, seed)


def estimate_discrete_crosscheck(program: Program, query, n: int,
                                 seed: int = 0) -> Estimate:
    """:func:`estimate` restricted to purely discrete programs, used to check
    the sampler against exact inference."""
    if not program.is_discrete:
        raise ValueError("crosscheck needs a purely discrete program")
    return estimate(program, query, n, seed)
