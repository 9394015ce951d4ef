"""Hybrid probabilistic logic programs: parsing, static checks, exact and
Monte Carlo inference."""
from hplp.analysis import Diagnostic, Report, check_query, validate
from hplp.choices import AtomicChoice, CompositeChoice, prob_composite
from hplp.explanations import (ProbabilityBound, brute_force_worlds, exact_query,
                               make_pairwise_incompatible)
from hplp.frontend import parse_program, parse_query
from hplp.resolution import Exact, Sampling, solve, unify
from hplp.sampler import Estimate, estimate

__all__ = [
    "AtomicChoice", "CompositeChoice", "Diagnostic", "Estimate", "Exact",
    "ProbabilityBound", "Report", "Sampling", "brute_force_worlds", "check_query",
    "estimate", "exact_query", "make_pairwise_incompatible", "parse_program",
    "parse_query", "prob_composite", "solve", "unify", "validate",
]
