from hplp.frontend.lexer import HplSyntaxError, LexError, Token, tokenize
from hplp.frontend.parser import (ParseError, parse_program, parse_query, parse_term,
                                  query_vars)
from hplp.frontend.program import (Clause, ContinuousDirective, DensityFact,
                                   DiscreteFact, Program, SignatureTable, pretty_print)
from hplp.frontend.signatures import infer_signatures

__all__ = [
    "Clause", "ContinuousDirective", "DensityFact", "DiscreteFact", "HplSyntaxError",
    "LexError", "ParseError", "Program", "SignatureTable", "Token", "infer_signatures",
    "parse_program", "parse_query", "parse_term", "pretty_print", "query_vars",
    "tokenize",
]
