"""Sum-of-squares certificates and GNS counterexamples for noncommutative polynomials."""

from .words import (
    GROUP,
    MONOID,
    Word,
    concat,
    count_words,
    enumerate_words,
    format_word,
    involute,
    parse_word,
)
from .poly import NCPoly, OperatorTuple, poly_eval
from .certify import CertifyOptions, CertifyOutcome, certify, spotcheck

__all__ = [
    "GROUP",
    "MONOID",
    "Word",
    "concat",
    "count_words",
    "enumerate_words",
    "format_word",
    "involute",
    "parse_word",
    "NCPoly",
    "OperatorTuple",
    "poly_eval",
    "CertifyOptions",
    "CertifyOutcome",
    "certify",
    "spotcheck",
]
