"""Programs, properties, parsing, printing and instrumentation."""

from .parser import ParseError, parse, parse_expr, parse_property
from .printer import print_expr, print_program
from .syntax import InvalidLine, Program, Property
from .transform import insert_placeholders, instrument_assert, instrument_assume, negate, renumber

__all__ = [
    "InvalidLine", "ParseError", "Program", "Property", "insert_placeholders", "instrument_assert",
    "instrument_assume", "negate", "parse", "parse_expr", "parse_property", "print_expr",
    "print_program", "renumber",
]
