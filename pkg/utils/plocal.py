import logging
import re
from fractions import Fraction
from typing import Optional, Union

from sympy import multiplicity

from utils.errors import ParseError

logger = logging.getLogger(__name__)

SCALAR_PATTERN = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")

Number = Union[int, Fraction, str]


def valuation(x: Fraction, p: int) -> Optional[int]:
    """p-adic valuation of a p-local fraction; None for zero"""
    if x == 0:
        return None
    return multiplicity(p, abs(x.numerator)) - multiplicity(p, x.denominator)


def is_p_local(x: Fraction, p: int) -> bool:
    return x.denominator % p != 0


def is_unit(x: Fraction, p: int) -> bool:
    return x.numerator % p != 0 and x.denominator % p != 0


def reduce_mod(x: Fraction, p: int, e: int) -> int:
    """Integer representative in [0, p^e) of x mod p^e"""
    modulus = p ** e
    if modulus == 1:
        return 0
    return (x.numerator * pow(x.denominator, -1, modulus)) % modulus


def to_fraction(value: Number, p: int) -> Fraction:
    """Read an int, Fraction or 'a/b' string as a p-local scalar"""
    if isinstance(value, Fraction):
        x = value
    elif isinstance(value, bool):
        raise ParseError(f"Boolean is not a scalar: {value!r}")
    elif isinstance(value, int):
        x = Fraction(value)
    elif isinstance(value, str):
        m = SCALAR_PATTERN.match(value)
        if not m:
            raise ParseError(f"Malformed scalar: {value!r}")
        num, den = m.groups()
        if den is not None and int(den) == 0:
            raise ParseError(f"Zero denominator in scalar: {value!r}")
        x = Fraction(int(num), int(den) if den is not None else 1)
    else:
        raise ParseError(f"Unsupported scalar type: {type(value).__name__}")
    if not is_p_local(x, p):
        raise ParseError(f"Scalar {value!r} has a denominator divisible by {p}")
    return x


def format_scalar(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"

