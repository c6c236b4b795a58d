import logging
from fractions import Fraction

from sympy import isprime
from sympy.ntheory import is_primitive_root

from utils.errors import PreconditionError

logger = logging.getLogger(__name__)


class NumberUtils:
    def check_context(self, p: int, g: int) -> None:
        """Require an odd prime p and a primitive root g modulo p^2"""
        if not isinstance(p, int) or p < 3 or not isprime(p):
            raise PreconditionError(f"p={p} is not an odd prime", clause="context.prime")
        if not isinstance(g, int) or g % p == 0 or not is_primitive_root(g % (p * p), p * p):
            raise PreconditionError(
                f"g={g} is not a topological generator of Z_{p}^x (primitive root mod {p * p})",
                clause="context.generator",
            )
        logger.debug(f"Context accepted: p={p}, g={g}")

    def twist_unit(self, g: int, p: int, j: int) -> Fraction:
        """The scalar g^{j(p-1)} by which twist(j) rescales an operator"""
        return Fraction(g) ** (j * (p - 1))
