from fractions import Fraction

from services.adams_service import BObject, Context
from services.linalg_service import FPModule, PLocalMatrix


def matrix(rows, p=3, cols=None):
    return PLocalMatrix.from_rows(p, rows, cols)


def module(rows, p=3, cols=None):
    return FPModule(matrix(rows, p, cols))


def scalar_bobject(context: Context, exponents, unit) -> BObject:
    """⊕ Z/p^e with psi acting by a scalar"""
    p = context.p
    return BObject(context, FPModule.from_invariants(p, 0, exponents),
                   PLocalMatrix.scalar(p, len(exponents), Fraction(unit)))
