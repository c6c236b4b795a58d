from fractions import Fraction

import pytest

from services.linalg_service import FPModule, ModuleMap, PLocalMatrix, column_basis, rank, smith_form, solve
from tests.helpers import matrix, module
from utils.errors import InternalError, ParseError, PreconditionError
from utils.plocal import valuation


def test_entries_must_be_p_local():
    with pytest.raises(ParseError):
        matrix([["1/3"]])
    with pytest.raises(InternalError):
        PLocalMatrix(3, 1, 1, [[Fraction(2, 9)]])
    assert matrix([["1/2", "5/7"]]).entry(0, 1) == Fraction(5, 7)


def test_smith_form_reconstructs_diagonal():
    a = matrix([[2, 4, 6], [6, 12, 9], [3, 3, 3]])
    sf = smith_form(a)
    assert sf.u @ a @ sf.v == sf.d
    assert sf.u @ sf.u_inv == PLocalMatrix.identity(3, 3)
    assert sf.v @ sf.v_inv == PLocalMatrix.identity(3, 3)
    assert list(sf.exponents) == sorted(sf.exponents)


def test_unit_determinant_gives_zero_module():
    # det = -8 is a 3-local unit
    assert module([[2, 4], [6, 8]]).is_zero()


@pytest.mark.parametrize("rows,free_rank,torsion", [
    ([[3, 0], [0, 9]], 0, (1, 2)),
    ([[9]], 0, (2,)),
    ([[3, 3], [0, 0]], 1, (1,)),
    ([[27, 0], [0, 5]], 0, (3,)),
])
def test_invariants(rows, free_rank, torsion):
    inv = module(rows).invariants
    assert inv.free_rank == free_rank
    assert tuple(sorted(inv.torsion)) == torsion


def test_pretty_printing():
    assert str(FPModule.from_invariants(3, 1, [1, 2])) == "ℤ_(3) ⊕ ℤ/3 ⊕ ℤ/9"
    assert str(FPModule.zero(3)) == "0"
    assert FPModule.from_invariants(3, 0, [1, 2]).length == 3
    assert FPModule.free(3, 1).length is None


def test_solve():
    assert solve(matrix([[3]]), matrix([[1]])) is None
    assert solve(matrix([[3]]), matrix([[6]])) == matrix([[2]])
    a = matrix([[1, 2], [3, 4]])
    b = matrix([[5], [6]])
    x = solve(a, b)
    assert a @ x == b


def test_rank_and_column_basis():
    a = matrix([[3, 6], [1, 2]])
    assert rank(a) == 1
    basis = column_basis(a)
    assert basis.cols == 1
    assert FPModule(basis).contains_columns(a)


def test_vec_is_column_major():
    x = matrix([[1, 2], [3, 4]])
    assert x.vec().column(0) == [1, 3, 2, 4]
    assert PLocalMatrix.unvec(3, x.vec().column(0), 2, 2) == x


def test_vec_kron_identity():
    left = matrix([[1, 2], [0, 1]])
    x = matrix([[1, 0, 2], [3, 1, 1]])
    right = matrix([[2, 1], [1, 0], [0, 5]])
    assert (left @ x @ right).vec() == right.transpose().kron(left) @ x.vec()


def test_kernel_cokernel_image(linalg):
    z = FPModule.free(3, 1)
    z3 = FPModule.from_invariants(3, 0, [1])
    z9 = FPModule.from_invariants(3, 0, [2])
    kmod, inclusion = linalg.kernel(ModuleMap(z, z3, matrix([[1]])))
    assert kmod.invariants.free_rank == 1
    assert z3.contains_columns(inclusion.matrix)
    kmod, _ = linalg.kernel(ModuleMap(z9, z3, matrix([[1]])))
    assert linalg.iso_test(kmod, z3)
    cmod, _ = linalg.cokernel(ModuleMap(z, z, matrix([[3]])))
    assert linalg.iso_test(cmod, z3)
    imod, _ = linalg.image(ModuleMap(z9, z9, matrix([[3]])))
    assert linalg.iso_test(imod, z3)


def test_homology(linalg):
    z = FPModule.free(3, 1)
    zero = FPModule.zero(3)
    sq = linalg.homology(ModuleMap(z, z, matrix([[3]])), linalg.zero_map(z, zero))
    assert sq.module.invariants.torsion == (1,)


def test_homology_requires_zero_composite(linalg):
    z = FPModule.free(3, 1)
    with pytest.raises(PreconditionError):
        linalg.homology(ModuleMap(z, z, matrix([[1]])), ModuleMap(z, z, matrix([[1]])))


def test_ill_defined_map_is_rejected():
    z3 = FPModule.from_invariants(3, 0, [1])
    z = FPModule.free(3, 1)
    with pytest.raises(PreconditionError) as e:
        ModuleMap(z3, z, matrix([[1]]))
    assert e.value.clause == "map.well_defined"


def test_exactness(linalg):
    z = FPModule.free(3, 1)
    z3 = FPModule.from_invariants(3, 0, [1])
    times3 = ModuleMap(z, z, matrix([[3]]))
    reduce = ModuleMap(z, z3, matrix([[1]]))
    assert linalg.is_exact(times3, reduce)
    assert linalg.is_injective(times3)
    assert not linalg.is_surjective(times3)
    assert linalg.is_surjective(reduce)


def test_module_inverse(linalg):
    z9 = FPModule.from_invariants(3, 0, [2])
    inverse = linalg.module_inverse(ModuleMap(z9, z9, matrix([[4]])))
    assert z9.contains_columns(inverse.matrix @ matrix([[4]]) - matrix([[1]]))
    with pytest.raises(PreconditionError):
        linalg.module_inverse(ModuleMap(z9, z9, matrix([[3]])))


def test_class_coordinates_reduce(linalg):
    z9 = FPModule.from_invariants(3, 0, [2])
    assert linalg.class_coordinates(z9, matrix([[10]])) == (Fraction(1),)


@pytest.mark.parametrize("x,expected", [
    (Fraction(18, 5), 2),
    (Fraction(-27), 3),
    (Fraction(1, 2), 0),
    (Fraction(0), None),
])
def test_valuation(x, expected):
    assert valuation(x, 3) == expected
