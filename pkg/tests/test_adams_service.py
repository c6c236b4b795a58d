from fractions import Fraction

import pytest

from services.adams_service import AObject, BObject, Context
from services.linalg_service import FPModule, PLocalMatrix
from tests.helpers import matrix, scalar_bobject
from utils.errors import PreconditionError


@pytest.mark.parametrize("p,g,clause", [
    (2, 1, "context.prime"),
    (9, 2, "context.prime"),
    (3, 3, "context.generator"),
    (3, 8, "context.generator"),
    (5, 7, "context.generator"),
])
def test_context_rejects(p, g, clause):
    with pytest.raises(PreconditionError) as e:
        Context(p, g)
    assert e.value.clause == clause


@pytest.mark.parametrize("p,g", [(3, 2), (3, 5), (5, 2), (7, 3)])
def test_context_accepts(p, g):
    assert Context(p, g).period == 2 * p - 2


def test_twist_rescales_psi(adams, ctx):
    m = adams.free_b(ctx, 1, 0)
    t = adams.twist(1, m)
    assert t.psi == matrix([[4]])
    assert t.weights == frozenset({1})
    assert adams.twist(-1, t).psi == m.psi


def test_check_bobject_accepts_sphere_and_torsion(adams, ctx):
    adams.check_bobject(adams.free_b(ctx, 2, 3))
    adams.check_bobject(scalar_bobject(ctx, [2], 4))


def test_check_bobject_names_invertibility(adams, ctx):
    m = BObject(ctx, FPModule.free(3, 1), matrix([[3]]), frozenset({0}))
    with pytest.raises(PreconditionError) as e:
        adams.check_bobject(m)
    assert e.value.clause == "bobject.psi_invertible"


@pytest.mark.parametrize("psi,weights", [
    ([[4]], {0}),
    ([[5]], set()),
    ([[1, 0], [0, 4]], {0}),
])
def test_check_bobject_names_weight_condition(adams, ctx, psi, weights):
    m = BObject(ctx, FPModule.free(3, len(psi)), matrix(psi), frozenset(weights))
    with pytest.raises(PreconditionError) as e:
        adams.check_bobject(m)
    assert e.value.clause == "bobject.weights"


def test_mixed_weights(adams, ctx):
    m = BObject(ctx, FPModule.free(3, 2), matrix([[1, 1], [0, 4]]), frozenset({0, 1}))
    adams.check_bobject(m)
    assert adams.weight_profile(m) == {0: 1, 1: 1}


def test_psi_must_respect_relations(ctx):
    with pytest.raises(PreconditionError):
        BObject(ctx, FPModule.from_invariants(3, 0, [1, 2]), matrix([[1, 0], [1, 1]]))


def test_hom_b(adams, ctx):
    z9 = scalar_bobject(ctx, [2], 1)
    z3 = scalar_bobject(ctx, [1], 1)
    assert adams.hom_b(z9, z3).invariants.torsion == (1,)
    assert adams.hom_b(adams.free_b(ctx, 1, 0), adams.free_b(ctx, 1, 1)).is_zero()
    assert adams.hom_b(adams.free_b(ctx, 1, 0), adams.free_b(ctx, 1, 0)).invariants.free_rank == 1
    # 4 ≡ 1 mod 3, so weight 0 maps onto Z/3 with psi = 4
    assert adams.hom_b(adams.free_b(ctx, 1, 0), scalar_bobject(ctx, [1], 4)).invariants.torsion == (1,)


def test_make_bmorphism_checks_equivariance(adams, ctx):
    with pytest.raises(PreconditionError) as e:
        adams.make_bmorphism(adams.free_b(ctx, 1, 0), adams.free_b(ctx, 1, 1), matrix([[1]]))
    assert e.value.clause == "morphism.equivariant"


def test_aobject_needs_full_period(adams, ctx):
    with pytest.raises(PreconditionError):
        AObject(ctx, (adams.zero_b(ctx),))


def test_component_at_and_split_embed(adams, ctx):
    m = adams.free_b(ctx, 1, 0)
    a = adams.split_embed(5, m)
    assert a.support() == frozenset({1})
    assert adams.same_presentation(adams.component_at(a, 5), m)
    assert adams.same_presentation(adams.component_at(a, 1), adams.twist(-1, m))
    assert adams.split_project(a)[1] is a.components[1]


def test_shift_by_period_is_inverse_twist(adams, ctx):
    a = adams.split_embed(0, adams.free_b(ctx, 1, 0))
    shifted = adams.shift_internal(ctx.period, a)
    for x, y in zip(shifted.components, a.components):
        assert adams.same_presentation(x, adams.twist(-1, y))


def test_rotate(adams, ctx):
    a = adams.split_embed(0, adams.free_b(ctx, 1, 0))
    once = adams.rotate(a)
    assert once.support() == frozenset({1})
    assert adams.same_presentation(once.components[1], adams.twist(1, a.components[0]))
    full = adams.rotate(a, ctx.period)
    for x, y in zip(full.components, a.components):
        assert adams.same_presentation(x, adams.twist(ctx.period, y))
    back = adams.rotate(once, -1)
    for x, y in zip(back.components, a.components):
        assert adams.same_presentation(x, y)


def test_direct_sum_and_hom_a(adams, ctx):
    z3 = scalar_bobject(ctx, [1], 1)
    s = adams.direct_sum(z3, adams.free_b(ctx, 1, 0))
    assert s.ngens == 2
    assert s.weights == frozenset({0})
    a = adams.split_embed(0, z3)
    assert adams.hom_a(a, a).invariants.torsion == (1,)


def test_identity_and_compose(adams, ctx):
    m = adams.free_b(ctx, 2, 0)
    ident = adams.identity_morphism(m)
    doubled = adams.make_bmorphism(m, m, PLocalMatrix.scalar(3, 2, Fraction(2)))
    assert adams.compose(doubled, ident).matrix == doubled.matrix
