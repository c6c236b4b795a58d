import random

import pytest

from services.linalg_service import PLocalMatrix
from services.q_service import DiagramData
from tests.helpers import scalar_bobject
from utils.errors import PreconditionError


def v_diagram(adams, homalg, obj):
    """G_i = twist(i-1)(I), B_i = 0: the diagram whose Q-complex is V(I)"""
    ctx = obj.context
    period = ctx.period
    zero = adams.zero_b(ctx)
    g = tuple(adams.twist(i - 1, obj) for i in range(period))
    pis = tuple(PLocalMatrix.zeros(ctx.p, 0, obj.ngens) for _ in range(period))
    extensions = []
    for i in range(period):
        g_next = g[i + 1] if i + 1 < period else adams.twist(period, g[0])
        split = homalg.realize(homalg.zero_class(homalg.ext(g_next, zero, 1)))
        extensions.append(homalg.ext_class_of(split))
    return DiagramData(ctx, g, (zero,) * period, pis, tuple(extensions))


def iso_diagram(adams, homalg, generator, ctx, seed):
    """G_i = B_i with pi_i = id and random extensions"""
    rng = random.Random(seed)
    period = ctx.period
    b = tuple(generator.bobject(ctx, rng, 2) for _ in range(period))
    extensions = []
    for i in range(period):
        g_next = b[i + 1] if i + 1 < period else adams.twist(period, b[0])
        cls = generator.random_class(g_next, b[i], rng)
        extensions.append(homalg.ext_class_of(homalg.realize(cls)))
    pis = tuple(PLocalMatrix.identity(ctx.p, x.ngens) for x in b)
    return DiagramData(ctx, b, b, pis, tuple(extensions))


def test_generated_diagrams(qs, generator, ctx):
    for seed in range(100):
        d = generator.generate("diagram", seed, 2, ctx).payload
        qs.validate(d)
        c = qs.q_build(d)
        assert qs.image_certificate(d)
        assert qs.round_trip_certificate(c)
        report = qs.hocolim_homology(d)
        assert report.certified


@pytest.mark.parametrize("exponents", [None, [1], [2, 1]])
def test_v_diagram_builds_v(qs, adams, homalg, complexes, ctx, exponents):
    obj = adams.free_b(ctx, 1, 0) if exponents is None else scalar_bobject(ctx, exponents, 4)
    c = qs.q_build(v_diagram(adams, homalg, obj))
    v = complexes.make_v(obj)
    for x, y in zip(c.window, v.window):
        assert adams.same_presentation(x, y)
    assert all(d.is_zero() for d in c.differentials)


def test_isomorphic_pi_gives_acyclic_complex(qs, adams, homalg, complexes, generator, ctx):
    for seed in range(10):
        d = iso_diagram(adams, homalg, generator, ctx, seed)
        assert complexes.is_acyclic(qs.q_build(d))
        assert qs.hocolim_homology(d).certified


def test_inverse_of_v_has_no_boundaries(qs, adams, complexes, ctx):
    v = complexes.make_v(adams.free_b(ctx, 1, 2))
    d = qs.q_inverse(v)
    qs.validate(d)
    assert all(b.is_zero() for b in d.b_objects)
    assert qs.round_trip_certificate(v)


def test_inverse_of_generated_complexes(qs, generator, ctx):
    for seed in range(10):
        c = generator.generate("complex", seed, 2, ctx).payload
        d = qs.q_inverse(c)
        qs.validate(d)
        assert qs.round_trip_certificate(c)


def test_validate_names_shape(qs, generator, ctx):
    d = generator.generate("diagram", 0, 1, ctx).payload
    short = DiagramData(ctx, d.g_objects[:2], d.b_objects, d.pi, d.extensions)
    with pytest.raises(PreconditionError) as e:
        qs.validate(short)
    assert e.value.clause == "diagram.shape"


def test_validate_names_surjectivity(qs, adams, homalg, ctx):
    d = v_diagram(adams, homalg, adams.free_b(ctx, 1, 0))
    z3 = scalar_bobject(ctx, [1], 1)
    b = (z3,) + d.b_objects[1:]
    pis = (PLocalMatrix.zeros(ctx.p, 1, 1),) + d.pi[1:]
    with pytest.raises(PreconditionError) as e:
        qs.validate(DiagramData(ctx, d.g_objects, b, pis, d.extensions))
    assert e.value.clause == "diagram.pi_surjective"


def test_validate_names_realization(qs, adams, homalg, ctx):
    d = v_diagram(adams, homalg, adams.free_b(ctx, 1, 0))
    other = v_diagram(adams, homalg, adams.free_b(ctx, 1, 1))
    with pytest.raises(PreconditionError) as e:
        qs.validate(DiagramData(ctx, d.g_objects, d.b_objects, d.pi, other.extensions))
    assert e.value.clause == "diagram.realization"


def test_assemble_hom(qs, generator, ctx):
    pairs = 0
    with_free = 0
    for seed in range(50):
        d1 = generator.generate("diagram", seed, 1, ctx).payload
        d2 = generator.generate("diagram", seed + 50, 1, ctx).payload
        for pair in ((d1, d2), (d1, d1)):
            assembly = qs.assemble_hom(*pair)
            assert assembly.m_matches
            assert assembly.kernel_injective
            assert assembly.exact_at_n
            assert assembly.exact_at_n_prime
            pairs += 1
            if any(not g.module.is_finite() for d in pair for g in d.g_objects):
                with_free += 1
    assert pairs == 100
    assert with_free > 0


def test_assemble_hom_for_v_diagrams(qs, adams, homalg, ctx):
    i = adams.free_b(ctx, 1, 0)
    d = v_diagram(adams, homalg, i)
    assembly = qs.assemble_hom(d, d)
    assert assembly.m_matches
    # chain maps V(I) → V(I) are one endomorphism of I per level
    assert assembly.chain_maps.invariants.free_rank == ctx.period
