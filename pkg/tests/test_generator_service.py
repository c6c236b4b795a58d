import random

import pytest

from services.generator_service import GEN_KINDS
from utils.errors import PreconditionError


@pytest.mark.parametrize("kind", sorted(GEN_KINDS))
def test_same_seed_same_instance(codec, generator, ctx, kind):
    first = codec.dumps(generator.generate(kind, 42, 2, ctx))
    assert codec.dumps(generator.generate(kind, 42, 2, ctx)) == first


def test_seeds_vary_the_instance(codec, generator, ctx):
    texts = {codec.dumps(generator.generate("diagram", seed, 2, ctx)) for seed in range(5)}
    assert len(texts) > 1


def test_units_are_twist_eigenvalues(generator, ctx):
    assert generator.units(ctx) == [1, 4, 7]


def test_random_objects_are_valid(adams, generator, ctx):
    rng = random.Random(0)
    for _ in range(50):
        adams.check_bobject(generator.bobject(ctx, rng, 3))


def test_generated_complexes_validate(complexes, generator, ctx):
    for kind in ("complex", "acomplex", "sphere"):
        complexes.validate(generator.generate(kind, 8, 2, ctx).payload)


def test_unknown_kind(generator, ctx):
    with pytest.raises(PreconditionError) as e:
        generator.generate("torus", 0, 1, ctx)
    assert e.value.clause == "gen.kind"


def test_size_must_be_positive(generator, ctx):
    with pytest.raises(PreconditionError) as e:
        generator.generate("bobject", 0, 0, ctx)
    assert e.value.clause == "gen.size"


def test_diagrams_carry_free_summands_of_mixed_weight(adams, generator, ctx):
    weights = set()
    for seed in range(20):
        d = generator.generate("diagram", seed, 2, ctx).payload
        for g in d.g_objects:
            adams.check_bobject(g)
            if not g.module.is_finite():
                weights |= set(adams.occupied_weights(g))
    assert len(weights) > 1


def test_mixed_objects_are_valid(adams, generator, ctx):
    rng = random.Random(4)
    for _ in range(30):
        m = generator.mixed_bobject(ctx, rng, 2)
        adams.check_bobject(m)
        assert not m.is_zero()
