import json
from fractions import Fraction

import pytest

from services.adams_service import Context
from services.complex_service import FLAVOR_A
from services.generator_service import GEN_KINDS
from services.json_service import InstanceFile
from utils.errors import ParseError, PreconditionError


def bobject(relations, psi, ngens=1, weights=None, prime=3, generator=2):
    data = {"prime": prime, "generator": generator, "ngens": ngens, "relations": relations, "psi": psi}
    if weights is not None:
        data["weights"] = weights
    return data


def document(kind="bobject", payload=None, context=None, version="1"):
    if payload is None:
        payload = bobject([["9"]], [["4"]])
    return json.dumps({"schema_version": version, "context": context or {"p": 3, "g": 2},
                       "kind": kind, "payload": payload})


@pytest.mark.parametrize("kind", sorted(GEN_KINDS))
def test_generated_instances_survive_a_reload(codec, generator, ctx, kind):
    instance = generator.generate(kind, 3, 2, ctx)
    text = codec.dumps(instance)
    again = codec.loads(text)
    assert again.kind == GEN_KINDS[kind]
    assert again.context == ctx
    assert codec.dumps(again) == text


def test_bobject_fields(codec):
    instance = codec.loads(document())
    m = instance.payload
    assert str(m.module) == "ℤ/9"
    assert m.psi.entry(0, 0) == 4
    assert m.weights == frozenset()


def test_fractions_are_written_as_strings(codec, adams, ctx):
    sphere = adams.free_b(ctx, 1, 0)
    half = adams.make_bobject(ctx, sphere.relations, sphere.psi.scale(Fraction(1, 2)), [])
    text = codec.dumps(InstanceFile(ctx, "bobject", half))
    assert '"1/2"' in text
    assert codec.loads(text).payload.psi == half.psi


@pytest.mark.parametrize("text", [
    "{",
    "[]",
    document(version="2"),
    document(kind="sheaf"),
    document(payload={"prime": 3, "generator": 2, "ngens": 1, "relations": [["9"]]}),
    document(payload=bobject([["9"]], [["1"]], ngens=2)),
    document(payload=bobject([["1/3"]], [["1"]])),
    document(payload=bobject([["9"]], [["x"]])),
    document(payload=bobject([["9"]], [["1"]], weights=["a"])),
    document(payload=bobject([["9"]], [["1"]], ngens="1")),
    document(payload=bobject({"shape": [1, 1], "entries": [["9"]]}, [["1"]])),
    document(payload=[bobject([["9"]], [["1"]])]),
    document(kind="aobject", payload={"components": [None, None]}),
    document(context={"p": "3", "g": 2}),
])
def test_malformed_input(codec, text):
    with pytest.raises(ParseError):
        codec.loads(text)


def test_invalid_context_is_a_precondition(codec):
    with pytest.raises(PreconditionError) as e:
        codec.loads(document(context={"p": 9, "g": 2}))
    assert e.value.clause == "context.prime"


def test_missing_file(codec, tmp_path):
    with pytest.raises(ParseError):
        codec.load(str(tmp_path / "absent.json"))


def test_dump_and_load(codec, generator, ctx, tmp_path):
    path = str(tmp_path / "ses.json")
    codec.dump(generator.generate("ses", 1, 2, ctx), path)
    assert codec.load(path).kind == "ses"


def test_require_kind_and_context(codec, generator, ctx):
    first = generator.generate("bobject", 0, 1, ctx)
    with pytest.raises(ParseError):
        codec.require_kind(first, "complex")
    other = InstanceFile(Context(5, 2), "bobject", first.payload)
    with pytest.raises(PreconditionError) as e:
        codec.same_context(first, other)
    assert e.value.clause == "context.mismatch"


def test_aobject_with_null_components(codec, adams):
    z3 = bobject([["3"]], [["1"]])
    a = codec.loads(document("aobject", {"components": [z3, None, None, None]})).payload
    assert str(a.components[0]) == "ℤ/3"
    assert all(c.is_zero() for c in a.components[1:])
    assert json.loads(codec.dumps(InstanceFile(a.context, "aobject", a)))["payload"]["components"][1] is None


def test_hand_written_complex_file(codec, complexes):
    z3 = bobject([["3"]], [["1"]])
    payload = {
        "flavor": FLAVOR_A,
        "window": [{"components": [z3, None, None, None]}],
        "differentials": [[[], [[]], [], []]],
        "alpha": [[[["1"]], [], [], []]],
    }
    c = codec.loads(document("complex", payload)).payload
    complexes.validate(c)
    h = complexes.cohomology(c).groups[0]
    assert str(h.components[0]) == "ℤ/3"
    assert h.support() == frozenset({0})


def test_free_generator_has_empty_relation_rows(codec, adams, ctx):
    text = codec.dumps(InstanceFile(ctx, "bobject", adams.free_b(ctx, 1, 2)))
    payload = json.loads(text)["payload"]
    assert payload == {"prime": 3, "generator": 2, "ngens": 1, "relations": [[]], "psi": [["16"]], "weights": [2]}


def test_object_prime_must_match_the_file(codec):
    with pytest.raises(PreconditionError) as e:
        codec.loads(document(payload=bobject([["5"]], [["1"]], prime=5)))
    assert e.value.clause == "context.mismatch"
