import json

import pytest

from data import FeatureDef, TransformPlan, parse_feature, serialize, deserialize, PLAN_FORMAT


def test_canonical_names():
    a, b = FeatureDef.base("a"), FeatureDef.base("b")
    assert FeatureDef.derived("mul", [a, b]).canonical_name == "mul(a,b)"
    assert FeatureDef.base("has space").canonical_name == '"has space"'
    assert FeatureDef.base("has space").name == "has space"
    nested = FeatureDef.derived("add", [FeatureDef.derived("div", [a, b]), a])
    assert nested.canonical_name == "add(div(a,b),a)"
    assert nested.depth == 2
    assert nested.operator_names() == {"add", "div"}


def test_invalid_definitions():
    with pytest.raises(ValueError):
        FeatureDef()
    with pytest.raises(ValueError, match="non-empty"):
        FeatureDef.base("")
    with pytest.raises(ValueError, match="parent"):
        FeatureDef.derived("mul", [])


@pytest.mark.parametrize("expression", ["a", "mul(a,b)", 'sub("x,y",rdiv(a,"b(c)"))', "add(mul(a,b),c)"])
def test_parse_feature_reads_canonical_names(expression):
    assert parse_feature(expression).canonical_name == expression


@pytest.mark.parametrize("expression", ["mul(a,b", "mul(a b)", "mul(a,b))", "(a)", ""])
def test_parse_feature_rejects_malformed(expression):
    with pytest.raises(ValueError):
        parse_feature(expression)


def test_plan_rejects_duplicates():
    a = FeatureDef.base("a")
    with pytest.raises(ValueError, match="Duplicate"):
        TransformPlan([a, FeatureDef.base("a")])


def test_serialize_document_layout():
    a, b = FeatureDef.base("a"), FeatureDef.base("b")
    plan = TransformPlan([a, FeatureDef.derived("mul", [a, b])], {"mode": "safe", "seed": 1})
    document = json.loads(serialize(plan))
    assert document["format"] == PLAN_FORMAT
    assert document["version"] == 1
    assert document["operators"] == ["mul"]
    assert document["features"] == ["a", "mul(a,b)"]

    restored = deserialize(serialize(plan))
    assert restored == plan
    assert restored.base_names() == ["a", "b"]


def test_empty_plan_serializes():
    plan = deserialize(serialize(TransformPlan([])))
    assert len(plan) == 0


def test_deserialize_errors():
    doc = {"format": PLAN_FORMAT, "version": 1, "features": ["cube(a)"]}
    with pytest.raises(ValueError, match="Unknown operator 'cube'"):
        deserialize(json.dumps(doc))
    with pytest.raises(ValueError, match="takes 2 argument"):
        deserialize(json.dumps({**doc, "features": ["mul(a)"]}))
    with pytest.raises(ValueError, match="version mismatch"):
        deserialize(json.dumps({**doc, "version": 2}))
    with pytest.raises(ValueError, match="Malformed"):
        deserialize("{not json")
    with pytest.raises(ValueError, match="Malformed"):
        deserialize(json.dumps({"features": []}))
