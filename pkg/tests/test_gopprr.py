import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from deamarket.errors import ParseError
from deamarket.gopprr import (
    Composition,
    Graph,
    GraphKind,
    MetaModel,
    MetaModelError,
    Object,
    ObjectKind,
    Property,
    PropertyKind,
    ViolationCode,
    compose,
    decompose,
    element_counts,
    parse_graph,
    parse_metamodel,
    serialize_graph,
    serialize_metamodel,
    validate_graph,
)
from deamarket.synth import VEHICLE_METAMODEL, random_graph
from gopprr_fixtures import VIOLATION_FIXTURES, diagram, valid_graph


def shuffled(graph: Graph, rng: random.Random) -> Graph:
    parts = decompose(graph)
    fields = {}
    for name in Composition.__dataclass_fields__:
        items = list(getattr(parts, name))
        rng.shuffle(items)
        fields[name] = tuple(items)
    return compose(Composition(**fields))


def test_empty_graph_of_known_kind_is_valid():
    assert validate_graph(VEHICLE_METAMODEL, Graph("g", "BlockDiagram")).ok


def test_valid_fixture():
    report = validate_graph(VEHICLE_METAMODEL, valid_graph())
    assert report.ok, str(report)
    assert str(report) == "valid"


@pytest.mark.parametrize("code", list(ViolationCode))
def test_each_rule_has_a_fixture(code):
    report = validate_graph(VEHICLE_METAMODEL, VIOLATION_FIXTURES[code])
    assert code in report.codes, str(report)
    assert not report


def test_cyclic_through_two_levels():
    inner = diagram([Object("b2", "Block", {}, (), "g")], kind="BlockDiagram", gid="sub")
    g = diagram([Object("b1", "Block", {}, (), "sub")], subs=[inner])
    codes = validate_graph(VEHICLE_METAMODEL, g).codes
    assert ViolationCode.CYCLIC_DECOMPOSITION in codes


def test_property_equality_is_type_strict():
    assert Property("p", 1) != Property("p", 1.0)
    assert Property("p", True) != Property("p", 1)
    assert Property("p", -0.0) == Property("p", 0.0)
    with pytest.raises(ValueError):
        Property("p", float("nan"))
    with pytest.raises(TypeError):
        Property("p", None)
    with pytest.raises(ValueError):
        Object("o", "Block", [Property("a", 1), Property("a", 2)])


def test_serialize_roundtrip_and_canonical():
    rng = random.Random(5)
    for _ in range(50):
        g = random_graph(rng)
        data = serialize_graph(g)
        assert parse_graph(data) == g
        assert serialize_graph(shuffled(g, rng)) == data
        assert b" " not in data.replace(b" ", b"") and b"\n" not in data


def test_serialize_property_order_irrelevant():
    a = Object("o", "Block", {"name": "x", "mass": 2.5})
    b = Object("o", "Block", {"mass": 2.5, "name": "x"})
    assert serialize_graph(diagram([a])) == serialize_graph(diagram([b]))


def test_parse_errors_carry_location():
    data = serialize_graph(valid_graph())
    for cut in (1, len(data) // 2, len(data) - 1):
        with pytest.raises(ParseError):
            parse_graph(data[:cut])
    with pytest.raises(ParseError) as info:
        parse_graph(b'{\n  "format": oops}')
    assert (info.value.line, info.value.column) == (2, 13)
    with pytest.raises(ParseError):
        parse_graph(json.dumps({"format": "other", "graph": {}}).encode())
    with pytest.raises(ParseError):
        parse_graph(json.dumps({"format": "gopprr-graph/1", "graph": {"id": "g"}}).encode())
    with pytest.raises(ParseError):
        parse_graph(b"\xff\xfe")


def test_decompose_compose_counts():
    g = valid_graph()
    parts = decompose(g)
    counts = element_counts(g)
    assert len(parts.graphs) == counts["graph"] == 2
    assert len(parts.objects) == counts["object"] == 3
    assert len(parts.points) == counts["point"] == 2
    assert len(parts.relationships) == counts["relationship"] == 1
    assert len(parts.roles) == counts["role"] == 2
    assert len(parts.properties) == counts["property"]
    assert compose(parts) == g


def test_compose_needs_single_root():
    parts = decompose(valid_graph())
    with pytest.raises(ValueError):
        compose(Composition(parts.graphs + (("extra", "BlockDiagram", None),), *[
            getattr(parts, n) for n in ("objects", "points", "relationships", "roles", "properties")]))


def test_metamodel_checks_references():
    with pytest.raises(MetaModelError):
        MetaModel("m", graph_kinds=[GraphKind("G", objects=("Missing",))])
    with pytest.raises(MetaModelError):
        MetaModel("m", property_kinds=[PropertyKind("p", "date")])
    m = MetaModel("m", graph_kinds=[GraphKind("G", ("p",), ("O",))],
                  object_kinds=[ObjectKind("O")], property_kinds=[PropertyKind("p")])
    assert validate_graph(m, Graph("g", "G", {"p": "x"}, [Object("o", "O")])).ok


def test_metamodel_roundtrip():
    data = serialize_metamodel(VEHICLE_METAMODEL)
    assert parse_metamodel(data) == VEHICLE_METAMODEL
    bad = json.loads(data)
    bad["graph_kinds"][0]["objects"].append("Nope")
    with pytest.raises(ParseError):
        parse_metamodel(json.dumps(bad).encode())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_generated_graphs_valid_and_reconstructible(seed):
    g = random_graph(random.Random(seed))
    assert validate_graph(VEHICLE_METAMODEL, g).ok
    assert compose(decompose(g)) == g
