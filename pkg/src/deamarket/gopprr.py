"""GOPPRR meta-modelling: Graph, Object, Point, Property, Role, Relationship.

A :class:`MetaModel` declares the kinds of each element and the binding
rules among them; a :class:`Graph` is an instance model built from those
kinds. Instance collections are normalized (sorted by id) on construction,
so two graphs holding the same elements compare and serialize identically
regardless of the order they were assembled in.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .errors import ParseError

GRAPH_FORMAT = "gopprr-graph/1"
METAMODEL_FORMAT = "gopprr-metamodel/1"
DATATYPES = ("string", "integer", "number", "boolean")


# -- instances ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Property:
    """One attribute value on any other element. Equality is type-strict."""

    kind: str
    value: str | int | float | bool

    def __post_init__(self):
        v = self.value
        if not isinstance(v, (str, int, float)):
            raise TypeError(f"property {self.kind!r}: unsupported value type {type(v).__name__}")
        if isinstance(v, float):
            if not math.isfinite(v):
                raise ValueError(f"property {self.kind!r}: value must be finite")
            if v == 0.0:
                object.__setattr__(self, "value", 0.0)

    def _key(self):
        return (self.kind, type(self.value).__name__, self.value)

    def __eq__(self, other):
        if not isinstance(other, Property):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"Property({self.kind!r}, {self.value!r})"


def _properties(props) -> tuple[Property, ...]:
    if not props:
        return ()
    if isinstance(props, Mapping):
        items = [Property(k, v) for k, v in props.items()]
    else:
        items = list(props)
    kinds = [p.kind for p in items]
    if len(set(kinds)) != len(kinds):
        raise ValueError(f"duplicate property kinds: {sorted(k for k, n in Counter(kinds).items() if n > 1)}")
    return tuple(sorted(items, key=lambda p: p.kind))


def _sorted(items) -> tuple:
    return tuple(sorted(items, key=lambda e: (e.id, e.kind)))


class _Element:
    def __post_init__(self):
        object.__setattr__(self, "properties", _properties(self.properties))

    @property
    def props(self) -> dict:
        return {p.kind: p.value for p in self.properties}


@dataclass(frozen=True)
class Point(_Element):
    id: str
    kind: str
    properties: tuple[Property, ...] = ()


@dataclass(frozen=True)
class Object(_Element):
    id: str
    kind: str
    properties: tuple[Property, ...] = ()
    points: tuple[Point, ...] = ()
    decomposition: str | None = None

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "points", _sorted(self.points))


@dataclass(frozen=True)
class Role(_Element):
    id: str
    kind: str
    target: str | None = None
    properties: tuple[Property, ...] = ()


@dataclass(frozen=True)
class Relationship(_Element):
    id: str
    kind: str
    roles: tuple[Role, ...] = ()
    properties: tuple[Property, ...] = ()

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "roles", _sorted(self.roles))


@dataclass(frozen=True)
class Graph(_Element):
    id: str
    kind: str
    properties: tuple[Property, ...] = ()
    objects: tuple[Object, ...] = ()
    relationships: tuple[Relationship, ...] = ()
    subgraphs: tuple["Graph", ...] = ()

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "objects", _sorted(self.objects))
        object.__setattr__(self, "relationships", _sorted(self.relationships))
        object.__setattr__(self, "subgraphs", _sorted(self.subgraphs))

    def walk(self):
        """Yield ``(graph, parent_id)`` for this graph and every nested subgraph."""
        stack = [(self, None)]
        while stack:
            g, parent = stack.pop()
            yield g, parent
            stack.extend((s, g.id) for s in reversed(g.subgraphs))


GopprrGraph = Graph


# -- meta-model --------------------------------------------------------------


@dataclass(frozen=True)
class PropertyKind:
    name: str
    datatype: str = "string"


@dataclass(frozen=True)
class GraphKind:
    name: str
    properties: tuple[str, ...] = ()
    objects: tuple[str, ...] = ()
    relationships: tuple[str, ...] = ()


@dataclass(frozen=True)
class ObjectKind:
    name: str
    properties: tuple[str, ...] = ()
    points: tuple[str, ...] = ()


@dataclass(frozen=True)
class PointKind:
    name: str
    properties: tuple[str, ...] = ()


@dataclass(frozen=True)
class RelationshipKind:
    name: str
    roles: tuple[str, ...] = ()
    properties: tuple[str, ...] = ()


@dataclass(frozen=True)
class RoleKind:
    name: str
    attaches_to: tuple[str, ...] = ()
    properties: tuple[str, ...] = ()


class MetaModelError(ValueError):
    pass


_KIND_FIELDS = {
    "graph_kinds": GraphKind,
    "object_kinds": ObjectKind,
    "point_kinds": PointKind,
    "relationship_kinds": RelationshipKind,
    "role_kinds": RoleKind,
    "property_kinds": PropertyKind,
}


@dataclass(frozen=True)
class MetaModel:
    name: str
    graph_kinds: Mapping[str, GraphKind] = field(default_factory=dict)
    object_kinds: Mapping[str, ObjectKind] = field(default_factory=dict)
    point_kinds: Mapping[str, PointKind] = field(default_factory=dict)
    relationship_kinds: Mapping[str, RelationshipKind] = field(default_factory=dict)
    role_kinds: Mapping[str, RoleKind] = field(default_factory=dict)
    property_kinds: Mapping[str, PropertyKind] = field(default_factory=dict)

    def __post_init__(self):
        for attr in _KIND_FIELDS:
            value = getattr(self, attr)
            if not isinstance(value, Mapping):
                value = {k.name: k for k in value}
            object.__setattr__(self, attr, dict(sorted(value.items())))
        problems = self.problems()
        if problems:
            raise MetaModelError("; ".join(problems))

    def problems(self) -> list[str]:
        out = []

        def need(names, table, what, owner):
            for n in names:
                if n not in table:
                    out.append(f"{owner} refers to unknown {what} {n!r}")

        for kinds in (self.graph_kinds, self.object_kinds, self.point_kinds,
                      self.relationship_kinds, self.role_kinds):
            for k in kinds.values():
                need(k.properties, self.property_kinds, "property kind", k.name)
        for k in self.graph_kinds.values():
            need(k.objects, self.object_kinds, "object kind", k.name)
            need(k.relationships, self.relationship_kinds, "relationship kind", k.name)
        for k in self.object_kinds.values():
            need(k.points, self.point_kinds, "point kind", k.name)
        for k in self.relationship_kinds.values():
            if len(k.roles) != 2:
                out.append(f"relationship kind {k.name!r} must declare exactly two role kinds")
            need(k.roles, self.role_kinds, "role kind", k.name)
        for k in self.role_kinds.values():
            for target in k.attaches_to:
                if target not in self.object_kinds and target not in self.point_kinds:
                    out.append(f"role kind {k.name!r} attaches to unknown kind {target!r}")
        for k in self.property_kinds.values():
            if k.datatype not in DATATYPES:
                out.append(f"property kind {k.name!r} has unknown datatype {k.datatype!r}")
        return out


# -- validation ----------------------------------------------------------------


class ViolationCode(str, Enum):
    UNKNOWN_KIND = "unknown kind"
    DUPLICATE_ID = "duplicate id"
    UNDECLARED_PROPERTY = "undeclared property"
    PROPERTY_TYPE = "property type"
    DISALLOWED_OBJECT = "disallowed object"
    DISALLOWED_POINT = "disallowed point"
    DISALLOWED_RELATIONSHIP = "disallowed relationship"
    ROLE_COUNT = "role count"
    ROLE_KIND = "role kind"
    UNBOUND_ROLE = "unbound role"
    DISALLOWED_ATTACHMENT = "disallowed attachment"
    UNKNOWN_DECOMPOSITION = "unknown decomposition"
    CYCLIC_DECOMPOSITION = "cyclic decomposition"
    SHARED_DECOMPOSITION = "shared decomposition"


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    element: str
    message: str

    def __str__(self):
        return f"{self.code.value} [{self.element}]: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    @property
    def codes(self) -> set[ViolationCode]:
        return {v.code for v in self.violations}

    def __str__(self):
        if self.ok:
            return "valid"
        return "; ".join(str(v) for v in self.violations)


_TYPE_CHECKS = {
    "string": lambda v: isinstance(v, str),
    "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "boolean": lambda v: isinstance(v, bool),
}


def validate_graph(meta: MetaModel, graph: Graph) -> ValidationReport:
    """Check ``graph`` against ``meta``; violations are returned, never raised."""
    found: list[Violation] = []

    def report(code, element, message):
        found.append(Violation(code, element, message))

    def check_props(element, slots):
        for p in element.properties:
            pk = meta.property_kinds.get(p.kind)
            if pk is None:
                report(ViolationCode.UNKNOWN_KIND, element.id, f"unknown property kind {p.kind!r}")
            elif slots is not None and p.kind not in slots:
                report(ViolationCode.UNDECLARED_PROPERTY, element.id,
                       f"{element.kind!r} declares no property {p.kind!r}")
            elif not _TYPE_CHECKS[pk.datatype](p.value):
                report(ViolationCode.PROPERTY_TYPE, element.id,
                       f"property {p.kind!r} expects {pk.datatype}, got {type(p.value).__name__}")

    ids = Counter()
    graph_ids = set()
    decomposition_edges = []  # (object id, from graph, to graph)
    for g, _ in graph.walk():
        graph_ids.add(g.id)
        ids[g.id] += 1
        for o in g.objects:
            ids[o.id] += 1
            for pt in o.points:
                ids[pt.id] += 1
        for r in g.relationships:
            ids[r.id] += 1
            for role in r.roles:
                ids[role.id] += 1
    for ident, n in sorted(ids.items()):
        if n > 1:
            report(ViolationCode.DUPLICATE_ID, ident, f"id used {n} times")

    for g, _ in graph.walk():
        gk = meta.graph_kinds.get(g.kind)
        if gk is None:
            report(ViolationCode.UNKNOWN_KIND, g.id, f"unknown graph kind {g.kind!r}")
        check_props(g, gk.properties if gk else None)
        targets = {}
        for o in g.objects:
            targets[o.id] = o.kind
            ok = meta.object_kinds.get(o.kind)
            if ok is None:
                report(ViolationCode.UNKNOWN_KIND, o.id, f"unknown object kind {o.kind!r}")
            elif gk is not None and o.kind not in gk.objects:
                report(ViolationCode.DISALLOWED_OBJECT, o.id, f"{g.kind!r} graphs may not hold {o.kind!r}")
            check_props(o, ok.properties if ok else None)
            for pt in o.points:
                targets[pt.id] = pt.kind
                pk = meta.point_kinds.get(pt.kind)
                if pk is None:
                    report(ViolationCode.UNKNOWN_KIND, pt.id, f"unknown point kind {pt.kind!r}")
                elif ok is not None and pt.kind not in ok.points:
                    report(ViolationCode.DISALLOWED_POINT, pt.id, f"{o.kind!r} objects have no {pt.kind!r} points")
                check_props(pt, pk.properties if pk else None)
            if o.decomposition is not None:
                if o.decomposition not in graph_ids:
                    report(ViolationCode.UNKNOWN_DECOMPOSITION, o.id,
                           f"decomposes into unknown graph {o.decomposition!r}")
                else:
                    decomposition_edges.append((o.id, g.id, o.decomposition))
        for r in g.relationships:
            rk = meta.relationship_kinds.get(r.kind)
            if rk is None:
                report(ViolationCode.UNKNOWN_KIND, r.id, f"unknown relationship kind {r.kind!r}")
            elif gk is not None and r.kind not in gk.relationships:
                report(ViolationCode.DISALLOWED_RELATIONSHIP, r.id, f"{g.kind!r} graphs may not hold {r.kind!r}")
            check_props(r, rk.properties if rk else None)
            if len(r.roles) != 2:
                report(ViolationCode.ROLE_COUNT, r.id, f"relationship has {len(r.roles)} roles, needs 2")
            elif rk is not None and sorted(x.kind for x in r.roles) != sorted(rk.roles):
                report(ViolationCode.ROLE_KIND, r.id,
                       f"roles {sorted(x.kind for x in r.roles)} do not match {sorted(rk.roles)}")
            for role in r.roles:
                rok = meta.role_kinds.get(role.kind)
                if rok is None:
                    report(ViolationCode.UNKNOWN_KIND, role.id, f"unknown role kind {role.kind!r}")
                elif rk is not None and role.kind not in rk.roles:
                    report(ViolationCode.ROLE_KIND, role.id, f"{r.kind!r} carries no {role.kind!r} role")
                check_props(role, rok.properties if rok else None)
                if role.target is None or role.target not in targets:
                    report(ViolationCode.UNBOUND_ROLE, role.id,
                           "role is not bound to an object or point of its graph")
                elif rok is not None and targets[role.target] not in rok.attaches_to:
                    report(ViolationCode.DISALLOWED_ATTACHMENT, role.id,
                           f"{role.kind!r} may not attach to {targets[role.target]!r}")

    successors: dict[str, set[str]] = {}
    for _, src, dst in decomposition_edges:
        successors.setdefault(src, set()).add(dst)
    for obj_id, src, dst in decomposition_edges:
        if _reaches(successors, dst, src):
            report(ViolationCode.CYCLIC_DECOMPOSITION, obj_id,
                   f"decomposing into {dst!r} leads back to {src!r}")
    for dst, n in Counter(dst for _, _, dst in decomposition_edges).items():
        if n > 1:
            report(ViolationCode.SHARED_DECOMPOSITION, dst, f"graph is the decomposition of {n} objects")
    return ValidationReport(tuple(found))


def _reaches(successors, start, goal) -> bool:
    seen = set()
    stack = [start]
    while stack:
        x = stack.pop()
        if x == goal:
            return True
        if x in seen:
            continue
        seen.add(x)
        stack.extend(successors.get(x, ()))
    return False


# -- composition ---------------------------------------------------------------


@dataclass(frozen=True)
class Composition:
    """A graph split into flat element multisets, each entry tagged with its owner."""

    graphs: tuple  # (id, kind, parent id or None)
    objects: tuple  # (graph id, id, kind, decomposition)
    points: tuple  # (object id, id, kind)
    relationships: tuple  # (graph id, id, kind)
    roles: tuple  # (relationship id, id, kind, target)
    properties: tuple  # (owner id, Property)


def decompose(graph: Graph) -> Composition:
    graphs, objects, points, rels, roles, props = [], [], [], [], [], []

    def own(element):
        props.extend((element.id, p) for p in element.properties)

    for g, parent in graph.walk():
        graphs.append((g.id, g.kind, parent))
        own(g)
        for o in g.objects:
            objects.append((g.id, o.id, o.kind, o.decomposition))
            own(o)
            for pt in o.points:
                points.append((o.id, pt.id, pt.kind))
                own(pt)
        for r in g.relationships:
            rels.append((g.id, r.id, r.kind))
            own(r)
            for role in r.roles:
                roles.append((r.id, role.id, role.kind, role.target))
                own(role)
    none_first = lambda t: tuple("" if x is None else x for x in t)
    return Composition(
        graphs=tuple(sorted(graphs, key=none_first)),
        objects=tuple(sorted(objects, key=none_first)),
        points=tuple(sorted(points)),
        relationships=tuple(sorted(rels)),
        roles=tuple(sorted(roles, key=none_first)),
        properties=tuple(sorted(props, key=lambda t: (t[0], t[1].kind))),
    )


def compose(parts: Composition) -> Graph:
    """Inverse of :func:`decompose` for graphs with unique element ids."""
    props: dict[str, list[Property]] = {}
    for owner, p in parts.properties:
        props.setdefault(owner, []).append(p)
    points: dict[str, list[Point]] = {}
    for owner, pid, kind in parts.points:
        points.setdefault(owner, []).append(Point(pid, kind, props.get(pid, ())))
    roles: dict[str, list[Role]] = {}
    for owner, rid, kind, target in parts.roles:
        roles.setdefault(owner, []).append(Role(rid, kind, target, props.get(rid, ())))
    objects: dict[str, list[Object]] = {}
    for gid, oid, kind, dec in parts.objects:
        objects.setdefault(gid, []).append(
            Object(oid, kind, props.get(oid, ()), points.get(oid, ()), dec))
    rels: dict[str, list[Relationship]] = {}
    for gid, rid, kind in parts.relationships:
        rels.setdefault(gid, []).append(Relationship(rid, kind, roles.get(rid, ()), props.get(rid, ())))
    children: dict[str | None, list[tuple[str, str]]] = {}
    for gid, kind, parent in parts.graphs:
        children.setdefault(parent, []).append((gid, kind))

    def build(gid, kind):
        subs = [build(c, k) for c, k in children.get(gid, ())]
        return Graph(gid, kind, props.get(gid, ()), objects.get(gid, ()), rels.get(gid, ()), subs)

    roots = children.get(None, [])
    if len(roots) != 1:
        raise ValueError(f"composition needs exactly one top-level graph, has {len(roots)}")
    return build(*roots[0])


# -- serialization -------------------------------------------------------------


def _canonical(doc) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False,
                      allow_nan=False).encode("utf-8")


def _props_doc(element):
    return {p.kind: p.value for p in element.properties}


def _graph_doc(g: Graph) -> dict:
    return {
        "id": g.id,
        "kind": g.kind,
        "properties": _props_doc(g),
        "objects": [{
            "id": o.id,
            "kind": o.kind,
            "properties": _props_doc(o),
            "points": [{"id": p.id, "kind": p.kind, "properties": _props_doc(p)} for p in o.points],
            "decomposition": o.decomposition,
        } for o in g.objects],
        "relationships": [{
            "id": r.id,
            "kind": r.kind,
            "properties": _props_doc(r),
            "roles": [{"id": x.id, "kind": x.kind, "target": x.target, "properties": _props_doc(x)}
                      for x in r.roles],
        } for r in g.relationships],
        "subgraphs": [_graph_doc(s) for s in g.subgraphs],
    }


def serialize_graph(graph: Graph) -> bytes:
    """Canonical document bytes: sorted keys, sorted element ids, no whitespace."""
    return _canonical({"format": GRAPH_FORMAT, "graph": _graph_doc(graph)})


def _load_json(data: bytes, what: str):
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{what} is not UTF-8: {exc.reason}", 1, exc.start + 1) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed {what}: {exc.msg}", exc.lineno, exc.colno) from None


class _Reader:
    """Schema checks over decoded JSON; errors name the JSON path."""

    def __init__(self, what):
        self.what = what

    def fail(self, path, message):
        raise ParseError(f"{self.what} at {path or '/'}: {message}")

    def obj(self, value, path, required, optional=()):
        if not isinstance(value, dict):
            self.fail(path, "expected an object")
        missing = [k for k in required if k not in value]
        if missing:
            self.fail(path, f"missing keys {missing}")
        extra = sorted(set(value) - set(required) - set(optional))
        if extra:
            self.fail(path, f"unexpected keys {extra}")
        return value

    def str(self, value, path, nullable=False):
        if value is None and nullable:
            return None
        if not isinstance(value, str):
            self.fail(path, "expected a string")
        return value

    def list(self, value, path):
        if not isinstance(value, list):
            self.fail(path, "expected a list")
        return value

    def names(self, value, path):
        return tuple(self.str(v, f"{path}/{i}") for i, v in enumerate(self.list(value, path)))

    def props(self, value, path):
        if value is None:
            return ()
        if not isinstance(value, dict):
            self.fail(path, "expected an object")
        out = []
        for k, v in value.items():
            if isinstance(v, float) and not math.isfinite(v):
                self.fail(f"{path}/{k}", "non-finite number")
            if not isinstance(v, (str, int, float)):
                self.fail(f"{path}/{k}", "property values must be strings, numbers or booleans")
            out.append(Property(k, v))
        return out


def _read_graph(r: _Reader, d, path) -> Graph:
    r.obj(d, path, ("id", "kind"), ("properties", "objects", "relationships", "subgraphs"))
    objects = []
    for i, o in enumerate(r.list(d.get("objects", []), f"{path}/objects")):
        op = f"{path}/objects/{i}"
        r.obj(o, op, ("id", "kind"), ("properties", "points", "decomposition"))
        pts = []
        for j, p in enumerate(r.list(o.get("points", []), f"{op}/points")):
            pp = f"{op}/points/{j}"
            r.obj(p, pp, ("id", "kind"), ("properties",))
            pts.append(Point(r.str(p["id"], pp + "/id"), r.str(p["kind"], pp + "/kind"),
                             r.props(p.get("properties"), pp + "/properties")))
        objects.append(Object(r.str(o["id"], op + "/id"), r.str(o["kind"], op + "/kind"),
                              r.props(o.get("properties"), op + "/properties"), pts,
                              r.str(o.get("decomposition"), op + "/decomposition", nullable=True)))
    rels = []
    for i, rel in enumerate(r.list(d.get("relationships", []), f"{path}/relationships")):
        rp = f"{path}/relationships/{i}"
        r.obj(rel, rp, ("id", "kind"), ("properties", "roles"))
        roles = []
        for j, x in enumerate(r.list(rel.get("roles", []), f"{rp}/roles")):
            xp = f"{rp}/roles/{j}"
            r.obj(x, xp, ("id", "kind"), ("properties", "target"))
            roles.append(Role(r.str(x["id"], xp + "/id"), r.str(x["kind"], xp + "/kind"),
                              r.str(x.get("target"), xp + "/target", nullable=True),
                              r.props(x.get("properties"), xp + "/properties")))
        rels.append(Relationship(r.str(rel["id"], rp + "/id"), r.str(rel["kind"], rp + "/kind"),
                                 roles, r.props(rel.get("properties"), rp + "/properties")))
    subs = [_read_graph(r, s, f"{path}/subgraphs/{i}")
            for i, s in enumerate(r.list(d.get("subgraphs", []), f"{path}/subgraphs"))]
    return Graph(r.str(d["id"], path + "/id"), r.str(d["kind"], path + "/kind"),
                 r.props(d.get("properties"), path + "/properties"), objects, rels, subs)


def parse_graph(data: bytes) -> Graph:
    doc = _load_json(bytes(data), "graph document")
    r = _Reader("graph document")
    r.obj(doc, "", ("format", "graph"))
    if doc["format"] != GRAPH_FORMAT:
        r.fail("/format", f"expected {GRAPH_FORMAT!r}")
    try:
        return _read_graph(r, doc["graph"], "/graph")
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"graph document: {exc}") from None


def serialize_metamodel(meta: MetaModel) -> bytes:
    doc = {"format": METAMODEL_FORMAT, "name": meta.name}
    doc["graph_kinds"] = [{"name": k.name, "properties": list(k.properties), "objects": list(k.objects),
                           "relationships": list(k.relationships)} for k in meta.graph_kinds.values()]
    doc["object_kinds"] = [{"name": k.name, "properties": list(k.properties), "points": list(k.points)}
                           for k in meta.object_kinds.values()]
    doc["point_kinds"] = [{"name": k.name, "properties": list(k.properties)} for k in meta.point_kinds.values()]
    doc["relationship_kinds"] = [{"name": k.name, "roles": list(k.roles), "properties": list(k.properties)}
                                 for k in meta.relationship_kinds.values()]
    doc["role_kinds"] = [{"name": k.name, "attaches_to": list(k.attaches_to), "properties": list(k.properties)}
                         for k in meta.role_kinds.values()]
    doc["property_kinds"] = [{"name": k.name, "datatype": k.datatype} for k in meta.property_kinds.values()]
    return _canonical(doc)


def parse_metamodel(data: bytes) -> MetaModel:
    doc = _load_json(bytes(data), "metamodel document")
    r = _Reader("metamodel document")
    r.obj(doc, "", ("format", "name"), tuple(_KIND_FIELDS))
    if doc["format"] != METAMODEL_FORMAT:
        r.fail("/format", f"expected {METAMODEL_FORMAT!r}")
    fields_per_kind = {
        GraphKind: ("properties", "objects", "relationships"),
        ObjectKind: ("properties", "points"),
        PointKind: ("properties",),
        RelationshipKind: ("roles", "properties"),
        RoleKind: ("attaches_to", "properties"),
    }
    kinds = {}
    for attr, cls in _KIND_FIELDS.items():
        items = []
        for i, k in enumerate(r.list(doc.get(attr, []), f"/{attr}")):
            kp = f"/{attr}/{i}"
            if cls is PropertyKind:
                r.obj(k, kp, ("name",), ("datatype",))
                items.append(PropertyKind(r.str(k["name"], kp + "/name"),
                                          r.str(k.get("datatype", "string"), kp + "/datatype")))
                continue
            r.obj(k, kp, ("name",), fields_per_kind[cls])
            extra = {f: r.names(k.get(f, []), f"{kp}/{f}") for f in fields_per_kind[cls]}
            items.append(cls(r.str(k["name"], kp + "/name"), **extra))
        kinds[attr] = items
    try:
        return MetaModel(r.str(doc["name"], "/name"), **kinds)
    except MetaModelError as exc:
        raise ParseError(f"metamodel document: {exc}") from None


def element_counts(graph: Graph) -> Counter:
    """How many of each GOPPRR element type the graph tree holds."""
    c = Counter()
    for g, _ in graph.walk():
        c["graph"] += 1
        c["property"] += len(g.properties)
        for o in g.objects:
            c["object"] += 1
            c["property"] += len(o.properties)
            for p in o.points:
                c["point"] += 1
                c["property"] += len(p.properties)
        for rel in g.relationships:
            c["relationship"] += 1
            c["property"] += len(rel.properties)
            for x in rel.roles:
                c["role"] += 1
                c["property"] += len(x.properties)
    return c

