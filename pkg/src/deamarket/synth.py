"""Sample vehicle meta-model and generators for random valid models.

Used by the benchmark and the test-suite to manufacture GOPPRR graphs and
DEA records of a chosen size.
"""
from __future__ import annotations

import random
import string

from .dea import DeaRecord, Dikw, realize_dea
from .gopprr import (
    Graph,
    GraphKind,
    MetaModel,
    Object,
    ObjectKind,
    Point,
    PointKind,
    PropertyKind,
    Relationship,
    RelationshipKind,
    Role,
    RoleKind,
)

VEHICLE_METAMODEL = MetaModel(
    "vehicle-requirements",
    graph_kinds=[
        GraphKind("RequirementDiagram", ("name",), ("Requirement", "Block"),
                  ("Satisfy", "DeriveReqt", "Connector")),
        GraphKind("BlockDiagram", ("name",), ("Block",), ("Connector",)),
    ],
    object_kinds=[
        ObjectKind("Requirement", ("name", "text", "priority", "safety_critical")),
        ObjectKind("Block", ("name", "text", "mass"), ("Port",)),
    ],
    point_kinds=[PointKind("Port", ("name", "direction"))],
    relationship_kinds=[
        RelationshipKind("Satisfy", ("satisfier", "satisfied"), ("rationale",)),
        RelationshipKind("DeriveReqt", ("source", "derived")),
        RelationshipKind("Connector", ("end_a", "end_b")),
    ],
    role_kinds=[
        RoleKind("satisfier", ("Block",)),
        RoleKind("satisfied", ("Requirement",)),
        RoleKind("source", ("Requirement",)),
        RoleKind("derived", ("Requirement",)),
        RoleKind("end_a", ("Port",)),
        RoleKind("end_b", ("Port",)),
    ],
    property_kinds=[
        PropertyKind("name"),
        PropertyKind("text"),
        PropertyKind("rationale"),
        PropertyKind("direction"),
        PropertyKind("priority", "integer"),
        PropertyKind("mass", "number"),
        PropertyKind("safety_critical", "boolean"),
    ],
)

_TEXT_TABLE = bytes((string.ascii_letters + string.digits + "  ").encode() * 5)[:256]


def random_text(rng: random.Random, n: int) -> str:
    return rng.randbytes(n).translate(_TEXT_TABLE).decode("ascii")


class _Ids:
    def __init__(self, prefix):
        self.prefix = prefix
        self.n = 0

    def __call__(self, kind):
        self.n += 1
        return f"{self.prefix}{kind}{self.n}"


def _block_diagram(rng, ids, depth, max_objects):
    blocks, rels, subs = [], [], []
    for _ in range(rng.randint(1, max_objects)):
        ports = [Point(ids("port"), "Port", {"name": random_text(rng, 6),
                                             "direction": rng.choice(["in", "out"])})
                 for _ in range(rng.randint(0, 3))]
        dec = None
        if depth > 0 and rng.random() < 0.3:
            sub = _block_diagram(rng, ids, depth - 1, max_objects)
            subs.append(sub)
            dec = sub.id
        blocks.append(Object(ids("blk"), "Block", {"name": random_text(rng, 8),
                                                   "mass": rng.uniform(0.1, 500.0)}, ports, dec))
    all_ports = [p.id for b in blocks for p in b.points]
    for _ in range(rng.randint(0, len(all_ports) // 2)):
        a, b = rng.sample(all_ports, 2)
        rels.append(Relationship(ids("con"), "Connector",
                                 [Role(ids("ra"), "end_a", a), Role(ids("rb"), "end_b", b)]))
    return Graph(ids("bd"), "BlockDiagram", {"name": random_text(rng, 10)}, blocks, rels, subs)


def random_graph(rng: random.Random, max_objects: int = 6, depth: int = 2, prefix: str = "") -> Graph:
    """A random requirement diagram that validates against VEHICLE_METAMODEL."""
    ids = _Ids(prefix)
    reqs, blocks, rels, subs = [], [], [], []
    for _ in range(rng.randint(0, max_objects)):
        props = {"name": random_text(rng, 8), "text": random_text(rng, rng.randint(0, 40)),
                 "priority": rng.randint(1, 5)}
        if rng.random() < 0.5:
            props["safety_critical"] = rng.random() < 0.5
        reqs.append(Object(ids("req"), "Requirement", props))
    for _ in range(rng.randint(0, max_objects)):
        dec = None
        if depth > 0 and rng.random() < 0.4:
            sub = _block_diagram(rng, ids, depth - 1, max_objects)
            subs.append(sub)
            dec = sub.id
        ports = [Point(ids("port"), "Port", {"direction": "in"}) for _ in range(rng.randint(0, 2))]
        blocks.append(Object(ids("blk"), "Block", {"name": random_text(rng, 8)}, ports, dec))
    if reqs and blocks:
        for _ in range(rng.randint(0, len(reqs))):
            rels.append(Relationship(
                ids("sat"), "Satisfy",
                [Role(ids("rs"), "satisfier", rng.choice(blocks).id),
                 Role(ids("rd"), "satisfied", rng.choice(reqs).id)],
                {"rationale": random_text(rng, 12)} if rng.random() < 0.5 else {}))
    if len(reqs) >= 2:
        for _ in range(rng.randint(0, len(reqs) - 1)):
            a, b = rng.sample(reqs, 2)
            rels.append(Relationship(ids("der"), "DeriveReqt",
                                     [Role(ids("rs"), "source", a.id), Role(ids("rd"), "derived", b.id)]))
    return Graph(ids("rd"), "RequirementDiagram", {"name": random_text(rng, 12)}, reqs + blocks, rels, subs)


def sized_graph(rng: random.Random, payload_size: int) -> Graph:
    """A valid graph whose serialized form is close to ``payload_size`` bytes."""
    from .gopprr import serialize_graph

    if payload_size < 8000:
        base = Graph("rd1", "RequirementDiagram", {"name": random_text(rng, 8)})
    else:
        base = random_graph(rng, max_objects=4, depth=1)
    filler_len = 0
    for _ in range(4):
        filler = Object("zz-filler", "Requirement", {"name": "filler", "text": random_text(rng, filler_len)})
        g = Graph(base.id, base.kind, base.properties, base.objects + (filler,),
                  base.relationships, base.subgraphs)
        size = len(serialize_graph(g))
        if size == payload_size or (size > payload_size and filler_len == 0):
            break
        filler_len = max(0, filler_len + payload_size - size)
    return g


def synthetic_record(size_bytes: int, seed=0, *, view: str = "requirement",
                     alpha=Dikw.INFORMATION, asset_id: str | None = None) -> DeaRecord:
    """A DEA record whose document is about ``size_bytes`` long (exact above ~1 KB)."""
    rng = random.Random(seed)
    overhead = 200
    graph = sized_graph(rng, max(0, size_bytes - overhead))
    record = realize_dea(graph, VEHICLE_METAMODEL, system_id="vehicle", asset_id=asset_id or f"asset-{seed}",
                         t=rng.randint(0, 10_000), view=view, alpha=alpha,
                         description="synthetic requirement model", tags=("vehicle", view))
    # correct for the real header size once
    delta = size_bytes - len(record.to_bytes())
    if delta:
        graph = sized_graph(random.Random(seed), max(0, size_bytes - overhead + delta))
        record = realize_dea(graph, VEHICLE_METAMODEL, system_id=record.system_id, asset_id=record.asset_id,
                             t=record.t, view=view, alpha=alpha, description=record.description,
                             tags=record.tags)
    return record
