"""Digital engineering asset records and per-system collections.

A record places a serialized GOPPRR graph at coordinates ``(t, view, alpha)``:
``t`` is the development-process position, ``view`` the system-artifact
label and ``alpha`` the DIKW attribute.

Record document layout (binary-safe)::

    DEA-RECORD/1\\n
    <canonical JSON header, one line>\\n
    <payload bytes, exactly header["payload_size"] of them>
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import ParseError, PreconditionError, RealizationError
from .gopprr import Graph, MetaModel, parse_graph, serialize_graph, validate_graph

RECORD_MAGIC = b"DEA-RECORD/1\n"
WELL_KNOWN_VIEWS = ("requirement", "function", "architecture")
_HEADER_KEYS = ("alpha", "asset_id", "description", "payload_size", "stage", "system_id", "t", "tags", "view")


class Dikw(str, Enum):
    DATA = "data"
    INFORMATION = "information"
    KNOWLEDGE = "knowledge"
    WISDOM = "wisdom"


@dataclass(frozen=True)
class DeaRecord:
    system_id: str
    asset_id: str
    t: int
    view: str
    alpha: Dikw
    payload: bytes
    description: str = ""
    tags: tuple[str, ...] = ()
    stage: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", Dikw(self.alpha))
        object.__setattr__(self, "tags", tuple(self.tags))
        object.__setattr__(self, "payload", bytes(self.payload))
        if isinstance(self.t, bool) or not isinstance(self.t, int):
            raise TypeError("t must be an integer timestamp")
        for name in ("system_id", "asset_id", "view", "description"):
            if not isinstance(getattr(self, name), str):
                raise TypeError(f"{name} must be a string")
        if not all(isinstance(t, str) for t in self.tags):
            raise TypeError("tags must be strings")
        if self.stage is not None and not isinstance(self.stage, str):
            raise TypeError("stage must be a string or None")
        if not self.view:
            raise ValueError("view must be a non-empty label")
        if not self.system_id or not self.asset_id:
            raise ValueError("system_id and asset_id must be non-empty")

    @property
    def coordinates(self):
        return (self.asset_id, self.t, self.view, self.alpha)

    def graph(self) -> Graph:
        return parse_graph(self.payload)

    def to_bytes(self) -> bytes:
        header = {
            "alpha": self.alpha.value,
            "asset_id": self.asset_id,
            "description": self.description,
            "payload_size": len(self.payload),
            "stage": self.stage,
            "system_id": self.system_id,
            "t": self.t,
            "tags": list(self.tags),
            "view": self.view,
        }
        line = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return RECORD_MAGIC + line.encode("utf-8") + b"\n" + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "DeaRecord":
        data = bytes(data)
        if not data.startswith(RECORD_MAGIC):
            raise ParseError("not a DEA record document", 1, 1)
        end = data.find(b"\n", len(RECORD_MAGIC))
        if end < 0:
            raise ParseError("DEA record header is truncated", 2, 1)
        try:
            header = json.loads(data[len(RECORD_MAGIC):end].decode("utf-8"))
        except UnicodeDecodeError:
            raise ParseError("DEA record header is not UTF-8", 2, 1) from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed DEA record header: {exc.msg}", 2, exc.colno) from None
        if not isinstance(header, dict) or sorted(header) != sorted(_HEADER_KEYS):
            raise ParseError("DEA record header has the wrong keys", 2, 1)
        payload = data[end + 1:]
        if len(payload) != header["payload_size"]:
            raise ParseError(
                f"payload is {len(payload)} bytes, header says {header['payload_size']}", 3, 1)
        parse_graph(payload)
        try:
            return cls(
                system_id=header["system_id"], asset_id=header["asset_id"], t=header["t"],
                view=header["view"], alpha=header["alpha"], payload=payload,
                description=header["description"], tags=tuple(header["tags"]), stage=header["stage"],
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"invalid DEA record header: {exc}", 2, 1) from None


def realize_dea(graph: Graph, meta: MetaModel, *, system_id: str, asset_id: str, t: int, view: str,
                alpha, description: str = "", tags: Sequence[str] = (), stage: str | None = None) -> DeaRecord:
    """Turn a valid instance model into a DEA record; invalid graphs are refused."""
    report = validate_graph(meta, graph)
    if not report.ok:
        raise RealizationError(report)
    return DeaRecord(system_id, asset_id, t, view, alpha, serialize_graph(graph),
                     description, tuple(tags), stage)


@dataclass(frozen=True)
class DeaCollection:
    """The DEAs of one system, keyed uniquely by ``(asset_id, t, view, alpha)``."""

    system_id: str
    records: tuple[DeaRecord, ...] = ()

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def get(self, asset_id, t, view, alpha) -> DeaRecord:
        key = (asset_id, t, view, Dikw(alpha))
        for r in self.records:
            if r.coordinates == key:
                return r
        raise KeyError(key)


def aggregate(records: Iterable[DeaRecord], system_id: str | None = None) -> DeaCollection:
    records = list(records)
    if system_id is None:
        if not records:
            raise PreconditionError("an empty collection needs an explicit system_id")
        system_id = records[0].system_id
    seen = set()
    for r in records:
        if r.system_id != system_id:
            raise PreconditionError(f"record {r.asset_id!r} belongs to {r.system_id!r}, not {system_id!r}")
        if r.coordinates in seen:
            raise PreconditionError(f"duplicate DEA coordinates {r.coordinates}")
        seen.add(r.coordinates)
    return DeaCollection(system_id, tuple(records))
