"""Typed labeled-property graph store with JSONL serialization and statistics.

Nodes carry a closed kind set, coding-system identifiers and scalar
properties. Edges are directed, labeled triples. A graph is mutable while
being built and can be frozen afterwards, which makes it safe to share
across parallel readers (the walk extractor relies on that).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional

from .errors import (
    DuplicateId,
    DuplicateTriple,
    FrozenGraphError,
    ParseError,
    UnknownNode,
)


class NodeKind(str, Enum):
    DISEASE = "Disease"
    FINDING = "Finding"
    PARAMETER = "Parameter"
    IMAGING_RESULT = "ImagingResult"
    PATHOLOGICAL_REFERENCE_RANGE = "PathologicalReferenceRange"
    PATIENT_BASE_DATA = "PatientBaseData"
    EXAMINATION_RULE = "ExaminationRule"
    LABORATORY_RULE = "LaboratoryRule"
    IMAGING_RULE = "ImagingRule"
    CLASSIFIER_RULE = "ClassifierRule"
    CAUSE_RULE = "CauseRule"
    SAMPLE = "Sample"
    IMAGING_PROCEDURE = "ImagingProcedure"
    ORGAN = "Organ"
    SOURCE = "Source"
    ALTERNATIVE = "Alternative"
    EXTERNAL_SYSTEM = "ExternalSystem"
    REFERENCE_RANGE = "ReferenceRange"
    PATH_DATA = "PathData"
    PATIENT = "Patient"
    EVALUATED_PARAMETER = "EvaluatedParameter"


RULE_KINDS = frozenset(k for k in NodeKind if k.value.endswith("Rule"))

RISK_FACTOR_KINDS = frozenset({
    NodeKind.FINDING,
    NodeKind.DISEASE,
    NodeKind.IMAGING_RESULT,
    NodeKind.PARAMETER,
    NodeKind.PATHOLOGICAL_REFERENCE_RANGE,
    NodeKind.PATIENT_BASE_DATA,
    NodeKind.EVALUATED_PARAMETER,
})

# kinds that only appear once patient data has been merged in
AUGMENTED_ONLY_KINDS = frozenset({NodeKind.PATIENT, NodeKind.EVALUATED_PARAMETER})

Scalar = str | float | int | bool


@dataclass
class Node:
    id: str
    kind: NodeKind
    label: str = ""
    codes: dict[str, str] = field(default_factory=dict)
    properties: dict[str, Scalar] = field(default_factory=dict)

    def __post_init__(self):
        if not isinstance(self.kind, NodeKind):
            self.kind = NodeKind(self.kind)
        if not self.label:
            self.label = self.id


@dataclass(frozen=True)
class Edge:
    src: str
    label: str
    dst: str

    def as_triple(self) -> tuple[str, str, str]:
        return (self.src, self.label, self.dst)


@dataclass
class ReferenceRange:
    """Normal interval for a lab parameter, optionally sex/age specific."""

    parameter_id: str
    lower: Optional[float]
    upper: Optional[float]
    unit: str
    sex: str = "any"  # male | female | any
    age_min: Optional[float] = None
    age_max: Optional[float] = None

    def __post_init__(self):
        if self.lower is None and self.upper is None:
            raise ValueError("reference range needs at least one bound")
        if self.lower is not None and self.upper is not None and not self.lower < self.upper:
            raise ValueError("lower bound must be below upper bound")
        if self.sex not in ("male", "female", "any"):
            raise ValueError(f"bad sex spec: {self.sex!r}")
        if self.age_min is not None and self.age_max is not None and self.age_min > self.age_max:
            raise ValueError("age_min must not exceed age_max")

    def applies_to(self, sex: str, age: float) -> bool:
        if self.sex != "any" and self.sex != sex:
            return False
        if self.age_min is not None and age < self.age_min:
            return False
        if self.age_max is not None and age > self.age_max:
            return False
        return True


@dataclass
class GraphStats:
    node_count: int
    edge_count: int
    avg_degree: float  # edge_count / node_count (combined in+out reading)


class Graph:
    """In-memory labeled-property graph.

    Single-writer while mutable; `freeze()` flips it to immutable with
    deterministically sorted adjacency lists.
    """

    def __init__(self):
        self.nodes: dict[str, Node] = {}
        self._out: dict[str, list[tuple[str, str]]] = {}  # id -> [(label, dst)]
        self._in: dict[str, list[tuple[str, str]]] = {}  # id -> [(src, label)]
        self._triples: set[tuple[str, str, str]] = set()
        self.frozen = False

    # --- mutation ---

    def add_node(self, node: Node) -> str:
        self._check_mutable()
        if node.id in self.nodes:
            raise DuplicateId(f"node id already present: {node.id}")
        self.nodes[node.id] = node
        self._out[node.id] = []
        self._in[node.id] = []
        return node.id

    def add_edge(self, src: str, label: str, dst: str) -> Edge:
        self._check_mutable()
        if src not in self.nodes:
            raise UnknownNode(f"unknown source node: {src}")
        if dst not in self.nodes:
            raise UnknownNode(f"unknown target node: {dst}")
        triple = (src, label, dst)
        if triple in self._triples:
            raise DuplicateTriple(f"duplicate triple: {triple}")
        self._triples.add(triple)
        self._out[src].append((label, dst))
        self._in[dst].append((src, label))
        return Edge(src, label, dst)

    def remove_edge(self, src: str, label: str, dst: str) -> None:
        self._check_mutable()
        triple = (src, label, dst)
        if triple not in self._triples:
            raise UnknownNode(f"no such triple: {triple}")
        self._triples.remove(triple)
        self._out[src].remove((label, dst))
        self._in[dst].remove((src, label))

    def freeze(self) -> "Graph":
        for adj in self._out.values():
            adj.sort()
        for adj in self._in.values():
            adj.sort()
        self.frozen = True
        return self

    def _check_mutable(self):
        if self.frozen:
            raise FrozenGraphError("graph is frozen")

    # --- access ---

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"unknown node: {node_id}") from None

    def has_node(self, node_id: str) -> bool:
        return node_id in self.nodes

    def has_triple(self, src: str, label: str, dst: str) -> bool:
        return (src, label, dst) in self._triples

    def out_edges(self, node_id: str) -> list[tuple[str, str]]:
        if node_id not in self.nodes:
            raise UnknownNode(f"unknown node: {node_id}")
        return self._out[node_id]

    def in_edges(self, node_id: str) -> list[tuple[str, str]]:
        if node_id not in self.nodes:
            raise UnknownNode(f"unknown node: {node_id}")
        return self._in[node_id]

    def triples(self) -> Iterator[tuple[str, str, str]]:
        return iter(self._triples)

    def edges(self) -> Iterator[Edge]:
        return (Edge(*t) for t in self._triples)

    def nodes_of_kind(self, *kinds: NodeKind) -> list[Node]:
        wanted = set(kinds)
        return [n for n in self.nodes.values() if n.kind in wanted]

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self._triples)

    def copy(self, frozen: bool = False) -> "Graph":
        """Deep-enough copy: node objects are shared read-only records."""
        g = Graph()
        for node in self.nodes.values():
            g.add_node(Node(node.id, node.kind, node.label,
                            dict(node.codes), dict(node.properties)))
        for src, label, dst in sorted(self._triples):
            g.add_edge(src, label, dst)
        if frozen:
            g.freeze()
        return g

    def validate(self) -> None:
        """Referential-integrity check over the whole edge set."""
        for src, _, dst in self._triples:
            if src not in self.nodes or dst not in self.nodes:
                raise UnknownNode(f"dangling edge endpoint: ({src}, {dst})")


def graph_stats(graph: Graph) -> GraphStats:
    n, e = graph.node_count, graph.edge_count
    return GraphStats(node_count=n, edge_count=e, avg_degree=(e / n if n else 0.0))


def condition_edges(graph: Graph) -> list[tuple[str, str, str]]:
    """All rule -> risk-factor condition triples, sorted for determinism."""
    out = []
    for src, label, dst in graph.triples():
        if graph.nodes[src].kind in RULE_KINDS and graph.nodes[dst].kind in RISK_FACTOR_KINDS:
            out.append((src, label, dst))
    out.sort()
    return out


# --- reference ranges stored as graph nodes ---

def add_reference_range(graph: Graph, rr: ReferenceRange, range_id: Optional[str] = None) -> str:
    if range_id is None:
        range_id = f"range_{rr.parameter_id}_{rr.sex}"
    props: dict[str, Scalar] = {"unit": rr.unit, "sex": rr.sex}
    if rr.lower is not None:
        props["lower"] = rr.lower
    if rr.upper is not None:
        props["upper"] = rr.upper
    if rr.age_min is not None:
        props["age_min"] = rr.age_min
    if rr.age_max is not None:
        props["age_max"] = rr.age_max
    props["parameter"] = rr.parameter_id
    graph.add_node(Node(range_id, NodeKind.REFERENCE_RANGE, properties=props))
    graph.add_edge(rr.parameter_id, "hasReferenceRange", range_id)
    return range_id


def reference_ranges(graph: Graph) -> dict[str, list[ReferenceRange]]:
    """Collect ReferenceRange records keyed by parameter id."""
    out: dict[str, list[ReferenceRange]] = {}
    for node in graph.nodes_of_kind(NodeKind.REFERENCE_RANGE):
        p = node.properties
        rr = ReferenceRange(
            parameter_id=str(p["parameter"]),
            lower=float(p["lower"]) if "lower" in p else None,
            upper=float(p["upper"]) if "upper" in p else None,
            unit=str(p["unit"]),
            sex=str(p.get("sex", "any")),
            age_min=float(p["age_min"]) if "age_min" in p else None,
            age_max=float(p["age_max"]) if "age_max" in p else None,
        )
        out.setdefault(rr.parameter_id, []).append(rr)
    return out


# --- serialization (.kgjsonl: one JSON record per line) ---

def _node_record(node: Node) -> dict:
    return {
        "record_type": "node",
        "id": node.id,
        "kind": node.kind.value,
        "label": node.label,
        "codes": dict(sorted(node.codes.items())),
        "properties": dict(sorted(node.properties.items())),
    }


def save_graph(graph: Graph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for node_id in sorted(graph.nodes):
            fh.write(json.dumps(_node_record(graph.nodes[node_id]), ensure_ascii=False))
            fh.write("\n")
        for src, label, dst in sorted(graph.triples()):
            fh.write(json.dumps(
                {"record_type": "edge", "src": src, "label": label, "dst": dst},
                ensure_ascii=False))
            fh.write("\n")


def load_graph(path) -> Graph:
    graph = Graph()
    pending_edges: list[tuple[int, str, str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", line=lineno) from None
            if not isinstance(rec, dict) or "record_type" not in rec:
                raise ParseError("record without record_type", line=lineno)
            if rec["record_type"] == "node":
                try:
                    graph.add_node(Node(
                        id=rec["id"],
                        kind=NodeKind(rec["kind"]),
                        label=rec.get("label", rec["id"]),
                        codes=rec.get("codes", {}),
                        properties=rec.get("properties", {}),
                    ))
                except (KeyError, ValueError, DuplicateId) as exc:
                    raise ParseError(f"bad node record: {exc}", line=lineno) from None
            elif rec["record_type"] == "edge":
                try:
                    pending_edges.append((lineno, rec["src"], rec["label"], rec["dst"]))
                except KeyError as exc:
                    raise ParseError(f"bad edge record: missing {exc}", line=lineno) from None
            else:
                raise ParseError(f"unknown record_type: {rec['record_type']}", line=lineno)
    for lineno, src, label, dst in pending_edges:
        try:
            graph.add_edge(src, label, dst)
        except (UnknownNode, DuplicateTriple) as exc:
            raise ParseError(str(exc), line=lineno) from None
    return graph
