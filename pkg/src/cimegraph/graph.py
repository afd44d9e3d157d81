"""In-memory property graph built from a :class:`~cimegraph.model.GridModel`.

Two mappings are supported:

* strategy ``"A"`` (:func:`build_vertex_graph`): every equipment record and
  every connectivity node is a vertex, joined by plain connection edges;
* strategy ``"B"`` (:func:`build_mixed_graph`): as A, except breakers and
  disconnectors become single edges between their two connectivity nodes.

Vertex and edge ids are namespaced by table kind, e.g. ``"busbar/BB1"`` or
``"cn/N7"``, so ids from different tables never collide.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .model import BRANCH_KINDS, SINGLE_ENDED_KINDS, SWITCH_KINDS, TABLE_FIELDS, GridModel, NodeId

CONNECTIVITY_NODE = "connectivity_node"
PLAIN = "plain_connection"
# vertices that end up inside topology nodes
MEMBER_KINDS = frozenset((CONNECTIVITY_NODE, *SINGLE_ENDED_KINDS))

_SINGLE_TABLES = ("busbar", "generator", "load", "compensator_p")
_SWITCH_TABLES = ("breaker", "disconnector")
_BRANCH_TABLES = ("ac_line", "transformer", "compensator_s", "converter", "dc_line")


class GraphError(Exception):
    pass


class NotFoundError(GraphError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DuplicateIdError(GraphError):
    pass


class KindError(GraphError):
    pass


class GraphBuildError(GraphError):
    pass


def node_vertex_id(nd: NodeId) -> str:
    return f"cn/{nd}"


def record_vertex_id(table_kind: str, record_id: str) -> str:
    return f"{table_kind}/{record_id}"


@dataclass
class Vertex:
    id: str
    kind: str
    substation: Optional[str] = None
    closed: Optional[bool] = None
    ends_closed: Optional[tuple[bool, bool]] = None
    record_id: Optional[str] = None
    attributes: dict[str, str] = field(default_factory=dict)
    # working field written by topology processing
    label: Optional[str] = None

    def __post_init__(self):
        if (self.closed is not None) != (self.kind in SWITCH_KINDS):
            raise KindError(f"vertex {self.id}: closed flag is only valid on switch kinds")


@dataclass
class Edge:
    id: str
    endpoints: tuple[str, str]
    kind: str = PLAIN
    closed: Optional[bool] = None
    port: Optional[str] = None

    def __post_init__(self):
        self.endpoints = tuple(self.endpoints)
        if (self.closed is not None) != (self.kind in SWITCH_KINDS):
            raise KindError(f"edge {self.id}: closed flag is only valid on switch kinds")


@dataclass(frozen=True)
class GraphStats:
    vertex_count: int = 0
    edge_count: int = 0
    switch_count: int = 0
    substation_count: int = 0


class PropertyGraph:
    """Vertex and edge store with symmetric adjacency.

    ``adjacency[v]`` maps each incident edge id to the neighbour on its far
    side, so removal of a single edge is O(1).
    """

    def __init__(self, strategy: str):
        if strategy not in ("A", "B"):
            raise ValueError(f"unknown strategy {strategy!r}")
        self.strategy = strategy
        self.vertices: dict[str, Vertex] = {}
        self.edges: dict[str, Edge] = {}
        self.adjacency: dict[str, dict[str, str]] = {}

    def __eq__(self, other):
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return (
            self.strategy == other.strategy
            and self.vertices == other.vertices
            and self.edges == other.edges
            and self.adjacency == other.adjacency
        )

    def __repr__(self):
        return f"PropertyGraph(strategy={self.strategy!r}, vertices={len(self.vertices)}, edges={len(self.edges)})"

    def add_vertex(self, vertex: Vertex) -> None:
        if vertex.id in self.vertices:
            raise DuplicateIdError(f"vertex {vertex.id!r} already exists")
        self.vertices[vertex.id] = vertex
        self.adjacency[vertex.id] = {}

    def remove_vertex(self, vertex_id: str) -> Vertex:
        if vertex_id not in self.vertices:
            raise NotFoundError(f"no vertex {vertex_id!r}")
        for edge_id in list(self.adjacency[vertex_id]):
            self.remove_edge(edge_id)
        del self.adjacency[vertex_id]
        return self.vertices.pop(vertex_id)

    def add_edge(self, edge: Edge) -> None:
        if edge.id in self.edges:
            raise DuplicateIdError(f"edge {edge.id!r} already exists")
        u, v = edge.endpoints
        for end in (u, v):
            if end not in self.vertices:
                raise NotFoundError(f"edge {edge.id!r}: no vertex {end!r}")
        if u == v:
            raise GraphError(f"edge {edge.id!r} is a self-loop")
        self.edges[edge.id] = edge
        self.adjacency[u][edge.id] = v
        self.adjacency[v][edge.id] = u

    def remove_edge(self, edge_id: str) -> Edge:
        edge = self.edges.pop(edge_id, None)
        if edge is None:
            raise NotFoundError(f"no edge {edge_id!r}")
        u, v = edge.endpoints
        del self.adjacency[u][edge_id]
        del self.adjacency[v][edge_id]
        return edge

    def neighbors(self, vertex_id: str) -> Iterator[tuple[Edge, Vertex]]:
        for edge_id, other in self.adjacency[vertex_id].items():
            yield self.edges[edge_id], self.vertices[other]

    def degree(self, vertex_id: str) -> int:
        return len(self.adjacency[vertex_id])

    def clear_labels(self) -> None:
        for v in self.vertices.values():
            v.label = None


def _build(model: GridModel, strategy: str) -> PropertyGraph:
    g = PropertyGraph(strategy)
    node_st = model.node_substations()
    for nd in sorted(model.connectivity_nodes):
        if not nd:
            continue
        g.add_vertex(Vertex(node_vertex_id(nd), CONNECTIVITY_NODE, node_st[nd]))

    def attach(device_vid, nd, port, rec_id):
        if not nd or node_vertex_id(nd) not in g.vertices:
            raise GraphBuildError(f"record {rec_id!r} references unknown connectivity node {nd!r}")
        g.add_edge(Edge(f"{device_vid}:{port}", (device_vid, node_vertex_id(nd)), PLAIN, port=port))

    for table in _SINGLE_TABLES:
        for rec in getattr(model, TABLE_FIELDS[table]):
            vid = record_vertex_id(table, rec.id)
            g.add_vertex(Vertex(vid, rec.kind, rec.substation, record_id=rec.id, attributes=rec.attributes))
            attach(vid, rec.nd, "nd", rec.id)

    for table in _SWITCH_TABLES:
        for rec in getattr(model, TABLE_FIELDS[table]):
            vid = record_vertex_id(table, rec.id)
            if strategy == "A":
                g.add_vertex(Vertex(vid, rec.kind, rec.substation, closed=rec.closed,
                                    record_id=rec.id, attributes=rec.attributes))
                attach(vid, rec.i_nd, "i", rec.id)
                attach(vid, rec.j_nd, "j", rec.id)
            else:
                for nd in rec.nodes():
                    if not nd or node_vertex_id(nd) not in g.vertices:
                        raise GraphBuildError(f"record {rec.id!r} references unknown connectivity node {nd!r}")
                g.add_edge(Edge(vid, (node_vertex_id(rec.i_nd), node_vertex_id(rec.j_nd)), rec.kind, rec.closed))

    for table in _BRANCH_TABLES:
        for rec in getattr(model, TABLE_FIELDS[table]):
            vid = record_vertex_id(table, rec.id)
            g.add_vertex(Vertex(vid, rec.kind, rec.substation, ends_closed=(rec.i_closed, rec.j_closed),
                                record_id=rec.id, attributes=rec.attributes))
            attach(vid, rec.i_nd, "i", rec.id)
            attach(vid, rec.j_nd, "j", rec.id)
    return g


def build_vertex_graph(model: GridModel) -> PropertyGraph:
    """Strategy A: one vertex per connectivity node and per equipment record."""
    return _build(model, "A")


def build_mixed_graph(model: GridModel) -> PropertyGraph:
    """Strategy B: breakers and disconnectors are edges, everything else a vertex."""
    return _build(model, "B")


def build_graph(model: GridModel, strategy: str) -> PropertyGraph:
    return _build(model, strategy.upper())


def set_switch_status(g: PropertyGraph, switch_id: str, closed: bool) -> None:
    """Open or close the breaker/disconnector ``switch_id`` in place."""
    target = g.vertices.get(switch_id) or g.edges.get(switch_id)
    if target is None:
        raise NotFoundError(f"no switch {switch_id!r}")
    if target.kind not in SWITCH_KINDS:
        raise KindError(f"{switch_id!r} is a {target.kind}, not a switch")
    target.closed = bool(closed)


def switch_ids(g: PropertyGraph) -> list[str]:
    """Ids of all switches, whichever of vertices or edges they live in."""
    if g.strategy == "A":
        return sorted(v.id for v in g.vertices.values() if v.kind in SWITCH_KINDS)
    return sorted(e.id for e in g.edges.values() if e.kind in SWITCH_KINDS)


def stats(g: PropertyGraph) -> GraphStats:
    switches = sum(1 for v in g.vertices.values() if v.kind in SWITCH_KINDS)
    switches += sum(1 for e in g.edges.values() if e.kind in SWITCH_KINDS)
    substations = {v.substation for v in g.vertices.values() if v.substation is not None}
    return GraphStats(len(g.vertices), len(g.edges), switches, len(substations))


def is_branch(vertex: Vertex) -> bool:
    return vertex.kind in BRANCH_KINDS
