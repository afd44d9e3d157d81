"""Network topology processing: node-breaker graph to bus-branch model.

Processing runs in three phases:

1. :func:`substation_tp` labels each substation independently.  A
   breadth-first search starts from every unlabelled bus bar, crosses
   breakers and disconnectors only when they are closed, passes through
   connectivity nodes and absorbs single-ended devices.  Branch devices
   (lines, transformers, series compensators, DC links) stop the search.
   Whatever is still unlabelled afterwards is grouped the same way from its
   smallest vertex id.  Every group becomes a :class:`TopologyNode` named
   after its smallest member id, so the result does not depend on search
   order or thread count.
2. :func:`network_tp` turns every branch device whose two ends are in
   service into a :class:`TopologyEdge` between the labels of its end nodes.
3. :func:`compute_islands` finds connected components of the bus-branch
   graph and marks those containing a generator as energized.

:func:`oracle_partition` recomputes phase 1 straight from the grid model
with a union-find, without touching the property graph.
"""
from __future__ import annotations

import os
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Union

from .graph import MEMBER_KINDS, PropertyGraph, node_vertex_id, record_vertex_id
from .model import BRANCH_KINDS, GridModel
from .unionfind import UnionFind

Partition = frozenset  # frozenset[frozenset[str]]


class NtpError(RuntimeError):
    pass


@dataclass
class TopologyNode:
    id: str
    substation: str
    members: frozenset[str]
    contains_busbar: bool = False
    contains_generator: bool = False
    energized: bool = False


@dataclass(frozen=True)
class TopologyEdge:
    id: str
    device: str
    endpoints: tuple[str, str]


@dataclass(frozen=True)
class Island:
    id: str
    nodes: frozenset[str]
    energized: bool


@dataclass
class BusBranchModel:
    nodes: list[TopologyNode] = field(default_factory=list)
    edges: list[TopologyEdge] = field(default_factory=list)
    islands: list[Island] = field(default_factory=list)
    # milliseconds per phase
    timing: dict[str, float] = field(default_factory=dict, compare=False)
    warnings: list[str] = field(default_factory=list, compare=False)

    def partition(self) -> Partition:
        return topology_partition(self.nodes)


def resolve_parallelism(parallelism: Union[int, str, None]) -> int:
    """``None``, ``"auto"`` and ``"max"`` mean one worker per CPU."""
    if parallelism in (None, "auto", "max"):
        return os.cpu_count() or 1
    n = int(parallelism)
    if n < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism!r}")
    return n


def _parallel_map(fn: Callable, items: list, workers: int) -> list:
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _chunks(items: list, n: int) -> list[list]:
    size = max(1, -(-len(items) // n))
    return [items[i:i + size] for i in range(0, len(items), size)]


# -- substation level ---------------------------------------------------------

def _substation_index(g: PropertyGraph) -> dict[str, list[str]]:
    index: dict[str, list[str]] = {}
    for v in g.vertices.values():
        if v.kind in MEMBER_KINDS:
            if v.substation is None:
                raise NtpError(f"vertex {v.id!r} has no substation")
            index.setdefault(v.substation, []).append(v.id)
    return index


def _label_substation(g: PropertyGraph, substation: str, member_ids: list[str]) -> list[TopologyNode]:
    vertices, edges, adjacency = g.vertices, g.edges, g.adjacency
    busbars = sorted(vid for vid in member_ids if vertices[vid].kind == "busbar")
    others = sorted(vid for vid in member_ids if vertices[vid].kind != "busbar")
    nodes = []
    for seed in busbars + others:
        if vertices[seed].label is not None:
            continue
        vertices[seed].label = seed
        reached = [seed]
        queue = deque(reached)
        while queue:
            vid = queue.popleft()
            for eid, nid in adjacency[vid].items():
                edge = edges[eid]
                if edge.closed is False:
                    continue
                n = vertices[nid]
                if n.label is not None or n.substation != substation or n.kind in BRANCH_KINDS:
                    continue
                if n.closed is False:
                    continue
                n.label = seed
                reached.append(nid)
                queue.append(nid)
        members = [vid for vid in reached if vertices[vid].kind in MEMBER_KINDS]
        canonical = min(members)
        kinds = set()
        for vid in reached:
            vertices[vid].label = canonical
            kinds.add(vertices[vid].kind)
        nodes.append(
            TopologyNode(canonical, substation, frozenset(members),
                         contains_busbar="busbar" in kinds, contains_generator="generator" in kinds)
        )
    return nodes


def substation_tp(g: PropertyGraph, parallelism: Union[int, str, None] = 1) -> list[TopologyNode]:
    """Group connectivity nodes and single-ended devices into topology nodes.

    Substations are processed concurrently; each task writes labels only on
    vertices of its own substation.  Returns nodes sorted by id.
    """
    index = _substation_index(g)
    g.clear_labels()
    workers = resolve_parallelism(parallelism)
    results = _parallel_map(lambda st: _label_substation(g, st, index[st]), sorted(index), workers)
    return sorted((n for group in results for n in group), key=lambda n: n.id)


# -- network level ------------------------------------------------------------

def _branch_edge(g: PropertyGraph, vid: str) -> Optional[TopologyEdge]:
    v = g.vertices[vid]
    if not all(v.ends_closed):
        return None
    ends = {}
    for eid, nid in g.adjacency[vid].items():
        ends[g.edges[eid].port] = g.vertices[nid]
    labels = []
    for port in ("i", "j"):
        node = ends.get(port)
        if node is None or node.label is None:
            raise NtpError(f"branch {vid!r}: {port}-end connectivity node is not labelled")
        labels.append(node.label)
    return TopologyEdge(vid, v.record_id, (labels[0], labels[1]))


def network_tp(
    g: PropertyGraph, nodes: Iterable[TopologyNode], parallelism: Union[int, str, None] = 1
) -> list[TopologyEdge]:
    """Emit a topology edge for every branch device closed at both ends.

    ``nodes`` must come from :func:`substation_tp` on the same graph.
    Returns edges sorted by device vertex id.
    """
    known = {n.id for n in nodes}
    branch_ids = sorted(vid for vid, v in g.vertices.items() if v.kind in BRANCH_KINDS)
    workers = resolve_parallelism(parallelism)

    def work(chunk):
        return [e for e in (_branch_edge(g, vid) for vid in chunk) if e is not None]

    edges = [e for part in _parallel_map(work, _chunks(branch_ids, workers), workers) for e in part]
    for e in edges:
        for end in e.endpoints:
            if end not in known:
                raise NtpError(f"branch {e.id!r} ends in unknown topology node {end!r}")
    return sorted(edges, key=lambda e: e.id)


# -- islands ------------------------------------------------------------------

def compute_islands(m: BusBranchModel) -> list[Island]:
    """Connected components of the bus-branch graph.

    Also sets ``energized`` on every topology node of ``m``.
    """
    uf = UnionFind(n.id for n in m.nodes)
    for e in m.edges:
        uf.union(*e.endpoints)
    by_id = {n.id: n for n in m.nodes}
    islands = []
    for group in uf.groups():
        energized = any(by_id[nid].contains_generator for nid in group)
        for nid in group:
            by_id[nid].energized = energized
        islands.append(Island(f"island:{min(group)}", frozenset(group), energized))
    return sorted(islands, key=lambda i: i.id)


def run_ntp(g: PropertyGraph, parallelism: Union[int, str, None] = 1) -> BusBranchModel:
    """Substation pass, network pass and island analysis, with timings in ms."""
    if not g.vertices:
        return BusBranchModel(timing={"substation_tp": 0.0, "network_tp": 0.0, "islands": 0.0})
    timing = {}
    t0 = time.perf_counter()
    nodes = substation_tp(g, parallelism)
    t1 = time.perf_counter()
    edges = network_tp(g, nodes, parallelism)
    t2 = time.perf_counter()
    model = BusBranchModel(nodes, edges)
    model.islands = compute_islands(model)
    t3 = time.perf_counter()
    timing["substation_tp"] = (t1 - t0) * 1e3
    timing["network_tp"] = (t2 - t1) * 1e3
    timing["islands"] = (t3 - t2) * 1e3
    model.timing = timing
    model.warnings = [
        f"branch {e.id} has both ends in topology node {e.endpoints[0]}"
        for e in edges if e.endpoints[0] == e.endpoints[1]
    ]
    return model


# -- oracle -------------------------------------------------------------------

def topology_partition(nodes: Iterable[TopologyNode]) -> Partition:
    return frozenset(n.members for n in nodes)


_SINGLE_FIELDS = (("busbar", "bus_bars"), ("generator", "generators"),
                  ("load", "loads"), ("compensator_p", "compensators_p"))


def oracle_partition(model: GridModel) -> Partition:
    """Closed-switch connectivity computed with a union-find over the model.

    Elements are connectivity nodes and single-ended devices, named with the
    same vertex ids the graph uses.  Sets spanning several substations are
    split so the result is comparable with per-substation processing.
    """
    substation_of: dict[str, str] = {}
    candidates: dict[str, set] = {}
    fallback: dict[str, set] = {}
    uf = UnionFind()

    for table, name in _SINGLE_FIELDS:
        for rec in getattr(model, name):
            dev = record_vertex_id(table, rec.id)
            cn = node_vertex_id(rec.nd)
            substation_of[dev] = rec.substation
            candidates.setdefault(cn, set()).add(rec.substation)
            uf.union(dev, cn)
    for rec in (*model.breakers, *model.disconnectors):
        a, b = node_vertex_id(rec.i_nd), node_vertex_id(rec.j_nd)
        candidates.setdefault(a, set()).add(rec.substation)
        candidates.setdefault(b, set()).add(rec.substation)
        uf.add(a)
        uf.add(b)
        if rec.closed:
            uf.union(a, b)
    for rec in (*model.ac_lines, *model.transformers, *model.compensators_s, *model.converters, *model.dc_lines):
        for nd in (rec.i_nd, rec.j_nd):
            cn = node_vertex_id(nd)
            uf.add(cn)
            if rec.substation is not None:
                fallback.setdefault(cn, set()).add(rec.substation)

    for element in uf.parent:
        if element not in substation_of:
            found = candidates.get(element) or fallback.get(element)
            substation_of[element] = min(found) if found else None

    parts = []
    for group in uf.groups():
        split: dict = {}
        for element in group:
            split.setdefault(substation_of[element], set()).add(element)
        parts.extend(frozenset(s) for s in split.values())
    return frozenset(parts)

