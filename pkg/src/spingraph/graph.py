"""Metric graphs with directed-bond bookkeeping and optional planar embedding.

Bond ``2e`` runs along edge ``e`` from its tail to its head, bond ``2e + 1``
runs back. Every vertex lists its edge ends in edge order (tail end before
head end for a loop); each end carries one outgoing and one incoming bond.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Hashable, Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Vertex:
    id: Hashable
    pos: tuple[float, float] | None = None


@dataclass(frozen=True)
class Edge:
    id: Hashable
    tail: int
    head: int
    length: float


@dataclass(frozen=True)
class DirectedBond:
    edge: int
    reverse: bool = False

    @property
    def index(self) -> int:
        return 2 * self.edge + int(self.reverse)

    def reversed(self) -> "DirectedBond":
        return DirectedBond(self.edge, not self.reverse)


@dataclass(frozen=True)
class VertexEnd:
    """One edge end at a vertex: the bond leaving through it and the one arriving."""

    edge: int
    at_tail: bool
    out_bond: int
    in_bond: int


@dataclass(frozen=True, eq=False)
class MetricGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    _vindex: Mapping[Hashable, int] = field(repr=False, default_factory=dict)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_bonds(self) -> int:
        return 2 * len(self.edges)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def vertex_index(self, vid: Hashable) -> int:
        try:
            return self._vindex[vid]
        except KeyError:
            raise GraphError(f"unknown vertex {vid!r}") from None

    def bond_lengths(self) -> np.ndarray:
        return np.repeat([e.length for e in self.edges], 2).astype(float)

    def origin(self, b: int) -> int:
        e = self.edges[b // 2]
        return e.head if b % 2 else e.tail

    def terminus(self, b: int) -> int:
        e = self.edges[b // 2]
        return e.tail if b % 2 else e.head

    def ends(self, v: int) -> list[VertexEnd]:
        out = []
        for i, e in enumerate(self.edges):
            if e.tail == v:
                out.append(VertexEnd(i, True, 2 * i, 2 * i + 1))
            if e.head == v:
                out.append(VertexEnd(i, False, 2 * i + 1, 2 * i))
        return out

    def degree(self, v: int) -> int:
        return len(self.ends(v))

    @property
    def has_embedding(self) -> bool:
        return all(v.pos is not None for v in self.vertices)

    def with_lengths(self, lengths: Sequence[float]) -> "MetricGraph":
        if len(lengths) != self.n_edges:
            raise GraphError("length list does not match edge count")
        edges = [Edge(e.id, e.tail, e.head, float(L)) for e, L in zip(self.edges, lengths)]
        return _make(self.vertices, edges)

    def to_dict(self) -> dict[str, Any]:
        verts = []
        for v in self.vertices:
            d: dict[str, Any] = {"id": v.id}
            if v.pos is not None:
                d["x"], d["y"] = v.pos
            verts.append(d)
        edges = [
            {"id": e.id, "from": self.vertices[e.tail].id, "to": self.vertices[e.head].id,
             "length": e.length}
            for e in self.edges
        ]
        return {"vertices": verts, "edges": edges}

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()


def _make(vertices, edges) -> MetricGraph:
    vertices = tuple(vertices)
    edges = tuple(edges)
    vindex = {v.id: i for i, v in enumerate(vertices)}
    if len(vindex) != len(vertices):
        raise GraphError("duplicate vertex id")
    if not edges:
        raise GraphError("graph has no edges")
    for e in edges:
        if not (np.isfinite(e.length) and e.length > 0):
            raise GraphError(f"edge {e.id!r} has nonpositive length {e.length}")
    n = len(vertices)
    rows = [e.tail for e in edges]
    cols = [e.head for e in edges]
    adj = coo_matrix((np.ones(len(edges)), (rows, cols)), shape=(n, n))
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp != 1:
        raise GraphError(f"graph is disconnected ({ncomp} components)")
    return MetricGraph(vertices, edges, vindex)


def build_graph(spec: Mapping[str, Any]) -> MetricGraph:
    """Build a graph from ``{"vertices": [...], "edges": [...]}``.

    Vertices need an ``id`` and may carry ``x``/``y``; edges need ``from``,
    ``to`` and ``length`` (``id`` defaults to the list position).
    """
    try:
        vlist = spec["vertices"]
        elist = spec["edges"]
    except (KeyError, TypeError):
        raise GraphError("graph file needs 'vertices' and 'edges'") from None
    vertices = []
    for v in vlist:
        pos = None
        if "x" in v or "y" in v:
            pos = (float(v["x"]), float(v["y"]))
        vertices.append(Vertex(v["id"], pos))
    vindex = {v.id: i for i, v in enumerate(vertices)}
    edges = []
    for i, e in enumerate(elist):
        for key in ("from", "to"):
            if e.get(key) not in vindex:
                raise GraphError(f"edge {e.get('id', i)!r} references unknown vertex {e.get(key)!r}")
        edges.append(Edge(e.get("id", i), vindex[e["from"]], vindex[e["to"]], float(e["length"])))
    return _make(vertices, edges)


def from_edges(edges: Sequence[tuple], positions: Mapping | None = None) -> MetricGraph:
    """Shorthand: ``edges`` is a list of ``(tail, head, length)`` triples."""
    ids = []
    for t, h, _ in edges:
        for v in (t, h):
            if v not in ids:
                ids.append(v)
    positions = positions or {}
    verts = [{"id": v, **({"x": positions[v][0], "y": positions[v][1]} if v in positions else {})}
             for v in ids]
    return build_graph({"vertices": verts,
                        "edges": [{"id": i, "from": t, "to": h, "length": L}
                                  for i, (t, h, L) in enumerate(edges)]})


def total_length(g: MetricGraph) -> float:
    return float(sum(e.length for e in g.edges))


def edge_unit_vector(g: MetricGraph, b: DirectedBond | int) -> np.ndarray:
    """Unit vector pointing along bond ``b`` in the plane."""
    idx = b.index if isinstance(b, DirectedBond) else int(b)
    p0 = g.vertices[g.origin(idx)].pos
    p1 = g.vertices[g.terminus(idx)].pos
    if p0 is None or p1 is None:
        raise GraphError("edge direction needs vertex positions")
    d = np.subtract(p1, p0, dtype=float)
    norm = np.hypot(*d)
    if norm == 0:
        raise GraphError(f"bond {idx} has coincident endpoints")
    return d / norm


# common test graphs

def complete_graph(n: int, lengths: Sequence[float]) -> MetricGraph:
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if len(lengths) != len(pairs):
        raise GraphError(f"K{n} needs {len(pairs)} lengths")
    return from_edges([(i, j, L) for (i, j), L in zip(pairs, lengths)])


def single_edge(length: float, positions: bool = True) -> MetricGraph:
    pos = {0: (0.0, 0.0), 1: (length, 0.0)} if positions else None
    return from_edges([(0, 1, length)], pos)


def single_loop(length: float) -> MetricGraph:
    return from_edges([(0, 0, length)])


def star_graph(lengths: Sequence[float]) -> MetricGraph:
    return from_edges([(0, i + 1, L) for i, L in enumerate(lengths)])
