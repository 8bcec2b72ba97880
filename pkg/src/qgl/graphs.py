"""Metric graphs: vertices, oriented edges with lengths, distance, and balls.

Edges are real intervals glued at vertices; a point of the graph is either a
vertex or an (edge, arclength offset) pair.  The arclength coordinate of an
edge runs from its source vertex (offset 0) to its target vertex (offset
``length``).  Graphs are immutable after construction and safe to share
between threads; all queries are pure.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

from .errors import (
    BadParamsError,
    DisconnectedError,
    DuplicateEdgeError,
    LoopEdgeError,
    NonPositiveLengthError,
    UnknownVertexError,
)

import math


@dataclass(frozen=True)
class Edge:
    """Oriented edge of positive finite length between two distinct vertices."""

    id: int
    src: int
    dst: int
    length: float


@dataclass(frozen=True)
class Point:
    """A location on a metric graph: a vertex, or an interior edge point.

    Exactly one of ``vertex`` / ``edge`` is set.  Interior points carry the
    arclength ``offset`` from the edge source.  Offsets 0 and ``length`` are
    canonicalized to the vertex form by ``MetricGraph.point``.
    """

    vertex: int | None = None
    edge: int | None = None
    offset: float = 0.0

    @staticmethod
    def at_vertex(v: int) -> "Point":
        return Point(vertex=v)

    def __str__(self) -> str:
        if self.vertex is not None:
            return f"vertex {self.vertex}"
        return f"edge {self.edge} offset {float(self.offset)!r}"


@dataclass(frozen=True)
class DegreeInfo:
    """In/out/total degree of a vertex (in = edges arriving, out = leaving)."""

    deg_in: int
    deg_out: int

    @property
    def deg(self) -> int:
        return self.deg_in + self.deg_out


class MetricGraph:
    """Connected loop-free metric graph with a distinguished root vertex.

    Built through :func:`build_graph`, which validates all invariants.
    ``boundary`` marks the cut vertices of a finite truncation of a larger
    graph; generators fill it with the pendant vertices farthest from the
    root.
    """

    def __init__(self, vertices, edges, root, boundary=()):
        self.vertices: tuple[int, ...] = tuple(vertices)
        self.edges: tuple[Edge, ...] = tuple(edges)
        self.root: int = root
        self.boundary: tuple[int, ...] = tuple(boundary)
        self._vertex_set = frozenset(self.vertices)
        self._edge_by_id = {e.id: e for e in self.edges}
        adj: dict[int, list[tuple[int, float]]] = {v: [] for v in self.vertices}
        for e in self.edges:
            adj[e.src].append((e.dst, e.length))
            adj[e.dst].append((e.src, e.length))
        for v in adj:
            adj[v].sort()
        self._adjacency = adj
        self._dist_maps: dict[int, dict[int, float]] = {}

    # -- basic queries ---------------------------------------------------

    def edge(self, edge_id: int) -> Edge:
        try:
            return self._edge_by_id[edge_id]
        except KeyError:
            raise UnknownVertexError(f"edge id {edge_id} not in graph") from None

    def has_vertex(self, v: int) -> bool:
        return v in self._vertex_set

    def total_length(self) -> float:
        return float(sum(e.length for e in self.edges))

    def point(self, edge_id: int, offset: float) -> Point:
        """Canonical point on an edge; endpoint offsets collapse to vertices."""
        e = self.edge(edge_id)
        if not -1e-12 <= offset <= e.length + 1e-12:
            raise BadParamsError(
                f"offset {offset} outside [0, {e.length}] on edge {edge_id}"
            )
        if offset <= 0.0:
            return Point.at_vertex(e.src)
        if offset >= e.length:
            return Point.at_vertex(e.dst)
        return Point(edge=edge_id, offset=float(offset))

    # -- distances -------------------------------------------------------

    def vertex_distances(self, source: int) -> dict[int, float]:
        """Shortest-path distance from ``source`` to every vertex.

        Label-setting (Dijkstra) search; ties between equal keys resolve to
        the lowest vertex id, which keeps results reproducible.  Maps are
        cached per source on the immutable graph.
        """
        if source not in self._vertex_set:
            raise UnknownVertexError(f"vertex {source} not in graph")
        cached = self._dist_maps.get(source)
        if cached is not None:
            return cached
        dist = {source: 0.0}
        done: set[int] = set()
        heap = [(0.0, source)]
        while heap:
            d, v = heapq.heappop(heap)
            if v in done:
                continue
            done.add(v)
            for w, length in self._adjacency[v]:
                nd = d + length
                if w not in dist or nd < dist[w]:
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
        self._dist_maps[source] = dist
        return dist

    def _point_vertex_distance(self, p: Point, v: int) -> float:
        if p.vertex is not None:
            return self.vertex_distances(p.vertex)[v]
        e = self.edge(p.edge)
        dv = self.vertex_distances(v)
        return min(dv[e.src] + p.offset, dv[e.dst] + (e.length - p.offset))

    def distance(self, x: Point, y: Point) -> float:
        """Shortest-path distance between two points of the graph.

        For two interior points of one edge the direct within-edge route is
        compared against the routes through either endpoint, which can win
        on cycles.
        """
        if x.vertex is not None:
            return self._point_vertex_distance(y, x.vertex)
        if y.vertex is not None:
            return self._point_vertex_distance(x, y.vertex)
        ex, ey = self.edge(x.edge), self.edge(y.edge)
        dsrc = self.vertex_distances(ex.src)
        ddst = self.vertex_distances(ex.dst)
        best = min(
            x.offset + dsrc[ey.src] + y.offset,
            x.offset + dsrc[ey.dst] + (ey.length - y.offset),
            (ex.length - x.offset) + ddst[ey.src] + y.offset,
            (ex.length - x.offset) + ddst[ey.dst] + (ey.length - y.offset),
        )
        if x.edge == y.edge:
            best = min(best, abs(x.offset - y.offset))
        return best

    def edge_kink(self, edge_id: int, source: int | None = None) -> float | None:
        """Offset where the distance-to-``source`` slope flips on this edge.

        Returns None when the distance is monotone along the whole edge
        (always the case on trees for edges pointing away from the source).
        """
        e = self.edge(edge_id)
        dv = self.vertex_distances(self.root if source is None else source)
        s_star = 0.5 * (e.length + dv[e.dst] - dv[e.src])
        if s_star <= 1e-12 or s_star >= e.length - 1e-12:
            return None
        return s_star

    def ball_measure(self, radius: float, center: int | None = None) -> float:
        """Total edge length lying within ``radius`` of a center vertex."""
        if radius <= 0:
            raise BadParamsError("ball radius must be positive")
        dv = self.vertex_distances(self.root if center is None else center)
        total = 0.0
        for e in self.edges:
            a = min(max(radius - dv[e.src], 0.0), e.length)
            b = min(max(radius - dv[e.dst], 0.0), e.length)
            total += min(a + b, e.length)
        return total


def build_graph(vertices, edges, root, boundary=()) -> MetricGraph:
    """Validate and build a metric graph.

    Parameters
    ----------
    vertices : iterable of int
        Declared vertex ids (unique, non-negative).
    edges : iterable
        Either :class:`Edge` objects or ``(id, src, dst, length)`` tuples.
    root : int
        Reference vertex used as the center of balls and distance profiles.
    boundary : iterable of int, optional
        Marked truncation vertices.

    Raises
    ------
    LoopEdgeError, NonPositiveLengthError, DuplicateEdgeError,
    UnknownVertexError, DisconnectedError, BadParamsError
        Each error message names the offending element.
    """
    vertex_list = [int(v) for v in vertices]
    if len(set(vertex_list)) != len(vertex_list):
        dup = sorted(v for v in set(vertex_list) if vertex_list.count(v) > 1)
        raise BadParamsError(f"duplicate vertex ids {dup}")
    vertex_set = set(vertex_list)
    if root not in vertex_set:
        raise UnknownVertexError(f"root vertex {root} not declared")
    for b in boundary:
        if b not in vertex_set:
            raise UnknownVertexError(f"boundary vertex {b} not declared")

    edge_objs: list[Edge] = []
    for raw in edges:
        e = raw if isinstance(raw, Edge) else Edge(*raw)
        e = Edge(int(e.id), int(e.src), int(e.dst), float(e.length))
        edge_objs.append(e)
    if not edge_objs:
        raise BadParamsError("a metric graph needs at least one edge")
    seen_ids: set[int] = set()
    seen_pairs: set[frozenset[int]] = set()
    for e in edge_objs:
        if e.id in seen_ids:
            raise BadParamsError(f"duplicate edge id {e.id}")
        seen_ids.add(e.id)
        if e.src not in vertex_set:
            raise UnknownVertexError(f"edge {e.id} references unknown vertex {e.src}")
        if e.dst not in vertex_set:
            raise UnknownVertexError(f"edge {e.id} references unknown vertex {e.dst}")
        if e.src == e.dst:
            raise LoopEdgeError(f"edge {e.id} is a loop at vertex {e.src}")
        if not (e.length > 0.0 and math.isfinite(e.length)):
            raise NonPositiveLengthError(
                f"edge {e.id} has non-positive or infinite length {e.length}"
            )
        pair = frozenset((e.src, e.dst))
        if pair in seen_pairs:
            raise DuplicateEdgeError(
                f"edge {e.id} duplicates the connection {e.src}-{e.dst}"
            )
        seen_pairs.add(pair)

    graph = MetricGraph(vertex_list, edge_objs, int(root), boundary)
    reached = set(graph.vertex_distances(graph.root))
    if reached != vertex_set:
        missing = sorted(vertex_set - reached)
        raise DisconnectedError(f"vertices {missing} unreachable from root {root}")
    return graph


def degree(graph: MetricGraph, v: int) -> DegreeInfo:
    """Count edges arriving at / leaving ``v``."""
    if not graph.has_vertex(v):
        raise UnknownVertexError(f"vertex {v} not in graph")
    deg_in = sum(1 for e in graph.edges if e.dst == v)
    deg_out = sum(1 for e in graph.edges if e.src == v)
    return DegreeInfo(deg_in=deg_in, deg_out=deg_out)


def check_degree_condition(graph: MetricGraph) -> tuple[bool, list[int]]:
    """Does every vertex have at least as many leaving as arriving edges?

    Pendant vertices at the end of an edge pointing toward them always
    violate the condition; violations are reported verbatim and left to the
    experiment author to interpret.
    """
    violators = [
        v for v in sorted(graph.vertices)
        if (d := degree(graph, v)).deg_in > d.deg_out
    ]
    return (not violators, violators)


def distance(graph: MetricGraph, x: Point, y: Point) -> float:
    return graph.distance(x, y)


def ball_indicator(graph: MetricGraph, x0: Point, radius: float, x: Point) -> bool:
    """True iff ``x`` lies in the open ball of ``radius`` around ``x0``."""
    if radius <= 0:
        raise BadParamsError("ball radius must be positive")
    return graph.distance(x0, x) < radius


# -- generators ----------------------------------------------------------


def path_graph(n_edges: int, length: float) -> MetricGraph:
    """Chain of ``n_edges`` edges of equal length, rooted at one end."""
    if n_edges < 1:
        raise BadParamsError(f"path needs at least one edge, got {n_edges}")
    _require_positive_length(length)
    edges = [Edge(i, i, i + 1, length) for i in range(n_edges)]
    return build_graph(range(n_edges + 1), edges, root=0, boundary=(n_edges,))


def star_graph(arms: int, length: float) -> MetricGraph:
    """``arms`` edges of equal length leaving a central root vertex."""
    if arms < 1:
        raise BadParamsError(f"star needs at least one arm, got {arms}")
    _require_positive_length(length)
    edges = [Edge(i, 0, i + 1, length) for i in range(arms)]
    return build_graph(range(arms + 1), edges, root=0,
                       boundary=tuple(range(1, arms + 1)))


def binary_tree(depth: int, length: float) -> MetricGraph:
    """Full binary tree of the given depth, edges pointing away from the root."""
    if depth < 1:
        raise BadParamsError(f"binary tree needs depth >= 1, got {depth}")
    _require_positive_length(length)
    n_vertices = 2 ** (depth + 1) - 1
    edges = [Edge(v - 1, (v - 1) // 2, v, length) for v in range(1, n_vertices)]
    leaves = tuple(range(2 ** depth - 1, n_vertices))
    return build_graph(range(n_vertices), edges, root=0, boundary=leaves)


def truncated_ray(radius: float, length: float) -> MetricGraph:
    """Chain long enough to contain the ball of twice the given radius.

    Finite stand-in for a half-infinite ray: cutoff machinery supported in
    the double ball never sees the far end, which is the marked boundary.
    """
    if radius <= 0:
        raise BadParamsError(f"ray radius must be positive, got {radius}")
    _require_positive_length(length)
    n_edges = max(1, math.ceil(2.0 * radius / length - 1e-9))
    return path_graph(n_edges, length)


_FAMILIES = {
    "path": (path_graph, ("edges", "length")),
    "star": (star_graph, ("arms", "length")),
    "binary_tree": (binary_tree, ("depth", "length")),
    "truncated_ray": (truncated_ray, ("radius", "length")),
}


def generate(family: str, params: dict) -> MetricGraph:
    """Build one of the named test families from a parameter mapping."""
    if family not in _FAMILIES:
        raise BadParamsError(
            f"unknown graph family {family!r}; choose from {sorted(_FAMILIES)}"
        )
    fn, names = _FAMILIES[family]
    try:
        args = [params[name] for name in names]
    except KeyError as exc:
        raise BadParamsError(f"family {family!r} needs parameter {exc.args[0]!r}") from None
    extra = set(params) - set(names)
    if extra:
        raise BadParamsError(f"family {family!r} got unknown parameters {sorted(extra)}")
    return fn(*args)


def _require_positive_length(length: float) -> None:
    if not (length > 0 and math.isfinite(length)):
        raise BadParamsError(f"edge length must be positive and finite, got {length}")


# -- file format ----------------------------------------------------------


def save_graph(graph: MetricGraph, path) -> None:
    """Write the JSON graph format (vertices, edges, root, boundary)."""
    payload = {
        "vertices": list(graph.vertices),
        "edges": [
            {"id": e.id, "from": e.src, "to": e.dst, "length": e.length}
            for e in graph.edges
        ],
        "root": graph.root,
    }
    if graph.boundary:
        payload["boundary"] = list(graph.boundary)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_graph(path) -> MetricGraph:
    """Read a graph written by :func:`save_graph`; validates on load."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        edges = [
            Edge(int(e["id"]), int(e["from"]), int(e["to"]), float(e["length"]))
            for e in payload["edges"]
        ]
        vertices = payload["vertices"]
        root = payload["root"]
    except (KeyError, TypeError) as exc:
        raise BadParamsError(f"malformed graph file {path}: {exc}") from None
    return build_graph(vertices, edges, root, payload.get("boundary", ()))
