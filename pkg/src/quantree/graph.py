"""Metric tree graphs, sheaf detection and reduction after peeling.

Every edge carries an orientation: x = 0 sits at endpoint ``a`` and
x = L at endpoint ``b``.  Vertex *index* means position in
``TreeGraph.vertices``; it drives the deterministic sheaf tie-break.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable

import numpy as np

from .errors import (
    CycleDetected,
    DegenerateSheaf,
    Disconnected,
    InputError,
    NoInternalVertex,
    NonPositiveLength,
    SheafMismatch,
    TooFewLeaves,
)
from .potentials import Potential

DEFAULT_GRID = 2001


@dataclass(frozen=True)
class Edge:
    index: Hashable
    a: Hashable
    b: Hashable
    length: float

    def other(self, v):
        if v == self.a:
            return self.b
        if v == self.b:
            return self.a
        raise SheafMismatch(f"vertex {v!r} is not an endpoint of edge {self.index!r}")


@dataclass(frozen=True)
class TreeGraph:
    vertices: tuple
    edges: tuple
    leaves: tuple

    @cached_property
    def vertex_index(self) -> dict:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def edge_map(self) -> dict:
        return {e.index: e for e in self.edges}

    @cached_property
    def incident(self) -> dict:
        adj = {v: [] for v in self.vertices}
        for e in self.edges:
            adj.setdefault(e.a, []).append(e.index)
            adj.setdefault(e.b, []).append(e.index)
        return adj

    def degree(self, v) -> int:
        return len(self.incident[v])

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def m(self) -> int:
        return len(self.leaves)

    def leaf_edge(self, leaf):
        (eid,) = self.incident[leaf]
        return self.edge_map[eid]

    def is_leaf_edge(self, eid) -> bool:
        e = self.edge_map[eid]
        return self.degree(e.a) == 1 or self.degree(e.b) == 1

    @property
    def internal_vertices(self) -> list:
        return [v for v in self.vertices if self.degree(v) > 1]


def validate_tree(graph: TreeGraph) -> TreeGraph:
    """Check the tree invariants; return the graph unchanged if they hold."""
    verts = list(graph.vertices)
    if len(set(verts)) != len(verts):
        raise InputError("duplicate vertex ids")
    vset = set(verts)
    seen_ids = set()
    for e in graph.edges:
        if e.index in seen_ids:
            raise InputError(f"duplicate edge id {e.index!r}")
        seen_ids.add(e.index)
        if e.a not in vset or e.b not in vset:
            raise InputError(f"edge {e.index!r} references an unknown vertex")
        if e.a == e.b:
            raise CycleDetected(f"edge {e.index!r} is a loop at vertex {e.a!r}")
        if not (isinstance(e.length, (int, float)) and math.isfinite(e.length) and e.length > 0):
            raise NonPositiveLength(f"edge {e.index!r} has length {e.length!r}")

    cycle = _find_cycle(graph)
    if cycle:
        raise CycleDetected(cycle)
    reached = _reachable(graph, verts[0]) if verts else set()
    if len(reached) != len(verts):
        missing = [v for v in verts if v not in reached]
        raise Disconnected(f"vertices not reachable from {verts[0]!r}: {missing!r}")

    degree_one = [v for v in verts if graph.degree(v) == 1]
    if len(degree_one) < 2:
        raise TooFewLeaves(f"a tree needs at least 2 leaves, found {len(degree_one)}")
    if len(graph.leaves) != len(degree_one) or set(graph.leaves) != set(degree_one):
        bad = sorted(set(graph.leaves) ^ set(degree_one), key=repr)
        raise InputError(f"leaf order must list exactly the degree-1 vertices; mismatch at {bad!r}")
    return graph


def _reachable(graph: TreeGraph, start) -> set:
    reached = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for eid in graph.incident[v]:
            w = graph.edge_map[eid].other(v)
            if w not in reached:
                reached.add(w)
                queue.append(w)
    return reached


def _find_cycle(graph: TreeGraph) -> str | None:
    parent = {}
    for root in graph.vertices:
        if root in parent:
            continue
        parent[root] = (None, None)
        stack = [root]
        while stack:
            v = stack.pop()
            for eid in graph.incident[v]:
                if eid == parent[v][1]:
                    continue
                w = graph.edge_map[eid].other(v)
                if w in parent:
                    return f"cycle through edge {eid!r} ({v!r}-{w!r})"
                parent[w] = (v, eid)
                stack.append(w)
    return None


@dataclass(frozen=True)
class Sheaf:
    abscission: Hashable
    leaf_edges: tuple
    leaves: tuple
    stem_edge: Hashable | None

    @property
    def m1(self) -> int:
        return len(self.leaf_edges)


@dataclass(frozen=True)
class StarTerminal:
    center: Hashable
    leaf_edges: tuple
    leaves: tuple

    @property
    def m1(self) -> int:
        return len(self.leaf_edges)


def _leaf_edges_at(graph: TreeGraph, v) -> tuple[list, list]:
    leaves, edges = [], []
    order = {leaf: i for i, leaf in enumerate(graph.leaves)}
    for eid in graph.incident[v]:
        w = graph.edge_map[eid].other(v)
        if graph.degree(w) == 1:
            leaves.append(w)
            edges.append(eid)
    idx = sorted(range(len(leaves)), key=lambda i: order[leaves[i]])
    return [leaves[i] for i in idx], [edges[i] for i in idx]


def find_sheaf(graph: TreeGraph) -> Sheaf | StarTerminal:
    """Return the sheaf to peel next, or StarTerminal when one vertex remains.

    Candidates are internal vertices with at most one non-leaf edge; the one
    with the smallest vertex index wins among those with at least two leaf
    edges.  A vertex with a single leaf edge is returned only when no other
    candidate exists (the tree then has a degree-2 chain).
    """
    internal = graph.internal_vertices
    if not internal:
        raise NoInternalVertex("single-edge graph has no internal vertex")
    if len(internal) == 1:
        v = internal[0]
        leaves, edges = _leaf_edges_at(graph, v)
        return StarTerminal(v, tuple(edges), tuple(leaves))
    fallback = None
    for v in sorted(internal, key=graph.vertex_index.__getitem__):
        leaves, edges = _leaf_edges_at(graph, v)
        stems = [eid for eid in graph.incident[v] if eid not in edges]
        if len(stems) != 1:
            continue
        sheaf = Sheaf(v, tuple(edges), tuple(leaves), stems[0])
        if sheaf.m1 >= 2:
            return sheaf
        if fallback is None:
            fallback = sheaf
    return fallback


def require_solvable(sheaf: Sheaf | StarTerminal) -> None:
    if isinstance(sheaf, Sheaf) and sheaf.m1 < 2:
        raise DegenerateSheaf(
            f"vertex {sheaf.abscission!r} carries a single leaf edge; "
            "the local inverse problem needs at least two"
        )


def reduce(graph: TreeGraph, sheaf: Sheaf) -> TreeGraph:
    """Remove the sheaf's leaf edges; the abscission vertex becomes leaf 0."""
    v0 = sheaf.abscission
    if v0 not in graph.vertex_index:
        raise SheafMismatch(f"abscission vertex {v0!r} not in graph")
    leaves, edges = _leaf_edges_at(graph, v0)
    if set(edges) != set(sheaf.leaf_edges) or sheaf.stem_edge not in graph.incident[v0]:
        raise SheafMismatch(f"sheaf at {v0!r} does not match the graph")
    removed_v = set(sheaf.leaves)
    removed_e = set(sheaf.leaf_edges)
    return TreeGraph(
        vertices=tuple(v for v in graph.vertices if v not in removed_v),
        edges=tuple(e for e in graph.edges if e.index not in removed_e),
        leaves=(v0,) + tuple(v for v in graph.leaves if v not in removed_v),
    )


@dataclass(frozen=True)
class EdgeData:
    """Potential on one edge; x = 0 sits at vertex ``origin``."""

    index: Hashable
    length: float
    q: Potential
    origin: Hashable
    grid_points: int = DEFAULT_GRID
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.grid_points)

    @property
    def samples(self) -> np.ndarray:
        return self.q(self.x)

    def oriented_from(self, vertex, edge: Edge) -> "EdgeData":
        """The same edge data with x = 0 moved to ``vertex``."""
        if vertex == self.origin:
            return self
        if vertex != edge.other(self.origin):
            raise SheafMismatch(f"vertex {vertex!r} is not an endpoint of edge {self.index!r}")
        return EdgeData(self.index, self.length, self.q.reflected(self.length), vertex, self.grid_points)


def orient_leaf_edges(graph: TreeGraph, edge_data: dict) -> tuple[TreeGraph, dict]:
    """Flip leaf edges (and their potentials) so every leaf sits at x = 0."""
    new_edges, new_data = [], dict(edge_data)
    for e in graph.edges:
        if graph.degree(e.b) == 1 and graph.degree(e.a) != 1:
            e = Edge(e.index, e.b, e.a, e.length)
            if e.index in new_data:
                new_data[e.index] = new_data[e.index].oriented_from(e.a, e)
        new_edges.append(e)
    return TreeGraph(graph.vertices, tuple(new_edges), graph.leaves), new_data


def random_tree(rng: np.random.Generator, n_edges: int, allow_degree_two: bool = True) -> TreeGraph:
    """Random tree by attaching each new vertex to a uniformly chosen old one.

    With ``allow_degree_two=False`` degree-2 vertices are repaired by hanging
    an extra leaf on them, so the result may have slightly more edges.
    """
    parents = [None] + [int(rng.integers(0, k)) for k in range(1, n_edges + 1)]
    edges = [(parents[k], k) for k in range(1, n_edges + 1)]
    n_vert = n_edges + 1
    if not allow_degree_two:
        deg = np.zeros(n_vert, dtype=int)
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        for v in range(n_vert):
            if deg[v] == 2:
                edges.append((v, n_vert))
                n_vert += 1
    lengths = rng.uniform(0.5, 1.5, size=len(edges))
    deg = np.zeros(n_vert, dtype=int)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    verts = tuple(range(n_vert))
    es = []
    for k, ((a, b), L) in enumerate(zip(edges, lengths)):
        if deg[b] == 1:
            a, b = b, a
        es.append(Edge(k, a, b, float(L)))
    leaves = tuple(v for v in verts if deg[v] == 1)
    return TreeGraph(verts, tuple(es), leaves)
