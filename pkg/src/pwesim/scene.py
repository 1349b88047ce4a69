"""Scene container and the LoS visibility graph with BFS shortest paths.

Vertices are ordered deterministically: transmitter first, then RIS units by
ascending id, then receiver antennas by index. An edge exists iff the open
segment between the two vertex positions crosses no wall outside a declared
opening. Adjacency rows are computed lazily (vectorized over all endpoints)
and cached, so large scenes stay tractable.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .geometry import AntennaArray, segments_clear_batch


class SceneError(Exception):
    """The scene cannot support routing (e.g. transmitter sees no RIS)."""


TX = "tx"
RIS = "ris"
ANT = "ant"


@dataclass(frozen=True)
class Vertex:
    kind: str          # TX, RIS or ANT
    ref: int           # RIS id or antenna index; 0 for the transmitter
    position: np.ndarray


@dataclass
class Scene:
    walls: list
    openings: list
    ris_units: list
    tx: np.ndarray
    rx: AntennaArray

    def __post_init__(self):
        self.tx = np.asarray(self.tx, dtype=float)
        by_wall = {w.id: w for w in self.walls}
        for ris in self.ris_units:
            wall = by_wall[ris.wall_id]
            if abs(float(np.dot(ris.center - wall.p0, wall.n))) > 1e-9:
                raise SceneError(f"RIS {ris.id} center is off its host wall")


class PweGraph:
    """Immutable LoS graph over a scene; adjacency rows cached per vertex."""

    def __init__(self, scene):
        self.scene = scene
        verts = [Vertex(TX, 0, scene.tx)]
        for ris in sorted(scene.ris_units, key=lambda r: r.id):
            verts.append(Vertex(RIS, ris.id, np.asarray(ris.center, dtype=float)))
        for i, pos in enumerate(scene.rx.antennas):
            verts.append(Vertex(ANT, i, np.asarray(pos, dtype=float)))
        self.vertices = verts
        self.positions = np.array([v.position for v in verts])
        self.n_ris = len(scene.ris_units)
        self._ris_vertex = {v.ref: i for i, v in enumerate(verts) if v.kind == RIS}
        self._rows = {}

    # -- vertex bookkeeping -------------------------------------------------

    @property
    def vertex_count(self):
        return len(self.vertices)

    @property
    def tx_vertex(self):
        return 0

    def ris_vertex(self, ris_id):
        return self._ris_vertex[ris_id]

    def antenna_vertex(self, index):
        return 1 + self.n_ris + index

    @property
    def antenna_vertices(self):
        return range(1 + self.n_ris, self.vertex_count)

    # -- adjacency ----------------------------------------------------------

    def row(self, v):
        """Boolean adjacency row of vertex v (cached)."""
        cached = self._rows.get(v)
        if cached is None:
            cached = segments_clear_batch(self.positions[v], self.positions,
                                          self.scene.walls, self.scene.openings)
            cached[v] = False
            cached.setflags(write=False)
            self._rows[v] = cached
        return cached

    def has_edge(self, u, v):
        if u == v:
            return False
        cached = self._rows.get(u)
        if cached is None:
            cached = self._rows.get(v)
            u, v = v, u
        if cached is not None:
            return bool(cached[v])
        return bool(segments_clear_batch(self.positions[u],
                                         self.positions[v][None, :],
                                         self.scene.walls, self.scene.openings)[0])

    def adjacent_mask(self, v, mask):
        """Adjacency of v restricted to vertices flagged in `mask`."""
        cached = self._rows.get(v)
        if cached is not None:
            return cached & mask
        out = np.zeros(self.vertex_count, dtype=bool)
        idx = np.flatnonzero(mask)
        idx = idx[idx != v]
        if idx.size:
            out[idx] = segments_clear_batch(self.positions[v], self.positions[idx],
                                            self.scene.walls, self.scene.openings)
        return out

    def neighbors(self, v):
        """Neighbor indices of v in ascending order."""
        return np.flatnonzero(self.row(v))

    def edges(self):
        """Full edge set as sorted (u, v) pairs with u < v. O(V^2) segment tests."""
        out = set()
        for u in range(self.vertex_count):
            for v in np.flatnonzero(self.row(u)):
                v = int(v)
                if u < v:
                    out.add((u, v))
        return out

    @property
    def e_u(self):
        """Antenna-RIS edges."""
        out = set()
        for a in self.antenna_vertices:
            row = self.row(a)
            for v in np.flatnonzero(row[1:1 + self.n_ris]) + 1:
                out.add((int(v), a))
        return out

    @property
    def e_t(self):
        """Transmitter-RIS edges."""
        row = self.row(self.tx_vertex)
        return {(0, int(v)) for v in np.flatnonzero(row[1:1 + self.n_ris]) + 1}


def build_graph(scene):
    """Build the LoS graph; fault if the transmitter sees no RIS unit."""
    graph = PweGraph(scene)
    if scene.ris_units and not graph.e_t:
        raise SceneError("transmitter has no LoS to any RIS unit")
    if not scene.ris_units:
        raise SceneError("scene contains no RIS units")
    # warm the antenna rows so e_u reflects construction-time geometry
    for a in graph.antenna_vertices:
        graph.row(a)
    return graph


class SimpleGraph:
    """Explicit adjacency-set graph for tests and ad-hoc path queries."""

    def __init__(self, n, edges):
        self.vertex_count = n
        self._adj = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError("self loops not allowed")
            self._adj[u].add(v)
            self._adj[v].add(u)

    def neighbors(self, v):
        return sorted(self._adj[v])

    def has_edge(self, u, v):
        return v in self._adj[u]


def bfs_shortest_path(graph, source, target, banned=()):
    """Minimum-hop path from source to target avoiding banned vertices.

    Neighbors are expanded in ascending vertex order, so ties resolve
    deterministically. Returns the vertex list or None when unreachable.
    """
    if source == target:
        raise ValueError("source and target must differ")
    banned = set(banned)
    if source in banned or target in banned:
        raise ValueError("source and target must not be banned")
    parent = {source: None}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        # target adjacency is checked at dequeue time: the first dequeued
        # vertex adjacent to the target is exactly the BFS parent the
        # ascending expansion order would pick, and this avoids computing
        # full adjacency rows past the target's depth.
        if graph.has_edge(u, target):
            path = [target, u]
            while parent[u] is not None:
                u = parent[u]
                path.append(u)
            path.reverse()
            return path
        for v in graph.neighbors(u):
            v = int(v)
            if v in parent or v in banned or v == target:
                continue
            parent[v] = u
            queue.append(v)
    return None
