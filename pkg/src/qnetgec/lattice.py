"""Planar 2D network lattices, their dual (plaquette) graphs, and JSON interchange.

A network is a connected planar graph with an explicit straight-line embedding
on integer coordinates.  The rotation system (counter-clockwise cyclic order of
incident bonds at each node) is derived from the coordinates, and faces of any
surviving subgraph are enumerated by walking half-edges through that rotation
system, so plaquettes remain well defined after bonds have been removed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

GEOMETRIES = ("square", "triangular", "honeycomb", "custom")


class LatticeError(ValueError):
    """Invalid lattice parameters or an inconsistent embedding."""


class SchemaError(LatticeError):
    """Malformed or inconsistent lattice document."""


@dataclass(frozen=True, order=True)
class Node:
    id: int
    x: int
    y: int


@dataclass(frozen=True, order=True)
class Bond:
    u: int
    v: int
    m: int = 1  # edge multiplicity within the bond; metadata for distillation


@dataclass
class Network:
    """Immutable embedded network; construction validates and normalizes.

    Nodes are sorted by id, bonds are stored with u < v in lexicographic
    order, and the bond index in ``bonds`` is the edge id used everywhere
    else (dilution masks, error configs, dual boundary walks).
    """

    geometry: str
    L: int
    nodes: list[Node]
    bonds: list[Bond]

    def __post_init__(self) -> None:
        if self.geometry not in GEOMETRIES:
            raise LatticeError(f"unknown geometry {self.geometry!r}")
        self.nodes = sorted(self.nodes)
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise LatticeError("duplicate node ids")
        coords = {(n.x, n.y) for n in self.nodes}
        if len(coords) != len(self.nodes):
            raise LatticeError("two nodes share coordinates")
        id_set = set(ids)
        canon = []
        seen_pairs = set()
        for i, b in enumerate(self.bonds):
            if b.u not in id_set or b.v not in id_set:
                raise LatticeError(f"bonds[{i}]: unknown node id {b.u if b.u not in id_set else b.v}")
            if b.u == b.v:
                raise LatticeError(f"bonds[{i}]: self-loop at node {b.u}")
            if b.m < 1:
                raise LatticeError(f"bonds[{i}]: multiplicity {b.m} < 1")
            u, v = (b.u, b.v) if b.u < b.v else (b.v, b.u)
            if (u, v) in seen_pairs:
                raise LatticeError(f"bonds[{i}]: duplicate bond {u}-{v}")
            seen_pairs.add((u, v))
            canon.append(Bond(u, v, b.m))
        self.bonds = sorted(canon)
        self._check_connected()
        self.rotation  # force rotation-system validation

    def _check_connected(self) -> None:
        if not self.nodes:
            raise LatticeError("empty network")
        adj = self.adjacency
        start = self.nodes[0].id
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v, _ in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        if len(seen) != len(self.nodes):
            raise LatticeError("network is not connected")

    @cached_property
    def coords(self) -> dict[int, tuple[int, int]]:
        return {n.id: (n.x, n.y) for n in self.nodes}

    @cached_property
    def adjacency(self) -> dict[int, list[tuple[int, int]]]:
        """node id -> list of (neighbor id, bond index)."""
        adj: dict[int, list[tuple[int, int]]] = {n.id: [] for n in self.nodes}
        for e, b in enumerate(self.bonds):
            adj[b.u].append((b.v, e))
            adj[b.v].append((b.u, e))
        return adj

    @cached_property
    def rotation(self) -> dict[int, tuple[int, ...]]:
        """Counter-clockwise cyclic order of incident bond indices per node."""
        coords = self.coords
        rot: dict[int, tuple[int, ...]] = {}
        for nid, incident in self.adjacency.items():
            x0, y0 = coords[nid]
            dirs = set()
            for v, _ in incident:
                dx, dy = coords[v][0] - x0, coords[v][1] - y0
                g = math.gcd(abs(dx), abs(dy))
                if (dx // g, dy // g) in dirs:
                    raise LatticeError(f"inconsistent rotation system: collinear bonds at node {nid}")
                dirs.add((dx // g, dy // g))
            rot[nid] = tuple(
                e for _, e in sorted(
                    incident,
                    key=lambda ve: math.atan2(coords[ve[0]][1] - y0, coords[ve[0]][0] - x0),
                )
            )
        return rot

    @cached_property
    def bond_endpoints(self) -> np.ndarray:
        """(E, 2) int array of bond endpoint node ids."""
        return np.array([(b.u, b.v) for b in self.bonds], dtype=np.int64).reshape(-1, 2)

    @cached_property
    def node_pos(self) -> dict[int, int]:
        """node id -> dense index into ``nodes`` (ids need not be contiguous)."""
        return {n.id: i for i, n in enumerate(self.nodes)}

    @cached_property
    def bond_endpoint_pos(self) -> np.ndarray:
        """(E, 2) int array of bond endpoints as dense node indices."""
        pos = self.node_pos
        return np.array(
            [(pos[b.u], pos[b.v]) for b in self.bonds], dtype=np.int64
        ).reshape(-1, 2)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_bonds(self) -> int:
        return len(self.bonds)

    def other_end(self, bond_idx: int, nid: int) -> int:
        b = self.bonds[bond_idx]
        return b.v if nid == b.u else b.u


@dataclass
class DualGraph:
    """Faces of one connected surviving subgraph, exterior included.

    ``faces[f]`` is the ordered boundary walk of face ``f`` as bond indices
    of the parent network; a bridge bond appears twice in a single walk,
    every other surviving bond appears once in exactly two walks.
    """

    faces: list[list[int]]
    exterior: int
    edge_faces: dict[int, tuple[int, int]]
    bridges: frozenset[int]
    node_ids: tuple[int, ...]
    edge_ids: tuple[int, ...]

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def edge_index(self) -> dict[int, int]:
        """bond index -> dense position in ``edge_ids``."""
        return {e: i for i, e in enumerate(self.edge_ids)}

    @cached_property
    def parity_matrix(self) -> sp.csr_matrix:
        """(faces x surviving edges) 0/1 boundary incidence, bridges excluded.

        A bridge is walked twice by the same face so its parity contribution
        always cancels.
        """
        rows, cols = [], []
        idx = self.edge_index
        for e, (f1, f2) in self.edge_faces.items():
            if f1 == f2:
                continue
            rows.extend((f1, f2))
            cols.extend((idx[e], idx[e]))
        data = np.ones(len(rows), dtype=np.int64)
        return sp.csr_matrix(
            (data, (rows, cols)), shape=(self.n_faces, len(self.edge_ids))
        )

    @cached_property
    def face_adjacency(self) -> list[list[tuple[int, int]]]:
        """Per face: (neighbor face, crossed edge position); parallel dual
        edges kept, bridge self-loops dropped."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_faces)]
        idx = self.edge_index
        for e, (f1, f2) in self.edge_faces.items():
            if f1 == f2:
                continue
            adj[f1].append((f2, idx[e]))
            adj[f2].append((f1, idx[e]))
        return adj

    @cached_property
    def adjacency_matrix(self) -> sp.csr_matrix:
        """Simple (parallel edges collapsed) dual adjacency for BFS distances."""
        rows, cols = [], []
        for e, (f1, f2) in self.edge_faces.items():
            if f1 == f2:
                continue
            rows.extend((f1, f2))
            cols.extend((f2, f1))
        data = np.ones(len(rows), dtype=np.int8)
        mat = sp.csr_matrix((data, (rows, cols)), shape=(self.n_faces, self.n_faces))
        mat.data[:] = 1
        return mat


def build_lattice(geometry: str, L: int, m: int = 1) -> Network:
    """Construct a regular L x L network with unit-square coordinates.

    square:     full grid graph.
    triangular: grid plus the (x, y)-(x+1, y+1) diagonal in every unit cell.
    honeycomb:  brick-wall embedding (two-node basis): all horizontal bonds,
                vertical bonds only where x + y is even.
    """
    if geometry not in ("square", "triangular", "honeycomb"):
        raise LatticeError(f"no generator for geometry {geometry!r}")
    if L < 2:
        raise LatticeError(f"invalid size L={L}; need L >= 2")
    nid = lambda x, y: y * L + x
    nodes = [Node(nid(x, y), x, y) for y in range(L) for x in range(L)]
    bonds = []
    for y in range(L):
        for x in range(L):
            if x + 1 < L:
                bonds.append(Bond(nid(x, y), nid(x + 1, y), m))
            if y + 1 < L:
                if geometry != "honeycomb" or (x + y) % 2 == 0:
                    bonds.append(Bond(nid(x, y), nid(x, y + 1), m))
            if geometry == "triangular" and x + 1 < L and y + 1 < L:
                bonds.append(Bond(nid(x, y), nid(x + 1, y + 1), m))
    return Network(geometry, L, nodes, bonds)


def dual_of_subgraph(net: Network, surviving) -> DualGraph:
    """Enumerate the faces of the subgraph induced by ``surviving`` bond indices.

    The subgraph must be connected (restrict to one cluster first).  Faces are
    traced with the next-edge-after-reverse rule on the induced rotation
    system, which walks bounded faces clockwise and the exterior face
    counter-clockwise, so the exterior is the walk of largest signed area
    (a spanning tree has a single face of area zero).
    """
    surviving = sorted(set(int(e) for e in surviving))
    if not surviving:
        raise LatticeError("empty surviving bond set")
    node_set: set[int] = set()
    for e in surviving:
        b = net.bonds[e]
        node_set.update((b.u, b.v))

    surv_set = set(surviving)
    rot = {
        nid: tuple(e for e in net.rotation[nid] if e in surv_set)
        for nid in node_set
    }

    # connectivity over surviving bonds only
    start = next(iter(node_set))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for e in rot[u]:
            v = net.other_end(e, u)
            if v not in seen:
                seen.add(v)
                stack.append(v)
    if seen != node_set:
        raise LatticeError(
            "surviving bonds induce a disconnected subgraph; "
            "restrict to a single cluster before taking the dual"
        )

    # half-edge successor walk: after arriving at v along e, leave along the
    # counter-clockwise successor of e at v
    pos = {(nid, e): i for nid in node_set for i, e in enumerate(rot[nid])}
    coords = net.coords
    visited: set[tuple[int, int]] = set()
    faces: list[list[int]] = []
    areas2: list[int] = []
    edge_faces: dict[int, list[int]] = {e: [] for e in surviving}
    for nid in sorted(node_set):
        for e0 in rot[nid]:
            if (nid, e0) in visited:
                continue
            walk: list[int] = []
            area2 = 0
            u, e = nid, e0
            while (u, e) not in visited:
                visited.add((u, e))
                walk.append(e)
                v = net.other_end(e, u)
                (x0, y0), (x1, y1) = coords[u], coords[v]
                area2 += x0 * y1 - x1 * y0
                order = rot[v]
                e = order[(pos[(v, e)] + 1) % len(order)]
                u = v
            fid = len(faces)
            faces.append(walk)
            areas2.append(area2)
            for e_w in walk:
                edge_faces[e_w].append(fid)

    n_nodes, n_edges = len(node_set), len(surviving)
    if len(faces) != n_edges - n_nodes + 2:
        raise LatticeError(
            f"face traversal violates Euler's formula "
            f"({len(faces)} faces, {n_edges} edges, {n_nodes} nodes); "
            "the embedding is not planar-consistent"
        )
    exterior = int(np.argmax(areas2))

    pairs: dict[int, tuple[int, int]] = {}
    bridges = set()
    for e, fs in edge_faces.items():
        if len(fs) != 2:
            raise LatticeError(f"edge {e} bordered {len(fs)} times")  # pragma: no cover
        pairs[e] = (fs[0], fs[1]) if fs[0] <= fs[1] else (fs[1], fs[0])
        if fs[0] == fs[1]:
            bridges.add(e)

    return DualGraph(
        faces=faces,
        exterior=exterior,
        edge_faces=pairs,
        bridges=frozenset(bridges),
        node_ids=tuple(sorted(node_set)),
        edge_ids=tuple(surviving),
    )


def serialize(net: Network) -> str:
    """Render a network as the JSON interchange document (deterministic bytes)."""
    doc = {
        "geometry": net.geometry,
        "L": net.L,
        "nodes": [{"id": n.id, "x": n.x, "y": n.y} for n in net.nodes],
        "bonds": [{"u": b.u, "v": b.v, "m": b.m} for b in net.bonds],
    }
    return json.dumps(doc, indent=2) + "\n"


def deserialize(text: str) -> Network:
    """Parse the JSON interchange document; rotation is recomputed from coordinates."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("document root must be an object")
    for key in ("geometry", "L", "nodes", "bonds"):
        if key not in doc:
            raise SchemaError(f"missing key {key!r}")
    geometry, L = doc["geometry"], doc["L"]
    if not isinstance(geometry, str) or geometry not in GEOMETRIES:
        raise SchemaError(f"geometry: expected one of {GEOMETRIES}, got {geometry!r}")
    if not isinstance(L, int) or isinstance(L, bool):
        raise SchemaError("L: expected integer")
    nodes = []
    for i, rec in enumerate(doc["nodes"]):
        try:
            nodes.append(Node(int(rec["id"]), int(rec["x"]), int(rec["y"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"nodes[{i}]: {exc}") from exc
    bonds = []
    for i, rec in enumerate(doc["bonds"]):
        try:
            bonds.append(Bond(int(rec["u"]), int(rec["v"]), int(rec.get("m", 1))))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"bonds[{i}]: {exc}") from exc
    try:
        return Network(geometry, L, nodes, bonds)
    except SchemaError:
        raise
    except LatticeError as exc:
        raise SchemaError(str(exc)) from exc
