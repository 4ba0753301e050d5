"""The truncated saddle connection graph: disjointness edges, BFS distance,
triangle witnesses, export."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from .connections import enumerate_connections, intersections
from .errors import (
    NotPairwiseDisjoint,
    UnknownFormat,
    UnknownVertex,
)
from .triangulate import complete_triangulation


class SCGraph:
    """Graph on saddle connections of squared length <= L2; edges join
    interior-disjoint pairs.  Distances here upper-bound the distance in the
    full (infinite) graph: removing vertices cannot shorten paths."""

    def __init__(self, surface, L2, vertices, edges):
        self.surface = surface
        self.L2 = L2
        self.vertices = dict(vertices)  # id -> SaddleConnection
        self.edges = set(edges)         # (id1, id2) with id1 < id2
        self.adj = {v: set() for v in self.vertices}
        for a, b in self.edges:
            self.adj[a].add(b)
            self.adj[b].add(a)

    def edge_count(self):
        return len(self.edges)

    def has_edge(self, a, b):
        return (min(a, b), max(a, b)) in self.edges


def build_graph(surface, L2):
    conns = enumerate_connections(surface, L2)
    vertices = {c.id: c for c in conns}
    edges = set()
    items = sorted(vertices.items())
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if intersections(items[i][1], items[j][1]) == 0:
                edges.add((items[i][0], items[j][0]))
    return SCGraph(surface, L2, vertices, edges)


def distance(graph, id1, id2):
    """BFS distance in the truncation; None when unreachable there."""
    for v in (id1, id2):
        if v not in graph.vertices:
            raise UnknownVertex(v)
    if id1 == id2:
        return 0
    seen = {id1: 0}
    q = deque([id1])
    while q:
        cur = q.popleft()
        for nxt in graph.adj[cur]:
            if nxt in seen:
                continue
            seen[nxt] = seen[cur] + 1
            if nxt == id2:
                return seen[nxt]
            q.append(nxt)
    return None


@dataclass(frozen=True)
class TriangleWitness:
    """Three pairwise disjoint connections bounding an embedded triangle."""

    sides: tuple        # ids in face-walk order
    hols: tuple         # oriented side vectors summing to zero
    face: object        # triangulate.Face
    tag: int            # distinguishes multiple faces on the same triple

    def holonomy_sum_is_zero(self):
        total = self.hols[0] + self.hols[1] + self.hols[2]
        return total.is_zero()


def triangle_faces(surface, c1, c2, c3):
    """All completion faces bounded by exactly this triple (0, 1 or 2)."""
    trio = [c1, c2, c3]
    ids = {c.id for c in trio}
    if len(ids) != 3:
        raise NotPairwiseDisjoint("sides must be three distinct connections")
    for i, a in enumerate(trio):
        for b in trio[i + 1 :]:
            if intersections(a, b) != 0:
                raise NotPairwiseDisjoint(f"{a.id} crosses {b.id}")
    tri = complete_triangulation(surface, seed=trio)
    out = []
    for face in tri.faces:
        if set(face.side_ids) == ids:
            out.append(face)
    witnesses = []
    for tag, face in enumerate(out):
        witnesses.append(
            TriangleWitness(face.side_ids, face.hols, face, tag)
        )
    return witnesses


def bounds_triangle(surface, c1, c2, c3):
    """First witness of the triple bounding a triangle, else None."""
    faces = triangle_faces(surface, c1, c2, c3)
    return faces[0] if faces else None


def triangles(graph, max_count):
    """Triangle witnesses over mutually adjacent triples, deterministic order.

    On a torus with one marked point a disjoint triple bounds two triangles;
    both witnesses are reported, tagged by face index.
    """
    ids = sorted(graph.vertices)
    out = []
    for i in range(len(ids)):
        if len(out) >= max_count:
            break
        for j in range(i + 1, len(ids)):
            if len(out) >= max_count:
                break
            if not graph.has_edge(ids[i], ids[j]):
                continue
            for k in range(j + 1, len(ids)):
                if len(out) >= max_count:
                    break
                if not (
                    graph.has_edge(ids[i], ids[k]) and graph.has_edge(ids[j], ids[k])
                ):
                    continue
                ws = triangle_faces(
                    graph.surface,
                    graph.vertices[ids[i]],
                    graph.vertices[ids[j]],
                    graph.vertices[ids[k]],
                )
                out.extend(ws)
    return out[:max_count]


def export(graph, fmt):
    """Deterministic serialization: DOT or JSON-lines."""
    if fmt == "dot":
        lines = ["graph saddle_connections {"]
        for v in sorted(graph.vertices):
            lines.append(f'  "{v}";')
        for a, b in sorted(graph.edges):
            lines.append(f'  "{a}" -- "{b}";')
        lines.append("}")
        return ("\n".join(lines) + "\n").encode()
    if fmt == "jsonl":
        lines = []
        for v in sorted(graph.vertices):
            c = graph.vertices[v]
            h = c.holonomy
            lines.append(
                json.dumps(
                    {
                        "type": "vertex",
                        "id": v,
                        "start": c.surface.class_of[c.start_corner],
                        "end": c.surface.class_of[c.end_corner],
                        "holx": h.x.pair(),
                        "holy": h.y.pair(),
                        "len2": c.len2.pair(),
                    },
                    sort_keys=True,
                )
            )
        for a, b in sorted(graph.edges):
            lines.append(json.dumps({"type": "edge", "ids": [a, b]}, sort_keys=True))
        return ("\n".join(lines) + "\n").encode()
    raise UnknownFormat(fmt)


def import_jsonl(data):
    """Vertex-id and edge sets back from a jsonl export."""
    vertices = set()
    edges = set()
    for line in data.decode().splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        if obj["type"] == "vertex":
            vertices.add(obj["id"])
        elif obj["type"] == "edge":
            a, b = obj["ids"]
            edges.add((min(a, b), max(a, b)))
        else:
            raise UnknownFormat(f"unknown record type {obj['type']!r}")
    return vertices, edges
