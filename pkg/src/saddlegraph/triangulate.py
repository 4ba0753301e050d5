"""Triangulations by saddle connections: greedy completion, flips, flip BFS.

A triangulation is a maximal set of pairwise disjoint saddle connections; it
always has 6g-6+3p edges and 4g-4+2p triangular faces.  Faces are computed by
walking germ successors clockwise around the marked points.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .connections import SaddleConnection, enumerate_connections, intersections
from .errors import (
    InternalGeometryError,
    SeedNotDisjoint,
    UnknownEdge,
)
from .flow import _chart_sign, _inward_start, trace_ray
from .germs import class_germ_cycles
from .predicates import on_segment, orient
from .scalars import ExactScalar, Vec2
from .connections import Piece


@dataclass(frozen=True)
class Face:
    """One triangle: departing darts, oriented side vectors, chart anchor.

    The developed triangle lives in the chart of `anchor_corner`'s polygon:
    vertices are (apex, apex + hols[0], apex + hols[0] + hols[1]).
    """

    darts: tuple          # ((conn_id, end), ...) three departing germs
    hols: tuple           # oriented side vectors in the anchor chart frame
    anchor_corner: tuple  # (poly, vtx), apex of the development
    apex: object          # Vec2 chart position of the first vertex

    @property
    def side_ids(self):
        return tuple(d[0] for d in self.darts)

    def vertices(self):
        a = self.apex
        b = a + self.hols[0]
        c = b + self.hols[1]
        return (a, b, c)

    def area2(self):
        return self.hols[0].wedge(self.hols[1])


class Triangulation:
    def __init__(self, surface, conns, faces):
        self.surface = surface
        self.edges = {c.id: c for c in conns}
        self.faces = tuple(faces)

    def key(self):
        return tuple(sorted(self.edges))

    def __eq__(self, other):
        return isinstance(other, Triangulation) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Triangulation({len(self.edges)} edges, {len(self.faces)} faces)"


def expected_edge_count(surface):
    return 6 * surface.genus - 6 + 3 * surface.num_marked()


def expected_face_count(surface):
    return 4 * surface.genus - 4 + 2 * surface.num_marked()


def _oriented_hol(conn, end):
    """Developed side vector of a traversal leaving from `end`, in the chart
    of that end's corner."""
    if end == 0:
        return conn.hol_raw
    eps = 1
    for w in conn.word:
        eps *= conn.surface.gluings[w][2]
    return Vec2(-eps * conn.hol_raw.x, -eps * conn.hol_raw.y)


def faces_from_edges(surface, conns):
    """Walk germ successors to produce the triangular faces."""
    conns = {c.id: c for c in conns}
    cycles = class_germ_cycles(surface, conns.values())
    succ = {}
    for cyc in cycles:
        m = len(cyc)
        for i, g in enumerate(cyc):
            succ[(g.conn_id, g.end)] = cyc[(i + 1) % m]
    corner_of = {}
    for cyc in cycles:
        for g in cyc:
            corner_of[(g.conn_id, g.end)] = g.corner

    faces = []
    seen = set()
    for key in sorted(succ):
        if key in seen:
            continue
        darts = []
        cur = key
        while True:
            seen.add(cur)
            dep = succ[cur]
            darts.append((dep.conn_id, dep.end))
            cur = (dep.conn_id, 1 - dep.end)
            if cur == key:
                break
        if len(darts) != 3:
            raise InternalGeometryError(
                f"face walk of length {len(darts)}; edge set is not a triangulation"
            )
        hols = [_oriented_hol(conns[c], e) for c, e in darts]
        # side 2 and 3 live in other charts: fix signs by the zero-sum relation
        h1, h2, h3 = hols
        fixed = None
        for s2 in (1, -1):
            for s3 in (1, -1):
                tot = h1 + h2 * ExactScalar(s2) + h3 * ExactScalar(s3)
                if tot.is_zero():
                    if fixed is not None:
                        raise InternalGeometryError("ambiguous face closure")
                    fixed = (h1, h2 * ExactScalar(s2), h3 * ExactScalar(s3))
        if fixed is None:
            raise InternalGeometryError("face sides do not close up")
        corner = corner_of[(darts[0][0], darts[0][1])]
        apex = surface.polygons[corner[0]].vertices[corner[1]]
        face = Face(tuple(darts), fixed, corner, apex)
        if face.area2().sign() <= 0:
            raise InternalGeometryError("face developed with non-positive area")
        faces.append(face)
    return faces


def _validate(surface, conns, faces):
    n_edges = expected_edge_count(surface)
    n_faces = expected_face_count(surface)
    if len(conns) != n_edges:
        raise InternalGeometryError(f"{len(conns)} edges, expected {n_edges}")
    if len(faces) != n_faces:
        raise InternalGeometryError(f"{len(faces)} faces, expected {n_faces}")
    total = ExactScalar(0)
    for f in faces:
        total = total + f.area2()
    if total != surface.total_area2():
        raise InternalGeometryError("faces do not tile the surface area")


def complete_triangulation(surface, seed=(), start_l2=None):
    """Greedy completion of a pairwise-disjoint seed to a full triangulation.

    Deterministic: connections are scanned by (squared length, canonical id);
    the truncation bound doubles until the cardinality 6g-6+3p is reached.
    """
    seed = list(seed)
    for i, a in enumerate(seed):
        for b in seed[i + 1 :]:
            if a.id != b.id and intersections(a, b) != 0:
                raise SeedNotDisjoint(f"{a.id} crosses {b.id}")
            if a.id == b.id:
                raise SeedNotDisjoint("duplicate seed connection")
    target = expected_edge_count(surface)
    chosen = {c.id: c for c in seed}
    l2 = start_l2
    if l2 is None:
        l2 = max(
            [c.len2 for c in seed]
            + [surface.polygons[p].edge_vec(e).len2() for (p, e) in surface.gluings],
        )
    for _ in range(64):
        for cand in enumerate_connections(surface, l2):
            if cand.id in chosen:
                continue
            if all(intersections(cand, c) == 0 for c in chosen.values()):
                chosen[cand.id] = cand
                if len(chosen) == target:
                    break
        if len(chosen) == target:
            break
        l2 = l2 * ExactScalar(2)
    else:
        raise InternalGeometryError("triangulation did not complete")
    conns = sorted(chosen.values())
    faces = faces_from_edges(surface, conns)
    _validate(surface, conns, faces)
    return Triangulation(surface, conns, faces)


def connection_through(surface, poly, point, direction, budget=10_000):
    """The saddle connection through an interior point in a given direction."""
    fp, fpos, fdir = _inward_start(surface, poly, point, direction)
    bp, bpos, bdir = _inward_start(surface, poly, point, -direction)
    fwd = trace_ray(surface, (fp, fpos), fdir, crossing_budget=budget)
    bwd = trace_ray(surface, (bp, bpos), bdir, crossing_budget=budget)
    if fwd.terminal != "hit_marked" or bwd.terminal != "hit_marked":
        raise InternalGeometryError("segment trace did not reach marked points")
    back_pieces = [Piece(p.poly, p.exit, p.entry) for p in reversed(bwd.pieces)]
    mid_a = back_pieces[-1]
    mid_b = fwd.pieces[0]
    if mid_a.poly == mid_b.poly and mid_a.exit == mid_b.entry:
        pieces = back_pieces[:-1] + [Piece(mid_a.poly, mid_a.entry, mid_b.exit)] + \
            list(fwd.pieces[1:])
    else:
        # the two halves start in different charts of the same edge point
        pieces = back_pieces + list(fwd.pieces)
    word = []
    for piece, nxt in zip(pieces, pieces[1:]):
        pg = surface.polygons[piece.poly]
        for e in range(len(pg)):
            a, b = pg.edge(e)
            if on_segment(piece.exit, a, b):
                tr = surface.transition(piece.poly, e)
                if tr.poly == nxt.poly and tr.apply(piece.exit) == nxt.entry:
                    word.append((piece.poly, e))
                    break
        else:
            raise InternalGeometryError("merged trajectory does not chain")
    d0 = pieces[0].exit - pieces[0].entry
    hol = Vec2(ExactScalar(0), ExactScalar(0))
    for piece in pieces:
        dv = piece.exit - piece.entry
        hol = hol + dv * _chart_sign(d0, dv)
    return SaddleConnection(
        surface, pieces, bwd.hit_corner, fwd.hit_corner, tuple(word), hol
    )


def _locate_on_connection(conn, frac):
    """Chart point at a fraction of the way from end 0 to end 1."""
    hol = conn.hol_raw
    hl2 = hol.len2()
    total = ExactScalar(0)
    target = frac
    for piece in conn.pieces:
        dv = piece.exit - piece.entry
        part = abs(dv.dot(hol)) / hl2 if hl2.sign() else ExactScalar(0)
        if ((target - total) - part).sign() <= 0 and part.sign() > 0:
            lam = (target - total) / part
            return piece.poly, piece.entry + dv * lam, dv
        total = total + part
    raise InternalGeometryError("fraction beyond connection length")


def flip(tri, edge_id):
    """Elementary move across `edge_id`; None when the quadrilateral formed by
    the two adjacent faces is not strictly convex."""
    if edge_id not in tri.edges:
        raise UnknownEdge(edge_id)
    surface = tri.surface
    conn = tri.edges[edge_id]
    adj = []
    for face in tri.faces:
        for k, (cid, end) in enumerate(face.darts):
            if cid == edge_id:
                adj.append((face, k, end))
    if len(adj) != 2:
        raise InternalGeometryError("edge does not bound two face slots")
    (f1, k1, end1), (f2, k2, end2) = adj
    if f1 is f2:
        return None  # degenerate: same face on both sides
    v1 = f1.vertices()
    p_seg = (v1[k1], v1[(k1 + 1) % 3])
    v2 = f2.vertices()
    q_seg = (v2[k2], v2[(k2 + 1) % 3])
    # attach f2 across the shared edge: sigma*z + c with q_seg -> reversed p_seg
    dq = q_seg[1] - q_seg[0]
    dp = p_seg[1] - p_seg[0]
    sigma = -1 if dq == dp else 1
    if not (dq * ExactScalar(sigma) + dp).is_zero():
        raise InternalGeometryError("shared edge develops inconsistently")
    c = p_seg[1] - q_seg[0] * ExactScalar(sigma)
    apex2 = v2[(k2 + 2) % 3] * ExactScalar(sigma) + c
    apex1 = v1[(k1 + 2) % 3]
    quad = (p_seg[0], apex2, p_seg[1], apex1)
    for i in range(4):
        if orient(quad[i], quad[(i + 1) % 4], quad[(i + 2) % 4]) <= 0:
            return None
    # realize the new diagonal apex2 -> apex1 through the crossing with conn
    from .predicates import segment_cross_point

    m_frame = segment_cross_point((apex2, apex1), p_seg)
    lam = (m_frame - p_seg[0]).dot(dp) / dp.len2()
    frac = lam if end1 == 0 else ExactScalar(1) - lam
    poly_m, m_chart, piece_dir = _locate_on_connection(conn, frac)
    tau = piece_dir if end1 == 0 else -piece_dir
    chi = 1 if tau.dot(dp).sign() > 0 else -1
    d_frame = apex1 - apex2
    d_chart = Vec2(chi * d_frame.x, chi * d_frame.y)
    diag = connection_through(surface, poly_m, m_chart, d_chart)
    new_edges = [c for cid, c in tri.edges.items() if cid != edge_id]
    new_edges.append(diag)
    faces = faces_from_edges(surface, sorted(new_edges))
    _validate(surface, sorted(new_edges), faces)
    return Triangulation(surface, sorted(new_edges), faces)


@dataclass(frozen=True)
class FlipGraph:
    nodes: dict          # key -> Triangulation
    links: set           # frozenset pairs of keys
    blocked: int         # NotFlippable encounters


def flip_bfs(surface, t0, depth):
    """Breadth-first exploration of the triangulation flip graph."""
    start = t0.key()
    nodes = {start: t0}
    links = set()
    blocked = 0
    frontier = deque([(start, 0)])
    while frontier:
        key, d = frontier.popleft()
        if d >= depth:
            continue
        tri = nodes[key]
        for eid in sorted(tri.edges):
            nxt = flip(tri, eid)
            if nxt is None:
                blocked += 1
                continue
            nkey = nxt.key()
            links.add(frozenset((key, nkey)))
            if nkey not in nodes:
                nodes[nkey] = nxt
                frontier.append((nkey, d + 1))
    return FlipGraph(nodes, links, blocked)
