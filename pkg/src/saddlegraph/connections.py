"""Saddle connections: enumeration by plane unfolding, identity, intersections.

A saddle connection is stored as its chain of chart pieces together with a
canonical id; the id is orientation-free (the lexicographically smaller of the
two traversal encodings is chosen).
"""

from __future__ import annotations

import functools
from typing import NamedTuple

from .errors import InternalGeometryError
from .predicates import SegRel, min_dist2_to_segment, on_segment, seg_relation
from .scalars import Vec2
from .surface import PolygonalSurface


class Piece(NamedTuple):
    poly: int
    entry: Vec2
    exit: Vec2


def _full_text(s):
    """Always-two-part scalar text used inside connection ids."""
    a = f"{s.a.numerator}/{s.a.denominator}"
    b = f"{s.b.numerator}/{s.b.denominator}"
    return f"{a}+{b}r"


class SaddleConnection:
    """Oriented-then-canonicalized geodesic segment between marked corners."""

    __slots__ = (
        "surface",
        "pieces",
        "start_corner",
        "end_corner",
        "word",
        "hol_raw",
        "len2",
        "is_edge_locus",
        "id",
    )

    def __init__(self, surface, pieces, start_corner, end_corner, word, hol_raw,
                 is_edge_locus=False, _canonical=False):
        pieces = tuple(pieces)
        if not is_edge_locus and len(pieces) == 1:
            norm = _edge_locus_form(surface, pieces[0])
            if norm is not None:
                pieces, start_corner, end_corner, word, hol_raw = norm
                is_edge_locus = True
        self.surface = surface
        self.pieces = pieces
        self.start_corner = start_corner
        self.end_corner = end_corner
        self.word = tuple(word)
        self.hol_raw = hol_raw
        self.len2 = hol_raw.len2()
        self.is_edge_locus = is_edge_locus
        if not _canonical:
            fwd = (start_corner, self.word)
            rev_corner, rev_word, rev_pieces, rev_hol = self._reversal_data()
            if (rev_corner, rev_word) < fwd:
                self.start_corner, self.end_corner = rev_corner, self.start_corner
                self.word = rev_word
                self.pieces = rev_pieces
                self.hol_raw = rev_hol
        self.id = self._make_id()

    def _reversal_data(self):
        glu = self.surface.gluings
        rev_word = tuple(glu[w][:2] for w in reversed(self.word))
        rev_pieces = tuple(
            Piece(p.poly, p.exit, p.entry) for p in reversed(self.pieces)
        )
        eps = 1
        for p, e in self.word:
            eps *= glu[(p, e)][2]
        rev_hol = Vec2(-eps * self.hol_raw.x, -eps * self.hol_raw.y)
        return self.end_corner, rev_word, rev_pieces, rev_hol

    def _make_id(self):
        p, v = self.start_corner
        hol = self.hol_raw.canonical()
        if self.is_edge_locus:
            wtxt = f"E{self.pieces[0].poly}.{self.word_edge()}"
        else:
            wtxt = ";".join(f"{wp}.{we}" for wp, we in self.word)
        return f"v{p}.{v}:h{_full_text(hol.x)},{_full_text(hol.y)}:w{wtxt}"

    def word_edge(self):
        """For an edge-locus connection: the edge index of its single piece."""
        pg = self.surface.polygons[self.pieces[0].poly]
        a = self.pieces[0].entry
        b = self.pieces[0].exit
        for e in range(len(pg)):
            va, vb = pg.edge(e)
            if (va == a and vb == b) or (va == b and vb == a):
                return e
        raise InternalGeometryError("edge-locus piece is not an edge")

    @property
    def holonomy(self):
        return self.hol_raw.canonical()

    def reversed_pieces(self):
        return self._reversal_data()[2]

    def classes(self):
        s = self.surface
        return (s.class_of[self.start_corner], s.class_of[self.end_corner])

    def chart_pieces(self):
        """(poly, (a, b)) chart segments; edge loci are mirrored to both charts."""
        out = [(p.poly, (p.entry, p.exit)) for p in self.pieces]
        if self.is_edge_locus:
            p = self.pieces[0]
            e = self.word_edge()
            t = self.surface.transition(p.poly, e)
            out.append((t.poly, (t.apply(p.entry), t.apply(p.exit))))
        return out

    def __eq__(self, other):
        if not isinstance(other, SaddleConnection):
            return NotImplemented
        return self.id == other.id and self.surface is other.surface

    def __hash__(self):
        return hash(self.id)

    def __lt__(self, other):
        return (self.len2, self.id) < (other.len2, other.id)

    def __repr__(self):
        return f"SC({self.id})"


def sc_id(conn):
    return conn.id


def _edge_locus_form(surface, piece):
    """Canonical edge-connection data when a single piece runs along an edge."""
    pg = surface.polygons[piece.poly]
    n = len(pg)
    for e in range(n):
        a, b = pg.edge(e)
        if (piece.entry == a and piece.exit == b) or (
            piece.entry == b and piece.exit == a
        ):
            q, f, _ = surface.gluings[(piece.poly, e)]
            p_min, e_min = min((piece.poly, e), (q, f))
            va, vb = surface.polygons[p_min].edge(e_min)
            m = len(surface.polygons[p_min])
            return (
                (Piece(p_min, va, vb),),
                (p_min, e_min),
                (p_min, (e_min + 1) % m),
                (),
                vb - va,
            )
    return None


def edge_connection(surface, p, e):
    q, f, _ = surface.gluings[(p, e)]
    if (q, f) < (p, e):
        p, e = q, f
    a, b = surface.polygons[p].edge(e)
    n = len(surface.polygons[p])
    return SaddleConnection(
        surface,
        [Piece(p, a, b)],
        (p, e),
        (p, (e + 1) % n),
        (),
        b - a,
        is_edge_locus=True,
    )


class _State(NamedTuple):
    poly: int
    eps: int
    tau: Vec2
    lo: Vec2
    hi: Vec2
    parent: object
    exit_edge: int        # edge of parent's polygon that was crossed
    exit_dev: tuple       # developed endpoints of that full edge
    entry_edge: int       # edge of *this* polygon through which we entered


_MAX_STATES = 2_000_000


def _sector_search(surface, L2, start_poly, start_vtx, out):
    """Enumerate connections leaving corner (start_poly, start_vtx) strictly
    inside its open sector, with squared developed length <= L2."""
    pg0 = surface.polygons[start_poly]
    v0 = pg0.vertices[start_vtx]
    u, w = surface.corner_rays(start_poly, start_vtx)
    root = _State(start_poly, 1, -v0, u, w, None, -1, None, -1)
    stack = [root]
    steps = 0
    while stack:
        steps += 1
        if steps > _MAX_STATES:
            raise InternalGeometryError("unfolding search exceeded state cap")
        st = stack.pop()
        poly = surface.polygons[st.poly]
        n = len(poly)
        dev = [Vec2(st.eps * v.x + st.tau.x, st.eps * v.y + st.tau.y)
               for v in poly.vertices]
        inside = []
        for idx in range(n):
            q = dev[idx]
            if q.is_zero():
                continue
            if st.lo.wedge(q).sign() > 0 and q.wedge(st.hi).sign() > 0:
                inside.append((idx, q))
        # targets: unblocked in-cone vertices within the radius
        for idx, q in inside:
            if (q.len2() - L2).sign() > 0:
                continue
            blocked = False
            for jdx, r in inside:
                if jdx == idx:
                    continue
                if q.wedge(r).sign() == 0 and q.dot(r).sign() > 0 and (
                    r.len2() - q.len2()
                ).sign() < 0:
                    blocked = True
                    break
            if not blocked:
                out.append(_build_connection(surface, st, idx, q, start_poly, start_vtx))
        # subdivide the cone at interior vertex rays (deduped by direction)
        rays = [st.lo]
        for idx, q in sorted(
            inside,
            key=functools.cmp_to_key(lambda A, B: -A[1].wedge(B[1]).sign()),
        ):
            if rays[-1].wedge(q).sign() != 0:
                rays.append(q)
        rays.append(st.hi)
        for k in range(len(rays) - 1):
            a, b = rays[k], rays[k + 1]
            if a.wedge(b).sign() <= 0:
                continue
            for f in range(n):
                if f == st.entry_edge:
                    continue
                A, B = dev[f], dev[(f + 1) % n]
                portal = _clip_to_cone(A, B, a, b)
                if portal is None:
                    continue
                pa, pb = portal
                if (min_dist2_to_segment(Vec2(0, 0), pa, pb) - L2).sign() > 0:
                    continue
                if pa.wedge(pb).sign() < 0:
                    pa, pb = pb, pa
                t = surface.transition(st.poly, f)
                neps = st.eps * t.sign
                # placement of the neighbour chart into the developed plane
                ntau = Vec2(
                    st.tau.x - neps * t.shift.x, st.tau.y - neps * t.shift.y
                )
                stack.append(
                    _State(t.poly, neps, ntau, pa, pb, st, f, (A, B), t.edge)
                )


def _clip_to_cone(A, B, a, b):
    """Open part of segment [A, B] strictly inside the open cone (a, b)."""
    from fractions import Fraction

    from .scalars import ExactScalar

    u = B - A
    lo_t, hi_t = ExactScalar(0), ExactScalar(1)
    for ray, side in ((a, 1), (b, -1)):
        # need side * cross(ray, X(t)) > 0
        c0 = ray.wedge(A) * side
        c1 = ray.wedge(u) * side
        s1 = c1.sign()
        if s1 == 0:
            if c0.sign() <= 0:
                return None
            continue
        t_star = -c0 / c1
        if s1 > 0:
            if (t_star - lo_t).sign() > 0:
                lo_t = t_star
        else:
            if (t_star - hi_t).sign() < 0:
                hi_t = t_star
    if (hi_t - lo_t).sign() <= 0:
        return None
    return (A + u * lo_t, A + u * hi_t)


def _build_connection(surface, state, vtx_idx, q, start_poly, start_vtx):
    # collect the state chain root..current
    chain = []
    st = state
    while st is not None:
        chain.append(st)
        st = st.parent
    chain.reverse()
    # developed crossing points along segment 0 -> q
    crossings = [Vec2(0, 0)]
    word = []
    for child in chain[1:]:
        A, B = child.exit_dev
        e = B - A
        den = q.wedge(e)
        if den.sign() == 0:
            raise InternalGeometryError("sightline parallel to crossed edge")
        t = A.wedge(e) / den
        crossings.append(q * t)
        word.append((child.parent.poly, child.exit_edge))
    crossings.append(q)
    pieces = []
    for i, st in enumerate(chain):
        inv = lambda p, s=st: Vec2(s.eps * (p.x - s.tau.x), s.eps * (p.y - s.tau.y))
        pieces.append(Piece(st.poly, inv(crossings[i]), inv(crossings[i + 1])))
    end_corner = (chain[-1].poly, vtx_idx)
    return SaddleConnection(
        surface, pieces, (start_poly, start_vtx), end_corner, word, q
    )


def enumerate_connections(surface, L2):
    """All saddle connections with squared holonomy length <= L2, each once.

    Deterministic order: by squared length, then canonical id.
    """
    key = ("enum", L2.a, L2.b)
    cached = surface._cache.get(key)
    if cached is not None:
        return cached
    if L2.sign() <= 0:
        raise ValueError("L2 must be positive")
    found = {}
    for p, pg in enumerate(surface.polygons):
        for e in range(len(pg)):
            c = edge_connection(surface, p, e)
            if (c.len2 - L2).sign() <= 0:
                found[c.id] = c
    hits = []
    for p, pg in enumerate(surface.polygons):
        for v in range(len(pg)):
            _sector_search(surface, L2, p, v, hits)
    for c in hits:
        found.setdefault(c.id, c)
    result = tuple(sorted(found.values()))
    surface._cache[key] = result
    return result


# -- intersections -----------------------------------------------------------


def _bbox(a, b):
    return (min(a.x, b.x), max(a.x, b.x), min(a.y, b.y), max(a.y, b.y))


def _bbox_disjoint(b1, b2):
    return b1[1] < b2[0] or b2[1] < b1[0] or b1[3] < b2[2] or b2[3] < b1[2]


def _point_reps(surface, poly, x):
    """All chart representations of a non-corner surface point on/in `poly`."""
    reps = [(poly, x.key())]
    pg = surface.polygons[poly]
    for e in range(len(pg)):
        a, b = pg.edge(e)
        if on_segment(x, a, b):
            t = surface.transition(poly, e)
            y = t.apply(x)
            reps.append((t.poly, y.key()))
    return min(reps)


def _is_corner(surface, poly, x):
    return any(x == v for v in surface.polygons[poly].vertices)


def _piece_buckets(conn):
    buckets = {}
    for poly, (a, b) in conn.chart_pieces():
        if a == b:
            continue
        buckets.setdefault(poly, []).append(((a, b), _bbox(a, b)))
    return buckets


def intersections(g1, g2):
    """Number of transverse interior crossing points of two connections."""
    if g1.id == g2.id:
        return 0
    surface = g1.surface
    b1 = _piece_buckets(g1)
    b2 = _piece_buckets(g2)
    pts = set()
    for poly, segs1 in b1.items():
        segs2 = b2.get(poly)
        if not segs2:
            continue
        for (s1, box1) in segs1:
            for (s2, box2) in segs2:
                if _bbox_disjoint(box1, box2):
                    continue
                rel = seg_relation(s1, s2)
                if rel is SegRel.DISJOINT:
                    continue
                if rel is SegRel.COLLINEAR_OVERLAP:
                    raise InternalGeometryError(
                        "distinct saddle connections overlap on a segment"
                    )
                if rel is SegRel.INTERIOR_CROSS:
                    from .predicates import segment_cross_point

                    x = segment_cross_point(s1, s2)
                    pts.add(_point_reps(surface, poly, x))
                    continue
                # endpoint touch: the contact is an endpoint of some piece
                for x in (s1[0], s1[1]):
                    if on_segment(x, *s2):
                        if not _is_corner(surface, poly, x):
                            pts.add(_point_reps(surface, poly, x))
                for x in (s2[0], s2[1]):
                    if on_segment(x, *s1):
                        if not _is_corner(surface, poly, x):
                            pts.add(_point_reps(surface, poly, x))
    return len(pts)
