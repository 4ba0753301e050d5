"""Exact geometric predicates: orientation, segment classification, clipping.

No predicate here ever inspects a floating-point value.
"""

from __future__ import annotations

from enum import Enum

from .scalars import Vec2


class SegRel(Enum):
    DISJOINT = "disjoint"
    ENDPOINT_TOUCH = "endpoint_touch"
    INTERIOR_CROSS = "interior_cross"
    COLLINEAR_OVERLAP = "collinear_overlap"


def orient(p, q, r):
    """Sign of (q-p) wedge (r-p); +1 means counterclockwise."""
    return (q - p).wedge(r - p).sign()


def on_segment(p, a, b):
    """Is p on the closed segment [a, b]?  Assumes a != b unless degenerate."""
    if orient(a, b, p) != 0:
        return False
    return (p - a).dot(p - b).sign() <= 0


def seg_relation(s1, s2):
    """Exact classification of two nondegenerate segments ((a,b), (c,d))."""
    a, b = s1
    c, d = s2
    d1 = orient(a, b, c)
    d2 = orient(a, b, d)
    d3 = orient(c, d, a)
    d4 = orient(c, d, b)

    if d1 == 0 and d2 == 0 and d3 == 0 and d4 == 0:
        # all on one line: compare spans along the line
        u = b - a
        ta, tb = u.dot(a - a), u.dot(b - a)
        tc, td = u.dot(c - a), u.dot(d - a)
        lo1, hi1 = min(ta, tb), max(ta, tb)
        lo2, hi2 = min(tc, td), max(tc, td)
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if lo > hi:
            return SegRel.DISJOINT
        if lo < hi:
            return SegRel.COLLINEAR_OVERLAP
        return SegRel.ENDPOINT_TOUCH

    if d1 * d2 < 0 and d3 * d4 < 0:
        return SegRel.INTERIOR_CROSS

    if (
        (d1 == 0 and on_segment(c, a, b))
        or (d2 == 0 and on_segment(d, a, b))
        or (d3 == 0 and on_segment(a, c, d))
        or (d4 == 0 and on_segment(b, c, d))
    ):
        return SegRel.ENDPOINT_TOUCH
    return SegRel.DISJOINT


def line_intersection(p1, p2, p3, p4):
    """Intersection point of lines (p1 p2) and (p3 p4); None when parallel."""
    u = p2 - p1
    v = p4 - p3
    den = u.wedge(v)
    if den.sign() == 0:
        return None
    t = (p3 - p1).wedge(v) / den
    return p1 + u * t


def segment_cross_point(s1, s2):
    """The single common point of two segments known to meet transversally."""
    p = line_intersection(s1[0], s1[1], s2[0], s2[1])
    if p is None:
        raise ValueError("segments are parallel")
    return p


def min_dist2_to_segment(origin, a, b):
    """Exact squared distance from `origin` to segment [a, b]."""
    u = b - a
    w = origin - a
    uu = u.len2()
    if uu.sign() == 0:
        return w.len2()
    t = w.dot(u)
    if t.sign() <= 0:
        return w.len2()
    if (t - uu).sign() >= 0:
        return (origin - b).len2()
    # |w|^2 - (w.u)^2/|u|^2
    return w.len2() - t * t / uu


def convex_clip(poly, half_planes):
    """Clip a convex ccw polygon by closed half-planes {x: n.(x-p) >= 0}.

    `poly` is a list of Vec2; each half-plane is (p, n).  Returns the clipped
    vertex list (possibly empty / degenerate).
    """
    out = list(poly)
    for p, n in half_planes:
        if not out:
            return []
        nxt = []
        m = len(out)
        vals = [n.dot(v - p).sign() for v in out]
        for i in range(m):
            v0, v1 = out[i], out[(i + 1) % m]
            s0, s1 = vals[i], vals[(i + 1) % m]
            if s0 >= 0:
                nxt.append(v0)
            if s0 * s1 < 0:
                q = line_intersection(v0, v1, p, p + n.rot90())
                nxt.append(q)
        out = _dedupe_ring(nxt)
    return out


def _dedupe_ring(pts):
    out = []
    for v in pts:
        if not out or v != out[-1]:
            out.append(v)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def polygon_area2(pts):
    """Twice the signed area of a polygon (ccw positive)."""
    from .scalars import ZERO

    total = ZERO
    m = len(pts)
    for i in range(m):
        total = total + pts[i].wedge(pts[(i + 1) % m])
    return total


def is_strictly_convex_ccw(pts):
    m = len(pts)
    if m < 3:
        return False
    for i in range(m):
        if orient(pts[i], pts[(i + 1) % m], pts[(i + 2) % m]) <= 0:
            return False
    return True


def point_in_convex(pt, poly, strict=False):
    """Point-in-convex-ccw-polygon test; `strict` demands the open interior."""
    m = len(poly)
    for i in range(m):
        s = orient(poly[i], poly[(i + 1) % m], pt)
        if s < 0 or (strict and s == 0):
            return False
    return True
