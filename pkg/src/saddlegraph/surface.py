"""Half-translation surfaces as glued convex polygons.

A surface is a set of strictly convex ccw polygons with edges glued in pairs
by maps z -> s*z + c (s = +1 translation, s = -1 half-translation).  Every
polygon corner is a marked point; cone angles are exact integer multiples of
pi computed by a developed corner walk.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    BadConeAngle,
    Disconnected,
    FieldMismatch,
    GluingMismatch,
    NonConvexPolygon,
    ParseError,
    SingularMatrix,
    StratumError,
    UnknownName,
)
from .predicates import is_strictly_convex_ccw, polygon_area2
from .scalars import ExactScalar, Mat2, Vec2, scalar_from_pair, vec


@dataclass(frozen=True)
class Transition:
    """Chart map z -> sign*z + shift crossing a glued edge."""

    poly: int
    edge: int
    sign: int
    shift: Vec2

    def apply(self, p):
        return Vec2(self.sign * p.x + self.shift.x, self.sign * p.y + self.shift.y)

    def apply_dir(self, d):
        return Vec2(self.sign * d.x, self.sign * d.y)


class Polygon:
    __slots__ = ("name", "vertices")

    def __init__(self, name, vertices):
        vertices = tuple(vertices)
        if not is_strictly_convex_ccw(vertices):
            raise NonConvexPolygon(f"polygon {name!r} is not strictly convex ccw")
        self.name = name
        self.vertices = vertices

    def __len__(self):
        return len(self.vertices)

    def edge(self, i):
        v = self.vertices
        return (v[i], v[(i + 1) % len(v)])

    def edge_vec(self, i):
        a, b = self.edge(i)
        return b - a

    def area2(self):
        return polygon_area2(self.vertices)


class PolygonalSurface:
    """Validated half-translation surface (X, omega; Sigma).

    Immutable after construction; derived data (corner classes, cone angles,
    genus) is computed eagerly, per-operation caches live in `_cache`.
    """

    def __init__(self, field_d, polygons, gluings):
        self.field_d = int(field_d)
        self.polygons = tuple(polygons)
        # gluings: dict (poly, edge) -> (poly', edge', sign), symmetric
        self.gluings = dict(gluings)
        self._cache = {}
        self._validate_gluings()
        self._check_connected()
        self._build_corner_classes()
        self._check_stratum()

    # -- structure ----------------------------------------------------------

    def _validate_gluings(self):
        slots = [(p, e) for p, poly in enumerate(self.polygons) for e in range(len(poly))]
        seen = set()
        for slot in slots:
            if slot not in self.gluings:
                raise GluingMismatch(f"edge {slot} is not glued")
        for (p, e), (q, f, s) in self.gluings.items():
            if (p, e) == (q, f):
                raise GluingMismatch(f"edge {(p, e)} glued to itself")
            back = self.gluings.get((q, f))
            if back != (p, e, s):
                raise GluingMismatch(f"gluing of {(p, e)} is not symmetric")
            ve = self.polygons[p].edge_vec(e)
            vf = self.polygons[q].edge_vec(f)
            if s == 1:
                if vf != -ve:
                    raise GluingMismatch(
                        f"sign +1 gluing {(p, e)}->{(q, f)} needs vec' = -vec"
                    )
            elif s == -1:
                if vf != ve:
                    raise GluingMismatch(
                        f"sign -1 gluing {(p, e)}->{(q, f)} needs vec' = vec"
                    )
            else:
                raise GluingMismatch(f"gluing sign must be +-1, got {s}")
            seen.add((p, e))
        if len(seen) != len(slots):
            raise GluingMismatch("every edge must be glued exactly once")

    def transition(self, poly, edge):
        """Chart transition for crossing edge `edge` of polygon `poly`."""
        q, f, s = self.gluings[(poly, edge)]
        v_start = self.polygons[poly].vertices[edge]
        w_end = self.polygons[q].vertices[(f + 1) % len(self.polygons[q])]
        # start of e maps to end of e'
        shift = Vec2(w_end.x - s * v_start.x, w_end.y - s * v_start.y)
        return Transition(q, f, s, shift)

    def _check_connected(self):
        if not self.polygons:
            raise Disconnected("no polygons")
        seen = {0}
        stack = [0]
        while stack:
            p = stack.pop()
            for e in range(len(self.polygons[p])):
                q, _, _ = self.gluings[(p, e)]
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        if len(seen) != len(self.polygons):
            raise Disconnected("glued complex is not connected")

    # -- corner classes and cone angles --------------------------------------

    def _next_corner(self, poly, vtx):
        """Walk step around a vertex class: cross the outgoing edge."""
        q, f, _ = self.gluings[(poly, vtx)]
        return (q, (f + 1) % len(self.polygons[q]))

    def _build_corner_classes(self):
        corners = [(p, v) for p, poly in enumerate(self.polygons) for v in range(len(poly))]
        classes = []
        owner = {}
        for c in corners:
            if c in owner:
                continue
            cycle = [c]
            owner[c] = len(classes)
            cur = self._next_corner(*c)
            while cur != c:
                owner[cur] = len(classes)
                cycle.append(cur)
                cur = self._next_corner(*cur)
            classes.append(tuple(cycle))
        self.corner_classes = tuple(classes)
        self.class_of = owner
        self.cone_halfturns = tuple(self._cone_halfturns(cy) for cy in classes)
        for m in self.cone_halfturns:
            if m < 1:
                raise BadConeAngle(f"cone angle {m}*pi below pi")
        # every class is marked: Sigma = all vertex classes
        self.marked_flags = tuple(True for _ in classes)

    def corner_rays(self, poly, vtx):
        """(u, v): outgoing edge direction and reversed incoming direction."""
        pg = self.polygons[poly]
        u = pg.edge_vec(vtx)
        v = -pg.edge_vec((vtx - 1) % len(pg))
        return u, v

    def _cone_halfturns(self, cycle):
        """Cone angle at a vertex class in units of pi, exactly.

        Develops the clockwise wedge walk; each wedge is < pi, transitions
        are +-identity, so the total is the number of times the sweeping ray
        meets the line of the start ray.
        """
        rays = []
        eps = 1
        first_v = None
        for poly, vtx in cycle:
            u, v = self.corner_rays(poly, vtx)
            if first_v is None:
                first_v = Vec2(eps * v.x, eps * v.y)
            rays.append(Vec2(eps * u.x, eps * u.y))
            _, _, s = self.gluings[(poly, vtx)]
            eps *= s
        # closing consistency: last developed shared ray is +-first_v
        closing = rays[-1]
        wedge_closes = first_v.wedge(closing).sign() == 0
        if not wedge_closes:
            raise BadConeAngle("corner walk does not close on a half-turn")
        # ccw chain from rays[-1] back to first_v through rays[-2], ...
        chain = [rays[-1]] + rays[-2::-1] + [first_v]
        base = chain[0]
        count = 0
        for i in range(len(chain) - 1):
            a, b = chain[i], chain[i + 1]
            # half-open ccw sector (a, b], each step strictly below pi
            for w in (base, -base):
                if b.wedge(w).sign() == 0 and b.dot(w).sign() > 0:
                    count += 1
                elif a.wedge(w).sign() > 0 and w.wedge(b).sign() > 0:
                    count += 1
        return count

    def _check_stratum(self):
        ks = sorted((m - 2 for m in self.cone_halfturns), reverse=True)
        V = len(self.corner_classes)
        E = len(self.gluings) // 2
        F = len(self.polygons)
        chi = V - E + F
        if (2 - chi) % 2 != 0:
            raise StratumError(f"odd Euler characteristic {chi}")
        self.genus = (2 - chi) // 2
        if sum(ks) != 4 * self.genus - 4:
            raise StratumError(f"stratum sum {sum(ks)} != 4g-4 = {4 * self.genus - 4}")
        if any(k < -1 for k in ks):
            raise StratumError("pole of order greater than one")
        self.stratum = tuple(ks)

    # -- global data ----------------------------------------------------------

    def total_area2(self):
        total = ExactScalar(0)
        for pg in self.polygons:
            total = total + pg.area2()
        return total

    def total_area(self):
        half = ExactScalar(Fraction(1, 2))
        return self.total_area2() * half

    def is_translation(self):
        """A global recoloring makes every transition a translation?"""
        color = {0: 1}
        stack = [0]
        while stack:
            p = stack.pop()
            for e in range(len(self.polygons[p])):
                q, _, s = self.gluings[(p, e)]
                want = color[p] * s
                if q in color:
                    if color[q] != want:
                        return False
                else:
                    color[q] = want
                    stack.append(q)
        return True

    def num_marked(self):
        return len(self.corner_classes)

    # -- identity ---------------------------------------------------------------

    def canonical_data(self):
        polys = tuple(
            (pg.name, tuple(v.key() for v in pg.vertices)) for pg in self.polygons
        )
        glu = tuple(sorted((k, v) for k, v in self.gluings.items()))
        return (self.field_d, polys, glu)

    def __eq__(self, other):
        if not isinstance(other, PolygonalSurface):
            return NotImplemented
        return self.canonical_data() == other.canonical_data()

    def __hash__(self):
        h = self._cache.get("hash")
        if h is None:
            h = hash(self.canonical_data())
            self._cache["hash"] = h
        return h

    def __repr__(self):
        return (
            f"PolygonalSurface(g={self.genus}, p={self.num_marked()}, "
            f"polygons={len(self.polygons)})"
        )


@dataclass(frozen=True)
class SurfaceInfo:
    genus: int
    num_marked: int
    stratum: tuple
    total_area: ExactScalar
    is_translation: bool

    def as_dict(self):
        return {
            "genus": self.genus,
            "num_marked": self.num_marked,
            "stratum": list(self.stratum),
            "total_area": self.total_area.pair(),
            "is_translation": self.is_translation,
        }


def surface_info(s):
    return SurfaceInfo(
        genus=s.genus,
        num_marked=s.num_marked(),
        stratum=s.stratum,
        total_area=s.total_area(),
        is_translation=s.is_translation(),
    )


def _check_field(s, scalars):
    for x in scalars:
        if not x.is_rational and x.d != s.field_d:
            raise FieldMismatch(f"entry {x.text()} outside Q(sqrt({s.field_d}))")


def apply_matrix(s, A):
    """Post-compose the flat atlas with A (exact GL(2) action)."""
    det = A.det()
    if det.sign() == 0:
        raise SingularMatrix("apply_matrix needs det != 0")
    _check_field(s, A.entries())
    reverse = det.sign() < 0
    polys = []
    for pg in s.polygons:
        verts = [A.apply(v) for v in pg.vertices]
        if reverse:
            verts = [verts[0]] + verts[:0:-1]
        polys.append(Polygon(pg.name, verts))
    gluings = {}
    for (p, e), (q, f, sign) in s.gluings.items():
        if reverse:
            ne = (len(s.polygons[p]) - 1 - e) % len(s.polygons[p])
            nf = (len(s.polygons[q]) - 1 - f) % len(s.polygons[q])
            gluings[(p, ne)] = (q, nf, sign)
        else:
            gluings[(p, e)] = (q, f, sign)
    return PolygonalSurface(s.field_d, polys, gluings)


# -- file format ----------------------------------------------------------------

_TOP_KEYS = {"field_d", "polygons", "gluings"}
_POLY_KEYS = {"name", "vertices"}
_GLUE_KEYS = {"from", "to", "sign"}


def parse_surface(text):
    """Parse and validate the JSON surface format (strict: unknown keys rejected)."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from None
    if not isinstance(data, dict) or set(data) != _TOP_KEYS:
        raise ParseError(f"top level must have exactly keys {sorted(_TOP_KEYS)}")
    d = data["field_d"]
    if not isinstance(d, int) or d < 0:
        raise ParseError("field_d must be a non-negative integer")
    names = {}
    polys = []
    for i, p in enumerate(data["polygons"]):
        if not isinstance(p, dict) or set(p) != _POLY_KEYS:
            raise ParseError(f"polygon entries need exactly keys {sorted(_POLY_KEYS)}")
        if p["name"] in names:
            raise ParseError(f"duplicate polygon name {p['name']!r}")
        names[p["name"]] = i
        verts = []
        for coord in p["vertices"]:
            if not (isinstance(coord, list) and len(coord) == 2):
                raise ParseError("vertex must be [[a,b],[a,b]] pair of pairs")
            verts.append(Vec2(scalar_from_pair(coord[0], d), scalar_from_pair(coord[1], d)))
        try:
            polys.append(Polygon(p["name"], verts))
        except NonConvexPolygon:
            raise
    gluings = {}
    for g in data["gluings"]:
        if not isinstance(g, dict) or set(g) != _GLUE_KEYS:
            raise ParseError(f"gluing entries need exactly keys {sorted(_GLUE_KEYS)}")
        try:
            p = names[g["from"][0]]
            q = names[g["to"][0]]
        except KeyError as e:
            raise ParseError(f"unknown polygon name {e}") from None
        e0, e1 = int(g["from"][1]), int(g["to"][1])
        sign = int(g["sign"])
        for slot, val in (((p, e0), (q, e1, sign)), ((q, e1), (p, e0, sign))):
            if slot in gluings and gluings[slot] != val:
                raise GluingMismatch(f"edge {slot} glued twice")
            gluings[slot] = val
    return PolygonalSurface(d, polys, gluings)


def builtin(name):
    """Built-in test surfaces; construction is deterministic."""
    if name == "square_torus":
        sq = Polygon("sq", [vec(0, 0), vec(1, 0), vec(1, 1), vec(0, 1)])
        gl = {}
        _pair(gl, (0, 0), (0, 2), 1)
        _pair(gl, (0, 1), (0, 3), 1)
        return PolygonalSurface(1, [sq], gl)
    if name == "regular_octagon":
        r = ExactScalar(1, 1, 2)  # 1 + sqrt(2)
        one = ExactScalar(1)
        pts = [
            Vec2(r, -one),
            Vec2(r, one),
            Vec2(one, r),
            Vec2(-one, r),
            Vec2(-r, one),
            Vec2(-r, -one),
            Vec2(-one, -r),
            Vec2(one, -r),
        ]
        oct_ = Polygon("oct", pts)
        gl = {}
        for e in range(4):
            _pair(gl, (0, e), (0, e + 4), 1)
        return PolygonalSurface(2, [oct_], gl)
    if name == "L_shape_2x1":
        A = Polygon("A", [vec(0, 0), vec(1, 0), vec(1, 1), vec(0, 1)])
        B = Polygon("B", [vec(1, 0), vec(2, 0), vec(2, 1), vec(1, 1)])
        C = Polygon("C", [vec(0, 1), vec(1, 1), vec(1, 2), vec(0, 2)])
        gl = {}
        _pair(gl, (0, 1), (1, 3), 1)  # A right <-> B left
        _pair(gl, (0, 2), (2, 0), 1)  # A top <-> C bottom
        _pair(gl, (0, 0), (2, 2), 1)  # A bottom <-> C top
        _pair(gl, (1, 0), (1, 2), 1)  # B bottom <-> B top
        _pair(gl, (0, 3), (1, 1), 1)  # A left <-> B right
        _pair(gl, (2, 3), (2, 1), 1)  # C left <-> C right
        return PolygonalSurface(1, [A, B, C], gl)
    raise UnknownName(f"no builtin surface {name!r}")


def _pair(gl, a, b, sign):
    gl[a] = (*b, sign)
    gl[b] = (*a, sign)
